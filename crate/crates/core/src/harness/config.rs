use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array_model::ScenarioConfig;
use crate::assbl::AssblConfig;
use crate::dictionary::DistanceRule;
use crate::error::{Error, Result};
use crate::measurement::PhaseResolution;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `N = U = 64`, `G = 4`, `N_RF = 4`, `T_p = 16`, `L = 2`, 100 trials.
    #[default]
    Desk,
    /// `N = U = 256`, `T_p = 32`.
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            other => Err(Error::Config(format!(
                "unknown profile '{other}', expected 'desk' or 'full'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmpConfig {
    /// Angular grid of the codebook; the array size when unset.
    pub n_angles: Option<usize>,
    pub rule: DistanceRule,
    /// Greedy iterations; `⌈L · E[visible sub-arrays]⌉` when unset.
    pub n_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Assbl(AssblConfig),
    PolarOmp(OmpConfig),
    OracleLs,
}

impl EstimatorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorConfig::Assbl(_) => "assbl",
            EstimatorConfig::PolarOmp(_) => "polar_omp",
            EstimatorConfig::OracleLs => "oracle_ls",
        }
    }
}

/// One Monte Carlo experiment. The SNR sweep runs `snr_grid` at pilot length
/// `t_p`; the pilot sweep runs `pilot_grid` at `snr_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_trials: usize,
    pub master_seed: u64,
    pub n_rf: usize,
    pub t_p: usize,
    pub snr_db: f64,
    pub snr_grid: Vec<f64>,
    pub pilot_grid: Vec<usize>,
    pub output_dir: PathBuf,
    pub combiner_phases: PhaseResolution,
    /// Also write every ASSBL iteration record to `assbl_trace.csv`.
    pub write_traces: bool,
    pub scenario: ScenarioConfig,
    pub estimators: Vec<EstimatorConfig>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::profile(Profile::Desk)
    }
}

impl SweepConfig {
    pub fn profile(profile: Profile) -> Self {
        match profile {
            Profile::Desk => Self {
                n_trials: 100,
                master_seed: 1,
                n_rf: 4,
                t_p: 16,
                snr_db: 15.0,
                snr_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0],
                pilot_grid: vec![8, 16, 24, 32, 40],
                output_dir: PathBuf::from("runs/desk"),
                combiner_phases: PhaseResolution::Continuous,
                write_traces: false,
                scenario: ScenarioConfig::default(),
                estimators: vec![
                    EstimatorConfig::Assbl(AssblConfig {
                        n_angles: 64,
                        ..AssblConfig::default()
                    }),
                    // At N = 64 the 256-element ring spacing leaves no ring
                    // beyond 5 m, so the desk codebook uses a finer one.
                    EstimatorConfig::PolarOmp(OmpConfig {
                        rule: DistanceRule::Rings {
                            beta: 0.3,
                            s_max: 10,
                            min_distance: 5.0,
                        },
                        ..OmpConfig::default()
                    }),
                    EstimatorConfig::OracleLs,
                ],
            },
            Profile::Full => Self {
                n_trials: 5,
                t_p: 32,
                snr_grid: vec![15.0],
                output_dir: PathBuf::from("runs/full"),
                write_traces: true,
                scenario: ScenarioConfig {
                    n_antennas: 256,
                    ..ScenarioConfig::default()
                },
                estimators: vec![
                    EstimatorConfig::Assbl(AssblConfig {
                        n_angles: 256,
                        ..AssblConfig::default()
                    }),
                    EstimatorConfig::PolarOmp(OmpConfig::default()),
                    EstimatorConfig::OracleLs,
                ],
                ..Self::profile(Profile::Desk)
            },
        }
    }

    /// Parses a TOML document. A top-level `profile = "desk" | "full"` key
    /// selects the base; every other key overrides it, tables merging
    /// recursively and arrays replacing.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with(text, None)
    }

    /// As [`from_toml_str`](Self::from_toml_str), with `profile` taking
    /// precedence over the document's own `profile` key.
    pub fn from_toml_with(text: &str, profile: Option<Profile>) -> Result<Self> {
        let mut user: toml::Table = text.parse()?;
        let profile = match (profile, user.remove("profile")) {
            (Some(p), _) => p,
            (None, None) => Profile::default(),
            (None, Some(toml::Value::String(s))) => s.parse()?,
            (None, Some(other)) => {
                return Err(Error::Config(format!("profile must be a string, got {other}")))
            }
        };
        let mut base = toml::Table::try_from(Self::profile(profile))
            .map_err(|e| Error::Config(format!("cannot encode profile: {e}")))?;
        merge(&mut base, user);
        let cfg: SweepConfig = toml::Value::Table(base).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.scenario.validate()?;
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.n_rf == 0 || self.t_p == 0 {
            return bad("n_rf and t_p must be at least 1".into());
        }
        if self.snr_grid.is_empty() || self.pilot_grid.is_empty() {
            return bad("snr_grid and pilot_grid must be nonempty".into());
        }
        if self.snr_grid.iter().chain([&self.snr_db]).any(|s| s.is_nan()) {
            return bad("SNR values must not be NaN".into());
        }
        if self.pilot_grid.contains(&0) {
            return bad("pilot lengths must be at least 1".into());
        }
        if self.estimators.is_empty() {
            return bad("estimator list is empty".into());
        }
        let mut seen = BTreeSet::new();
        for est in &self.estimators {
            if !seen.insert(est.name()) {
                return bad(format!("estimator '{}' listed twice", est.name()));
            }
            match est {
                EstimatorConfig::Assbl(c) => c.validate()?,
                EstimatorConfig::PolarOmp(c) => {
                    if c.n_angles == Some(0) || c.n_iters == Some(0) {
                        return bad("polar_omp n_angles and n_iters must be at least 1".into());
                    }
                    if let DistanceRule::Rings { beta, min_distance, .. } = c.rule {
                        if !(beta > 0.0 && min_distance > 0.0) {
                            return bad("polar_omp ring rule needs beta > 0 and min_distance > 0".into());
                        }
                    }
                }
                EstimatorConfig::OracleLs => {}
            }
        }
        Ok(())
    }

    /// Default greedy budget `⌈L · E[visible sub-arrays]⌉`.
    pub fn default_omp_iters(&self) -> usize {
        (self.scenario.n_paths as f64 * self.scenario.expected_visible()).ceil() as usize
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

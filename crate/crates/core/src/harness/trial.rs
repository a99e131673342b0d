use std::time::Instant;

use serde::Serialize;

use super::config::{EstimatorConfig, SweepConfig};
use super::metrics::nmse;
use super::seeds::{stream_rng, Stream};
use crate::array_model::{sample_paths, synthesize_channel_with, ArrayGeometry, ChannelRealization, SubArrayLayout};
use crate::assbl::{assbl_estimate, AssblConfig, IterationRecord};
use crate::baselines::{oracle_ls, polar_omp};
use crate::dictionary::{build_polar_dictionary, PolarDictionary};
use crate::error::Result;
use crate::measurement::{generate_combiner_with, observe, Combiner, Observation, PilotConfig};
use crate::CVector;

/// One point on a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPoint {
    pub snr_db: f64,
    pub t_p: usize,
}

/// One row of `trials.csv`. A failed estimate has NaN NMSE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub estimator: String,
    pub snr_db: f64,
    pub t_p: usize,
    pub nmse_linear: f64,
    pub nmse_db: f64,
    pub wall_ms: f64,
    pub iters: usize,
    #[serde(skip)]
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Vec<IterationRecord>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        !self.nmse_linear.is_finite()
    }
}

/// Everything the estimators of one paired trial observe.
#[derive(Debug, Clone)]
pub struct TrialInstance {
    pub trial_id: u64,
    pub axis: AxisPoint,
    pub geom: ArrayGeometry,
    pub layout: SubArrayLayout,
    pub channel: ChannelRealization,
    pub combiner: Combiner,
    pub observation: Observation,
}

impl TrialInstance {
    /// Paths and combiner depend only on `(master_seed, trial_id)`, so every
    /// axis point of a trial sees the same channel and nested combiners;
    /// the noise stream is also keyed by the axis point.
    pub fn generate(cfg: &SweepConfig, trial_id: u64, axis: AxisPoint) -> Result<Self> {
        let scenario = &cfg.scenario;
        let geom = scenario.geometry()?;
        let layout = scenario.layout()?;
        let mut rng = stream_rng(cfg.master_seed, trial_id, Stream::Paths, &[]);
        let paths = sample_paths(&mut rng, scenario.n_paths, scenario)?;
        let channel = synthesize_channel_with(&geom, &layout, &paths, scenario.distance_model)?;
        let pilot = PilotConfig::new(axis.t_p, cfg.n_rf, axis.snr_db)?;
        let mut rng = stream_rng(cfg.master_seed, trial_id, Stream::Combiner, &[]);
        let combiner = generate_combiner_with(&mut rng, &geom, &pilot, cfg.combiner_phases);
        let mut rng = stream_rng(
            cfg.master_seed,
            trial_id,
            Stream::Noise,
            &[axis.snr_db.to_bits(), axis.t_p as u64],
        );
        let observation = observe(&channel, &combiner, &pilot, &mut rng)?;
        Ok(Self {
            trial_id,
            axis,
            geom,
            layout,
            channel,
            combiner,
            observation,
        })
    }

    /// FNV-1a over the bit patterns of `h`.
    pub fn channel_hash(&self) -> u64 {
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        for c in self.channel.h.iter() {
            for word in [c.re.to_bits(), c.im.to_bits()] {
                for byte in word.to_le_bytes() {
                    hash ^= byte as u64;
                    hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        hash
    }
}

/// An estimator with its trial-independent setup done.
#[derive(Debug, Clone)]
pub enum PreparedEstimator {
    Assbl(AssblConfig),
    PolarOmp { dictionary: PolarDictionary, n_iters: usize },
    OracleLs,
}

impl PreparedEstimator {
    pub fn prepare(est: &EstimatorConfig, cfg: &SweepConfig) -> Result<Self> {
        Ok(match est {
            EstimatorConfig::Assbl(c) => PreparedEstimator::Assbl(AssblConfig {
                trace_path: None,
                ..c.clone()
            }),
            EstimatorConfig::PolarOmp(c) => {
                let geom = cfg.scenario.geometry()?;
                let n_angles = c.n_angles.unwrap_or(cfg.scenario.n_antennas);
                PreparedEstimator::PolarOmp {
                    dictionary: build_polar_dictionary(&geom, n_angles, c.rule)?,
                    n_iters: c.n_iters.unwrap_or_else(|| cfg.default_omp_iters()),
                }
            }
            EstimatorConfig::OracleLs => PreparedEstimator::OracleLs,
        })
    }

    pub fn prepare_all(cfg: &SweepConfig) -> Result<Vec<Self>> {
        cfg.estimators.iter().map(|e| Self::prepare(e, cfg)).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            PreparedEstimator::Assbl(_) => "assbl",
            PreparedEstimator::PolarOmp { .. } => "polar_omp",
            PreparedEstimator::OracleLs => "oracle_ls",
        }
    }

    /// `(ĥ, iterations, per-iteration trace)`.
    fn estimate(&self, inst: &TrialInstance, cfg: &SweepConfig) -> Result<(CVector, usize, Vec<IterationRecord>)> {
        let y = &inst.observation.y;
        match self {
            PreparedEstimator::Assbl(c) => {
                let out = assbl_estimate(y, &inst.combiner, &inst.geom, &inst.layout, c)?;
                Ok((out.h_hat, out.iterations, out.trace))
            }
            PreparedEstimator::PolarOmp { dictionary, n_iters } => {
                let out = polar_omp(y, &inst.combiner, dictionary, &inst.layout, *n_iters)?;
                Ok((out.h_hat, out.residual_norms.len(), Vec::new()))
            }
            PreparedEstimator::OracleLs => {
                let h = oracle_ls(
                    y,
                    &inst.combiner,
                    &inst.geom,
                    &inst.layout,
                    &inst.channel,
                    cfg.scenario.distance_model,
                )?;
                Ok((h, 0, Vec::new()))
            }
        }
    }

    /// Runs on one instance; an estimator error becomes a NaN record.
    pub fn run(&self, inst: &TrialInstance, cfg: &SweepConfig) -> TrialRecord {
        let start = Instant::now();
        let result = self
            .estimate(inst, cfg)
            .and_then(|(h, iters, trace)| Ok((nmse(&inst.channel.h, &h)?, iters, trace)));
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut rec = TrialRecord {
            trial_id: inst.trial_id,
            estimator: self.name().to_string(),
            snr_db: inst.axis.snr_db,
            t_p: inst.axis.t_p,
            nmse_linear: f64::NAN,
            nmse_db: f64::NAN,
            wall_ms,
            iters: 0,
            error: None,
            trace: Vec::new(),
        };
        match result {
            Ok((score, iters, trace)) => {
                rec.nmse_linear = score.linear;
                rec.nmse_db = score.db;
                rec.iters = iters;
                rec.trace = trace;
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

/// All estimators of `cfg` on one shared instance, in configuration order.
pub fn run_trial(cfg: &SweepConfig, trial_id: u64, axis: AxisPoint) -> Result<Vec<TrialRecord>> {
    let prepared = PreparedEstimator::prepare_all(cfg)?;
    run_prepared(cfg, &prepared, trial_id, axis)
}

pub(crate) fn run_prepared(
    cfg: &SweepConfig,
    prepared: &[PreparedEstimator],
    trial_id: u64,
    axis: AxisPoint,
) -> Result<Vec<TrialRecord>> {
    let inst = TrialInstance::generate(cfg, trial_id, axis)?;
    Ok(prepared.iter().map(|p| p.run(&inst, cfg)).collect())
}

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dictionary::{AdaptiveDictionary, InvDistanceBounds};
use crate::error::{Error, Result};

/// Gamma hyperprior shape/rate constants for `λ`, `ζ_u` and `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperpriors {
    pub a_lambda: f64,
    pub b_lambda: f64,
    pub a_zeta: f64,
    pub b_zeta: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
}

impl Default for Hyperpriors {
    fn default() -> Self {
        Self {
            a_lambda: 1.0,
            b_lambda: 1e-4,
            a_zeta: 1.0,
            b_zeta: 1e-4,
            a_sigma: 1.0,
            b_sigma: 1e-4,
        }
    }
}

/// Backtracking parameters for the `1/r` descent step.
///
/// The first trial step is `step0 / |∇|`, i.e. it moves `1/r` by `step0` m⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmijoConfig {
    pub c1: f64,
    pub shrink: f64,
    pub step0: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            step0: 1.0,
            max_backtracks: 20,
        }
    }
}

/// How the `‖α⁽ⁱ⁺¹⁾ − α⁽ⁱ⁾‖₂ ≤ ε` stop test scales `ε`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `ε = tol · ‖α⁽ⁱ⁾‖₂`.
    #[default]
    Relative,
    /// `ε = tol`.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssblConfig {
    /// Angular grid size `U`.
    pub n_angles: usize,
    /// Adjacent-coefficient coupling `β ≥ 0`.
    pub beta: f64,
    /// Damping `χ ∈ (0, 1)` of the `α` update.
    pub chi: f64,
    pub hyperpriors: Hyperpriors,
    pub max_iter: usize,
    pub tol: f64,
    pub stop_rule: StopRule,
    /// Number of blocks `Ũ` whose distance is refined per iteration.
    pub n_refine: usize,
    pub armijo: ArmijoConfig,
    /// Blocks with `γ_u < prune_threshold · max γ` leave the E-step.
    pub prune_threshold: f64,
    pub init_distance: f64,
    pub inv_distance_bounds: InvDistanceBounds,
    /// Per-iteration diagnostics CSV, written when set.
    pub trace_path: Option<PathBuf>,
}

impl Default for AssblConfig {
    fn default() -> Self {
        Self {
            n_angles: 64,
            beta: 0.5,
            chi: 0.9,
            hyperpriors: Hyperpriors::default(),
            max_iter: 200,
            tol: 1e-3,
            stop_rule: StopRule::Relative,
            n_refine: 4,
            armijo: ArmijoConfig::default(),
            prune_threshold: 1e-8,
            init_distance: AdaptiveDictionary::DEFAULT_INIT_DISTANCE,
            inv_distance_bounds: InvDistanceBounds::default(),
            trace_path: None,
        }
    }
}

impl AssblConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_angles == 0 {
            return bad("n_angles must be at least 1".into());
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be nonnegative, got {}", self.beta));
        }
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return bad(format!("chi must lie in (0, 1), got {}", self.chi));
        }
        let h = &self.hyperpriors;
        for (name, v) in [
            ("a_lambda", h.a_lambda),
            ("b_lambda", h.b_lambda),
            ("a_zeta", h.a_zeta),
            ("b_zeta", h.b_zeta),
            ("a_sigma", h.a_sigma),
            ("b_sigma", h.b_sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("hyperprior {name} must be positive, got {v}"));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        let a = &self.armijo;
        if !(a.c1 > 0.0 && a.c1 < 1.0) || !(a.shrink > 0.0 && a.shrink < 1.0) || !(a.step0 > 0.0)
        {
            return bad(format!("invalid Armijo parameters {a:?}"));
        }
        if !(self.prune_threshold >= 0.0 && self.prune_threshold < 1.0) {
            return bad(format!(
                "prune_threshold must lie in [0, 1), got {}",
                self.prune_threshold
            ));
        }
        Ok(())
    }
}

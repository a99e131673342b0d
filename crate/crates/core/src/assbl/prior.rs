use nalgebra::DMatrix;
use serde::Serialize;

use super::config::AssblConfig;
use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::CVector;

/// Hyperparameters of the hierarchical prior and the noise precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperState {
    /// Block relevance `γ_u`, length `U`.
    pub gamma: Vec<f64>,
    /// Intra-block precisions `α_{u,g}`, `U × G`.
    pub alpha: DMatrix<f64>,
    /// Second-level rates `ζ_u`, length `U`.
    pub zeta: Vec<f64>,
    pub lambda: f64,
    /// Noise precision.
    pub sigma: f64,
}

impl HyperState {
    /// Unit hyperparameters with `σ = M / ‖y‖²`.
    ///
    /// A zero observation has no scale; `σ` then starts at the noiseless
    /// saturation value `(M + a_σ − 1) / b_σ`.
    pub fn initial(n_angles: usize, n_subarrays: usize, y: &CVector, cfg: &AssblConfig) -> Self {
        let m = y.len() as f64;
        let energy = norm_sqr(y);
        let sigma = if energy > 0.0 {
            m / energy
        } else {
            (m + cfg.hyperpriors.a_sigma - 1.0) / cfg.hyperpriors.b_sigma
        };
        Self {
            gamma: vec![1.0; n_angles],
            alpha: DMatrix::from_element(n_angles, n_subarrays, 1.0),
            zeta: vec![1.0; n_angles],
            lambda: 1.0,
            sigma,
        }
    }

    pub fn n_angles(&self) -> usize {
        self.gamma.len()
    }

    pub fn n_subarrays(&self) -> usize {
        self.alpha.ncols()
    }

    /// True when every entry is finite and strictly positive.
    pub fn is_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        self.gamma.iter().all(|&v| ok(v))
            && self.alpha.iter().all(|&v| ok(v))
            && self.zeta.iter().all(|&v| ok(v))
            && ok(self.lambda)
            && ok(self.sigma)
    }

    pub(crate) fn alpha_row(&self, u: usize) -> Vec<f64> {
        self.alpha.row(u).iter().copied().collect()
    }
}

/// Inverse pattern-coupled precision `α_{u,g} + β α_{u,g−1} + β α_{u,g+1}`
/// with `α_{u,0} = α_{u,G+1} = 0`.
#[inline]
pub(crate) fn coupled_precision(alpha_u: &[f64], beta: f64, g: usize) -> f64 {
    let left = if g > 0 { alpha_u[g - 1] } else { 0.0 };
    let right = alpha_u.get(g + 1).copied().unwrap_or(0.0);
    alpha_u[g] + beta * (left + right)
}

/// Diagonal of `Δ_u`: `δ_{u,g} = (α_{u,g} + β α_{u,g−1} + β α_{u,g+1})⁻¹`.
pub fn intra_block_covariance(alpha_u: &[f64], beta: f64) -> Result<Vec<f64>> {
    if let Some(bad) = alpha_u.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::Domain(format!(
            "intra-block precisions must be positive, got {bad}"
        )));
    }
    Ok((0..alpha_u.len())
        .map(|g| 1.0 / coupled_precision(alpha_u, beta, g))
        .collect())
}

/// Diagonal of `Ω = blkdiag(γ_1 Δ_1, …, γ_U Δ_U)`, length `G·U`.
pub fn prior_covariance(state: &HyperState, cfg: &AssblConfig) -> Result<Vec<f64>> {
    prior_covariance_blocks(state, cfg, 0..state.n_angles())
}

/// `Ω` restricted to the listed blocks, concatenated in order.
pub(crate) fn prior_covariance_blocks(
    state: &HyperState,
    cfg: &AssblConfig,
    blocks: impl IntoIterator<Item = usize>,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for u in blocks {
        let delta = intra_block_covariance(&state.alpha_row(u), cfg.beta)?;
        out.extend(delta.into_iter().map(|d| state.gamma[u] * d));
    }
    Ok(out)
}

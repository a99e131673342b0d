//! Dictionary distance refinement.
//!
//! For fixed `μ, Σ, σ` the dictionary objective
//! `Q(r) = σ‖y − Ψ(r)μ‖² + σ tr(Ψ(r) Σ Ψ(r)ᴴ)` is minimized over `1/r_u`, one
//! block at a time, with projected gradient steps and Armijo backtracking.
//! Only block `u`'s columns of `Ψ` depend on `r_u`, so each trial point is
//! scored from the current residual, `ΨΣ` and the `G × G` block `Σ_uu` without
//! touching the rest of `Ψ`.

use serde::Serialize;

use super::config::AssblConfig;
use super::posterior::{trace_a_bh, Posterior};
use super::prior::HyperState;
use crate::dictionary::{block_sensing, effective_sensing, steering_inv_distance_derivative, AdaptiveDictionary};
use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::measurement::Combiner;
use crate::{CMatrix, CVector};

/// `σ‖y − Ψμ‖² + σ tr(ΨΣΨᴴ)` with a dense `Σ`.
pub fn q_dictionary(psi: &CMatrix, mu: &CVector, sigma_mat: &CMatrix, sigma: f64, y: &CVector) -> f64 {
    let residual = y - psi * mu;
    let sandwich = trace_a_bh(&(psi * sigma_mat), psi);
    sigma * (norm_sqr(&residual) + sandwich)
}

/// `∂Q/∂(1/r_u) = 2ℜ tr([σ((Ψμ − y)μᴴ + ΨΣ)]_uᴴ ∂Ψ/∂(1/r_u))`, dense form.
///
/// `u` is zero-based; block `u` occupies columns `uG..(u+1)G` of `Ψ`.
#[allow(clippy::too_many_arguments)]
pub fn distance_gradient(
    u: usize,
    psi: &CMatrix,
    combiner: &Combiner,
    adict: &AdaptiveDictionary,
    mu: &CVector,
    sigma_mat: &CMatrix,
    sigma: f64,
    y: &CVector,
) -> Result<f64> {
    let g = adict.n_subarrays();
    if u >= adict.n_angles() || psi.ncols() != adict.n_columns() {
        return Err(Error::Dimension(format!(
            "block {u} out of range or Ψ has {} columns for {} blocks",
            psi.ncols(),
            adict.n_angles()
        )));
    }
    let residual = psi * mu - y;
    let mu_u = mu.rows(u * g, g);
    let psi_sigma_u = psi * sigma_mat.columns(u * g, g);
    let outer = &residual * mu_u.adjoint() + psi_sigma_u;
    let d_psi = derivative_block(combiner, adict, u)?;
    Ok(2.0 * sigma * trace_a_bh(&d_psi, &outer))
}

/// `Wᴴ diag(∂a_u/∂(1/r_u)) J`.
fn derivative_block(combiner: &Combiner, adict: &AdaptiveDictionary, u: usize) -> Result<CMatrix> {
    let da = steering_inv_distance_derivative(adict.geometry(), adict.angle(u), adict.distance(u))?;
    block_sensing(combiner, adict.layout(), &da)
}

/// Block positions ordered by posterior power `‖μ_u‖² + tr(Σ_u)`, largest first.
pub fn rank_blocks(post: &Posterior, g_count: usize) -> Vec<usize> {
    let moments = post.second_moments();
    let n_blocks = moments.len() / g_count;
    let power: Vec<f64> = (0..n_blocks)
        .map(|p| moments[p * g_count..(p + 1) * g_count].iter().sum())
        .collect();
    let mut order: Vec<usize> = (0..n_blocks).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepOutcome {
    Accepted {
        eta: f64,
        inv_before: f64,
        inv_after: f64,
        q_before: f64,
        q_after: f64,
    },
    /// No trial step met the sufficient-decrease test; `r_u` unchanged.
    LineSearchFailed,
    /// Zero gradient, or the projected step does not move.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineReport {
    pub q_before: f64,
    pub q_after: f64,
    /// `(block index u, outcome)` in the order processed.
    pub steps: Vec<(usize, StepOutcome)>,
}

/// Incremental evaluator of `Q` over the blocks of an (active) sensing matrix.
pub(crate) struct BlockRefiner<'a> {
    combiner: &'a Combiner,
    post: &'a Posterior,
    /// Block index `u` of each position.
    blocks: &'a [usize],
    g: usize,
    sigma: f64,
    psi: CMatrix,
    psi_sigma: CMatrix,
    residual: CVector,
    sandwich: f64,
}

impl<'a> BlockRefiner<'a> {
    pub(crate) fn new(
        combiner: &'a Combiner,
        post: &'a Posterior,
        blocks: &'a [usize],
        g: usize,
        psi: CMatrix,
        y: &CVector,
        sigma: f64,
    ) -> Self {
        let residual = y - &psi * &post.mu;
        let psi_sigma = post.psi_sigma.clone();
        let sandwich = trace_a_bh(&psi_sigma, &psi);
        Self {
            combiner,
            post,
            blocks,
            g,
            sigma,
            psi,
            psi_sigma,
            residual,
            sandwich,
        }
    }

    pub(crate) fn q(&self) -> f64 {
        self.sigma * (norm_sqr(&self.residual) + self.sandwich)
    }

    pub(crate) fn into_psi(self) -> CMatrix {
        self.psi
    }

    fn gradient(&self, pos: usize, adict: &AdaptiveDictionary) -> Result<f64> {
        let g = self.g;
        let mu_b = self.post.mu.rows(pos * g, g);
        let outer = -&self.residual * mu_b.adjoint() + self.psi_sigma.columns(pos * g, g);
        let d_psi = derivative_block(self.combiner, adict, self.blocks[pos])?;
        Ok(2.0 * self.sigma * trace_a_bh(&d_psi, &outer))
    }

    /// `(Q, residual, sandwich)` if block `pos` were replaced by `new_block`.
    fn trial(&self, pos: usize, new_block: &CMatrix, sigma_bb: &CMatrix) -> (f64, CVector, f64) {
        let g = self.g;
        let delta = new_block - self.psi.columns(pos * g, g);
        let mu_b = self.post.mu.rows(pos * g, g);
        let residual = &self.residual - &delta * mu_b;
        let cross = 2.0 * trace_a_bh(&delta, &self.psi_sigma.columns(pos * g, g).into_owned());
        let quad = trace_a_bh(&(&delta * sigma_bb), &delta);
        let sandwich = self.sandwich + cross + quad;
        (self.sigma * (norm_sqr(&residual) + sandwich), residual, sandwich)
    }

    fn commit(&mut self, pos: usize, new_block: CMatrix, residual: CVector, sandwich: f64) {
        let g = self.g;
        let delta = &new_block - self.psi.columns(pos * g, g);
        self.psi_sigma += &delta * self.post.cov.rows(pos * g, g);
        self.psi.columns_mut(pos * g, g).copy_from(&new_block);
        self.residual = residual;
        self.sandwich = sandwich;
    }

    /// One projected Armijo step on block position `pos`.
    pub(crate) fn step(&mut self, pos: usize, adict: &mut AdaptiveDictionary, cfg: &AssblConfig) -> Result<StepOutcome> {
        let u = self.blocks[pos];
        let grad = self.gradient(pos, adict)?;
        if grad == 0.0 || !grad.is_finite() {
            return Ok(StepOutcome::Stationary);
        }
        let g = self.g;
        let sigma_bb = self.post.cov.block(pos * g, g);
        let q_before = self.q();
        let x_old = adict.inv_distance(u);
        let bounds = adict.bounds();
        let armijo = cfg.armijo;
        let mut eta = armijo.step0 / grad.abs();
        for _ in 0..=armijo.max_backtracks {
            let x_new = bounds.clamp(x_old - eta * grad);
            if x_new == x_old {
                return Ok(StepOutcome::Stationary);
            }
            let a = adict.steering_at_inv(u, x_new)?;
            let block = block_sensing(self.combiner, adict.layout(), &a)?;
            let (q_new, residual, sandwich) = self.trial(pos, &block, &sigma_bb);
            if q_new <= q_before + armijo.c1 * grad * (x_new - x_old) {
                self.commit(pos, block, residual, sandwich);
                adict.set_inv_distance(u, x_new);
                return Ok(StepOutcome::Accepted {
                    eta,
                    inv_before: x_old,
                    inv_after: x_new,
                    q_before,
                    q_after: q_new,
                });
            }
            eta *= armijo.shrink;
        }
        Ok(StepOutcome::LineSearchFailed)
    }

    /// Refines the `n_refine` highest-power positions in order.
    pub(crate) fn refine_top(&mut self, adict: &mut AdaptiveDictionary, cfg: &AssblConfig, eligible: impl Fn(usize) -> bool) -> Result<Vec<(usize, StepOutcome)>> {
        let order = rank_blocks(self.post, self.g);
        let mut steps = Vec::new();
        for pos in order.into_iter().filter(|&p| eligible(self.blocks[p])).take(cfg.n_refine) {
            let outcome = self.step(pos, adict, cfg)?;
            steps.push((self.blocks[pos], outcome));
        }
        Ok(steps)
    }
}

/// One refinement sweep over the `Ũ` most significant blocks.
///
/// `post` must be the posterior for `Ψ = Wᴴ D(r)` of `adict` with every block
/// present; the noise precision used in `Q` is `state.sigma`.
pub fn refine_distances(
    adict: &AdaptiveDictionary,
    post: &Posterior,
    state: &HyperState,
    combiner: &Combiner,
    y: &CVector,
    cfg: &AssblConfig,
) -> Result<(AdaptiveDictionary, RefineReport)> {
    let psi = effective_sensing(combiner, adict)?;
    if post.dim() != psi.ncols() || y.len() != psi.nrows() {
        return Err(Error::Dimension(format!(
            "posterior has {} coefficients, Ψ is {}x{}, y has {}",
            post.dim(),
            psi.nrows(),
            psi.ncols(),
            y.len()
        )));
    }
    let blocks: Vec<usize> = (0..adict.n_angles()).collect();
    let mut refined = adict.clone();
    let mut refiner = BlockRefiner::new(combiner, post, &blocks, adict.n_subarrays(), psi, y, state.sigma);
    let q_before = refiner.q();
    let steps = refiner.refine_top(&mut refined, cfg, |_| true)?;
    let q_after = refiner.q();
    Ok((
        refined,
        RefineReport {
            q_before,
            q_after,
            steps,
        },
    ))
}

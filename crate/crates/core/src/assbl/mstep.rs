//! Closed-form M-step updates and their coordinate objectives.
//!
//! All updates read the posterior through the per-coefficient second moments
//! `e_{u,g} = |μ_{u,g}|² + [Σ_u]_g`, where `[Σ_u]_g` is the `g`-th diagonal
//! entry of block `u` of the posterior covariance.

use nalgebra::DMatrix;

use super::config::AssblConfig;
use super::posterior::Posterior;
use super::prior::{coupled_precision, HyperState};
use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::{CMatrix, CVector};

/// `U × G` matrix of `e_{u,g}`.
pub fn block_moments(post: &Posterior, n_subarrays: usize) -> DMatrix<f64> {
    let e = post.second_moments();
    let u_count = e.len() / n_subarrays;
    DMatrix::from_fn(u_count, n_subarrays, |u, g| e[u * n_subarrays + g])
}

/// `S_u = Σ_g δ_{u,g}⁻¹ e_{u,g}`.
pub(crate) fn weighted_energy(moments_u: &[f64], alpha_u: &[f64], beta: f64) -> f64 {
    moments_u
        .iter()
        .enumerate()
        .map(|(g, e)| coupled_precision(alpha_u, beta, g) * e)
        .sum()
}

/// Positive root of `λγ² + Gγ − S = 0`, written as `2S / (G + √(G² + 4λS))`
/// to avoid cancellation. Floored at the smallest positive normal.
pub(crate) fn gamma_root(s: f64, g_count: usize, lambda: f64) -> f64 {
    let g = g_count as f64;
    let root = 2.0 * s / (g + (g * g + 4.0 * lambda * s).sqrt());
    root.max(f64::MIN_POSITIVE)
}

/// `ν_{u,g} = e_{u,g} + β e_{u,g−1} + β e_{u,g+1}` with zero outside the block.
pub(crate) fn coupled_moment(moments_u: &[f64], beta: f64, g: usize) -> f64 {
    let left = if g > 0 { moments_u[g - 1] } else { 0.0 };
    let right = moments_u.get(g + 1).copied().unwrap_or(0.0);
    moments_u[g] + beta * (left + right)
}

pub(crate) fn alpha_block(moments_u: &[f64], gamma_u: f64, zeta_u: f64, cfg: &AssblConfig) -> Vec<f64> {
    let num = cfg.chi * (1.0 + 2.0 * cfg.beta);
    (0..moments_u.len())
        .map(|g| {
            let nu = coupled_moment(moments_u, cfg.beta, g);
            (num / (nu / gamma_u + zeta_u)).max(f64::MIN_POSITIVE)
        })
        .collect()
}

pub(crate) fn zeta_block(alpha_u: &[f64], cfg: &AssblConfig) -> f64 {
    let g = alpha_u.len() as f64;
    let h = &cfg.hyperpriors;
    (g + h.a_zeta - 1.0) / (alpha_u.iter().sum::<f64>() + h.b_zeta)
}

pub(crate) fn sigma_from_fit(fit: f64, m: usize, cfg: &AssblConfig) -> f64 {
    let h = &cfg.hyperpriors;
    (m as f64 + h.a_sigma - 1.0) / (fit + h.b_sigma)
}

fn check_dims(post: &Posterior, state: &HyperState) -> Result<()> {
    if post.dim() != state.n_angles() * state.n_subarrays() {
        return Err(Error::Dimension(format!(
            "posterior has {} coefficients, state describes {}x{}",
            post.dim(),
            state.n_angles(),
            state.n_subarrays()
        )));
    }
    Ok(())
}

/// New `γ` from the current posterior, `α`, `λ`.
pub fn update_gamma(post: &Posterior, state: &HyperState, cfg: &AssblConfig) -> Result<Vec<f64>> {
    check_dims(post, state)?;
    let g = state.n_subarrays();
    let e = block_moments(post, g);
    Ok((0..state.n_angles())
        .map(|u| {
            let row: Vec<f64> = e.row(u).iter().copied().collect();
            let s = weighted_energy(&row, &state.alpha_row(u), cfg.beta);
            gamma_root(s, g, state.lambda)
        })
        .collect())
}

/// New `α` from the posterior, `γ` (already updated) and `ζ`.
pub fn update_alpha(post: &Posterior, state: &HyperState, cfg: &AssblConfig) -> Result<DMatrix<f64>> {
    check_dims(post, state)?;
    let g = state.n_subarrays();
    let e = block_moments(post, g);
    let mut out = DMatrix::zeros(state.n_angles(), g);
    for u in 0..state.n_angles() {
        let row: Vec<f64> = e.row(u).iter().copied().collect();
        let a = alpha_block(&row, state.gamma[u], state.zeta[u], cfg);
        for (j, v) in a.into_iter().enumerate() {
            out[(u, j)] = v;
        }
    }
    Ok(out)
}

/// `ζ_u = (G + a_ζ − 1) / (Σ_g α_{u,g} + b_ζ)`.
pub fn update_zeta(state: &HyperState, cfg: &AssblConfig) -> Vec<f64> {
    (0..state.n_angles())
        .map(|u| zeta_block(&state.alpha_row(u), cfg))
        .collect()
}

/// `λ = (U + a_λ − 1) / (Σ_u γ_u + b_λ)`.
pub fn update_lambda(state: &HyperState, cfg: &AssblConfig) -> f64 {
    let h = &cfg.hyperpriors;
    (state.n_angles() as f64 + h.a_lambda - 1.0) / (state.gamma.iter().sum::<f64>() + h.b_lambda)
}

/// `σ = (M + a_σ − 1) / (‖y − Ψμ‖² + tr(ΨᴴΨΣ) + b_σ)`, for the `Ψ` the
/// posterior was computed with.
pub fn update_sigma(post: &Posterior, psi: &CMatrix, y: &CVector, cfg: &AssblConfig) -> Result<f64> {
    if psi.nrows() != y.len() || psi.ncols() != post.dim() {
        return Err(Error::Dimension(format!(
            "Ψ is {}x{}, y has {}, posterior has {}",
            psi.nrows(),
            psi.ncols(),
            y.len(),
            post.dim()
        )));
    }
    let residual = y - psi * &post.mu;
    let fit = norm_sqr(&residual) + post.trace_sandwich(psi);
    Ok(sigma_from_fit(fit, y.len(), cfg))
}

/// `Q(γ_u) = −S_u/γ_u − G ln γ_u − λ γ_u`.
pub fn q_gamma(gamma: f64, s: f64, g_count: usize, lambda: f64) -> f64 {
    -s / gamma - g_count as f64 * gamma.ln() - lambda * gamma
}

/// `α_{u,g}` coordinate objective with the other entries of the block held fixed.
pub fn q_alpha(alpha_u: &[f64], g: usize, moments_u: &[f64], gamma_u: f64, zeta_u: f64, beta: f64) -> f64 {
    let nu = coupled_moment(moments_u, beta, g);
    let lo = g.saturating_sub(1);
    let hi = (g + 1).min(alpha_u.len() - 1);
    let log_terms: f64 = (lo..=hi)
        .map(|j| coupled_precision(alpha_u, beta, j).ln())
        .sum();
    -nu * alpha_u[g] / gamma_u + log_terms - zeta_u * alpha_u[g]
}

/// `Q(ζ_u) = −ζ_u (Σ_g α_{u,g} + b_ζ) + (G + a_ζ − 1) ln ζ_u`.
pub fn q_zeta(zeta: f64, alpha_u: &[f64], cfg: &AssblConfig) -> f64 {
    let h = &cfg.hyperpriors;
    -zeta * (alpha_u.iter().sum::<f64>() + h.b_zeta) + (alpha_u.len() as f64 + h.a_zeta - 1.0) * zeta.ln()
}

/// `Q(λ) = −λ (Σ_u γ_u + b_λ) + (U + a_λ − 1) ln λ`.
pub fn q_lambda(lambda: f64, gamma: &[f64], cfg: &AssblConfig) -> f64 {
    let h = &cfg.hyperpriors;
    -lambda * (gamma.iter().sum::<f64>() + h.b_lambda) + (gamma.len() as f64 + h.a_lambda - 1.0) * lambda.ln()
}

/// `Q(σ) = (M + a_σ − 1) ln σ − σ (fit + b_σ)` with
/// `fit = ‖y − Ψμ‖² + tr(ΨᴴΨΣ)`.
pub fn q_sigma(sigma: f64, fit: f64, m: usize, cfg: &AssblConfig) -> f64 {
    let h = &cfg.hyperpriors;
    (m as f64 + h.a_sigma - 1.0) * sigma.ln() - sigma * (fit + h.b_sigma)
}

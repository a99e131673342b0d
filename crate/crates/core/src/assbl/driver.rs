use std::path::Path;

use serde::Serialize;

use super::config::{AssblConfig, StopRule};
use super::mstep::{alpha_block, gamma_root, sigma_from_fit, weighted_energy, zeta_block};
use super::posterior::{e_step, zeros, Posterior};
use super::prior::{prior_covariance_blocks, HyperState};
use super::refine::BlockRefiner;
use crate::array_model::{ArrayGeometry, SubArrayLayout};
use crate::dictionary::{effective_sensing, AdaptiveDictionary};
use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, select_columns};
use crate::measurement::Combiner;
use crate::{CMatrix, CVector};

/// Diagnostics for one EM iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Dictionary objective after the distance refinement.
    pub q: f64,
    pub sigma: f64,
    pub active_blocks: usize,
    pub delta_alpha: f64,
    pub accepted_steps: usize,
}

#[derive(Debug, Clone)]
pub struct AssblOutput {
    pub dictionary: AdaptiveDictionary,
    /// Structured coefficients `μ`, length `G·U`; pruned blocks are zero.
    pub mu: CVector,
    /// `ĥ = D(r) μ`.
    pub h_hat: CVector,
    pub state: HyperState,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    /// Blocks still present in the last E-step, in ascending order.
    pub active_blocks: Vec<usize>,
    /// Posterior of the last E-step over `active_blocks`.
    pub posterior: Posterior,
}

/// Runs the EM loop until `max_iter` or the `α` stop test.
///
/// Each iteration: E-step, then `γ`, `α`, `ζ`, `λ`, `σ`, then distance
/// refinement of the `Ũ` strongest blocks, which also refreshes `Ψ` for the
/// next E-step. A final E-step on the refined dictionary produces `μ`.
pub fn assbl_estimate(
    y: &CVector,
    combiner: &Combiner,
    geom: &ArrayGeometry,
    layout: &SubArrayLayout,
    cfg: &AssblConfig,
) -> Result<AssblOutput> {
    cfg.validate()?;
    if y.len() != combiner.n_measurements() {
        return Err(Error::Dimension(format!(
            "observation has {} entries, combiner has {} columns",
            y.len(),
            combiner.n_measurements()
        )));
    }
    let g = layout.n_subarrays();
    let u_count = cfg.n_angles;
    let m = y.len();
    let h = &cfg.hyperpriors;
    if (g as f64) + h.a_zeta <= 1.0 || (u_count as f64) + h.a_lambda <= 1.0 {
        return Err(Error::Config("hyperprior shapes leave an update undefined".into()));
    }

    let mut adict = AdaptiveDictionary::new(
        *geom,
        *layout,
        u_count,
        cfg.init_distance,
        cfg.inv_distance_bounds,
    )?;
    let mut psi_full = effective_sensing(combiner, &adict)?;
    let mut state = HyperState::initial(u_count, g, y, cfg);
    let mut active: Vec<usize> = (0..u_count).collect();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=cfg.max_iter {
        iterations = iter;
        let psi = active_columns(&psi_full, &active, g);
        let omega = prior_covariance_blocks(&state, cfg, active.iter().copied())?;
        let post = e_step(&psi, y, state.sigma, &omega)?;
        let moments = post.second_moments();

        for (pos, &u) in active.iter().enumerate() {
            let e = &moments[pos * g..(pos + 1) * g];
            let s = weighted_energy(e, &state.alpha_row(u), cfg.beta);
            state.gamma[u] = gamma_root(s, g, state.lambda);
        }
        let gamma_max = active.iter().map(|&u| state.gamma[u]).fold(0.0, f64::max);
        let threshold = cfg.prune_threshold * gamma_max;
        let keep = |u: usize| state.gamma[u] >= threshold;

        let alpha_old = state.alpha.clone();
        for (pos, &u) in active.iter().enumerate() {
            if !keep(u) {
                continue;
            }
            let e = &moments[pos * g..(pos + 1) * g];
            let row = alpha_block(e, state.gamma[u], state.zeta[u], cfg);
            for (j, v) in row.into_iter().enumerate() {
                state.alpha[(u, j)] = v;
            }
        }
        for u in 0..u_count {
            state.zeta[u] = zeta_block(&state.alpha_row(u), cfg);
        }
        state.lambda = (u_count as f64 + h.a_lambda - 1.0) / (state.gamma.iter().sum::<f64>() + h.b_lambda);
        let residual = y - &psi * &post.mu;
        let fit = norm_sqr(&residual) + post.trace_sandwich(&psi);
        state.sigma = sigma_from_fit(fit, m, cfg);

        let mut refiner = BlockRefiner::new(combiner, &post, &active, g, psi, y, state.sigma);
        let steps = refiner.refine_top(&mut adict, cfg, keep)?;
        let q = refiner.q();
        let refined_psi = refiner.into_psi();
        for (pos, &u) in active.iter().enumerate() {
            psi_full
                .columns_mut(u * g, g)
                .copy_from(&refined_psi.columns(pos * g, g));
        }

        let delta_alpha = (&state.alpha - &alpha_old).norm();
        let eps = match cfg.stop_rule {
            StopRule::Relative => cfg.tol * alpha_old.norm(),
            StopRule::Absolute => cfg.tol,
        };
        let next_active: Vec<usize> = active.iter().copied().filter(|&u| keep(u)).collect();
        trace.push(IterationRecord {
            iter,
            q,
            sigma: state.sigma,
            active_blocks: next_active.len(),
            delta_alpha,
            accepted_steps: steps
                .iter()
                .filter(|(_, s)| matches!(s, super::refine::StepOutcome::Accepted { .. }))
                .count(),
        });
        active = next_active;
        if !state.is_valid() {
            return Err(Error::Singular(format!(
                "hyperparameters left the positive orthant at iteration {iter}"
            )));
        }
        if delta_alpha <= eps {
            converged = true;
            break;
        }
    }

    let psi = active_columns(&psi_full, &active, g);
    let omega = prior_covariance_blocks(&state, cfg, active.iter().copied())?;
    let posterior = e_step(&psi, y, state.sigma, &omega)?;
    let mut mu = zeros(u_count * g);
    for (pos, &u) in active.iter().enumerate() {
        mu.rows_mut(u * g, g)
            .copy_from(&posterior.mu.rows(pos * g, g));
    }
    let h_hat = reconstruct(&adict, &mu)?;

    if let Some(path) = &cfg.trace_path {
        write_trace(path, &trace)?;
    }

    Ok(AssblOutput {
        dictionary: adict,
        mu,
        h_hat,
        state,
        iterations,
        converged,
        trace,
        active_blocks: active,
        posterior,
    })
}

fn active_columns(psi_full: &CMatrix, active: &[usize], g: usize) -> CMatrix {
    let cols: Vec<usize> = active.iter().flat_map(|&u| u * g..(u + 1) * g).collect();
    select_columns(psi_full, &cols)
}

/// `D(r) z` without materializing `D(r)`.
pub(crate) fn reconstruct(adict: &AdaptiveDictionary, z: &CVector) -> Result<CVector> {
    let layout = adict.layout();
    let g_count = layout.n_subarrays();
    let mut h = zeros(layout.n_antennas());
    for u in 0..adict.n_angles() {
        let block = z.rows(u * g_count, g_count);
        if block.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let a = adict.steering(u)?;
        for g in 0..g_count {
            for n in layout.antennas(g) {
                h[n] += a[n] * block[g];
            }
        }
    }
    Ok(h)
}

/// `iter,q,sigma,active_blocks,delta_alpha,accepted_steps`.
pub(crate) fn write_trace(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    for rec in trace {
        w.serialize(rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

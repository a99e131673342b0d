//! Adaptive structured sparse Bayesian learning (ASSBL).
//!
//! The structured coefficient vector `z = [z_1ᵀ, …, z_Uᵀ]ᵀ` has one `G`-length
//! block per angular grid point. Each block is `CN(0, γ_u Δ_u)` with a
//! pattern-coupled diagonal `Δ_u` driven by intra-block precisions `α_{u,g}`;
//! `γ`, `α`, their Gamma hyperpriors and the noise precision `σ` are learned by
//! EM, while the per-angle distances of the dictionary are refined by
//! projected gradient steps in `1/r` with Armijo backtracking.

mod config;
mod driver;
mod mstep;
mod posterior;
mod prior;
mod refine;

pub use config::{ArmijoConfig, AssblConfig, Hyperpriors, StopRule};
pub use driver::{assbl_estimate, AssblOutput, IterationRecord};
pub use mstep::{
    block_moments, q_alpha, q_gamma, q_lambda, q_sigma, q_zeta, update_alpha, update_gamma,
    update_lambda, update_sigma, update_zeta,
};
pub use posterior::{e_step, e_step_with, Covariance, EStepPath, Posterior};
pub use prior::{intra_block_covariance, prior_covariance, HyperState};
pub use refine::{
    distance_gradient, q_dictionary, refine_distances, rank_blocks, RefineReport, StepOutcome,
};

//! Near-field, spatially non-stationary XL-MIMO uplink channel simulation and
//! estimation.
//!
//! The crate is organised bottom-up:
//!
//! * [`array_model`]: ULA geometry, near-field steering vectors, sub-array
//!   visibility and multipath channel synthesis.
//! * [`measurement`]: constant-modulus hybrid analog combiners and noisy
//!   aggregated pilot observations `y = Wᴴh + n`.
//! * [`dictionary`]: the polar-domain codebook and the distance-parameterized
//!   adaptive dictionary `D(r)` with its `1/r` derivative.
//! * [`assbl`]: the structured hierarchical sparse Bayesian learning estimator
//!   with adaptive distance refinement.
//! * [`baselines`]: polar-domain simultaneous OMP and an oracle least-squares
//!   bound.
//! * [`harness`]: NMSE metric, seeded paired Monte Carlo trials and SNR/pilot
//!   sweeps with CSV output.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array_model;
pub mod assbl;
pub mod baselines;
pub mod dictionary;
pub mod error;
pub mod harness;
pub(crate) mod linalg;
pub mod measurement;
pub mod selftest;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use array_model::{
    antenna_offsets, expansion_matrix, sample_paths, steering_vector, synthesize_channel,
    ArrayGeometry, ChannelRealization, DistanceModel, PathParams, ScenarioConfig, SubArrayLayout,
};
pub use assbl::{assbl_estimate, AssblConfig, AssblOutput, HyperState, Posterior};
pub use baselines::{oracle_ls, polar_omp, SupportEstimate};
pub use dictionary::{
    build_polar_dictionary, effective_sensing, materialize, steering_inv_distance_derivative,
    AdaptiveDictionary, DistanceRule, PolarDictionary,
};
pub use error::{Error, Result};
pub use linalg::relative_frobenius;
pub use harness::{nmse, Nmse};
pub use measurement::{generate_combiner, observe, Combiner, Observation, PilotConfig};

/// Complex column vector.
pub type CVector = DVector<Complex64>;
/// Dense complex matrix (column-major).
pub type CMatrix = DMatrix<Complex64>;

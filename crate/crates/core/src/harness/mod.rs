//! Monte Carlo evaluation: NMSE, paired seeded trials and SNR/pilot sweeps.

mod config;
mod metrics;
mod seeds;
mod sweep;
mod trial;

pub use config::{EstimatorConfig, OmpConfig, Profile, SweepConfig};
pub use metrics::{mean_nmse, nmse, to_db, Nmse, NMSE_FLOOR};
pub use seeds::{derive_seed, stream_rng, Stream};
pub use sweep::{
    summarize, sweep, SummaryRow, SweepAxis, SweepOptions, SweepOutput, MANIFEST, PLOT_SCRIPT,
    SUMMARY_CSV, TIMINGS_CSV, TRACE_CSV, TRIALS_CSV,
};
pub use trial::{run_trial, AxisPoint, PreparedEstimator, TrialInstance, TrialRecord};

//! Hybrid analog combining and the aggregated pilot observation `y = Wᴴh + n`.
//!
//! SNR is defined after combining: `SNR = ‖Wᴴh‖² / (M · noise_var)` with
//! `M = T_p · N_RF`. Pilot symbols are all ones and do not appear explicitly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array_model::{ArrayGeometry, ChannelRealization};
use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::{CMatrix, CVector};

/// Training configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub n_slots: usize,
    pub n_rf: usize,
    /// `f64::INFINITY` means noiseless.
    pub snr_db: f64,
}

impl PilotConfig {
    pub fn new(n_slots: usize, n_rf: usize, snr_db: f64) -> Result<Self> {
        if n_slots == 0 || n_rf == 0 {
            return Err(Error::Config(format!(
                "pilot needs T_p ≥ 1 and N_RF ≥ 1, got T_p={n_slots}, N_RF={n_rf}"
            )));
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("invalid SNR {snr_db} dB")));
        }
        Ok(Self {
            n_slots,
            n_rf,
            snr_db,
        })
    }

    /// Measurement dimension `T_p · N_RF`.
    pub fn n_measurements(&self) -> usize {
        self.n_slots * self.n_rf
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Phase-shifter resolution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhaseResolution {
    #[default]
    Continuous,
    /// Phases restricted to `2^bits` uniformly spaced values.
    Quantized { bits: u32 },
}

/// Aggregated analog combiner `W = [W_1, …, W_Tp]`, `N × T_p·N_RF`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    pub w: CMatrix,
}

impl Combiner {
    /// Wraps an existing matrix after checking the constant-modulus constraint.
    pub fn from_matrix(w: CMatrix) -> Result<Self> {
        let target = 1.0 / (w.nrows() as f64).sqrt();
        if w.iter().any(|z| (z.norm() - target).abs() > 1e-12) {
            return Err(Error::Domain(
                "combiner entries must all have modulus 1/sqrt(N)".into(),
            ));
        }
        Ok(Self { w })
    }

    pub fn n_antennas(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_measurements(&self) -> usize {
        self.w.ncols()
    }
}

/// Random constant-modulus combiner with continuous phases.
pub fn generate_combiner<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &ArrayGeometry,
    pilot: &PilotConfig,
) -> Combiner {
    generate_combiner_with(rng, geom, pilot, PhaseResolution::Continuous)
}

/// Entries are drawn column by column, so the combiner for `T_p` slots is a
/// column prefix of the combiner for any longer pilot under the same stream.
pub fn generate_combiner_with<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &ArrayGeometry,
    pilot: &PilotConfig,
    phases: PhaseResolution,
) -> Combiner {
    let n = geom.n_antennas();
    let m = pilot.n_measurements();
    let modulus = 1.0 / (n as f64).sqrt();
    let data: Vec<Complex64> = (0..n * m)
        .map(|_| {
            let phi = match phases {
                PhaseResolution::Continuous => rng.random_range(0.0..2.0 * PI),
                PhaseResolution::Quantized { bits } => {
                    let levels = 1u64 << bits.min(32);
                    let k = rng.random_range(0..levels);
                    2.0 * PI * k as f64 / levels as f64
                }
            };
            Complex64::from_polar(modulus, phi)
        })
        .collect();
    Combiner {
        w: DMatrix::from_vec(n, m, data),
    }
}

/// Noisy aggregated observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: CVector,
    /// Per-entry complex noise variance; zero when noiseless.
    pub noise_var: f64,
}

/// Noise-free combined signal `Wᴴh`.
pub fn combine(h: &CVector, combiner: &Combiner) -> Result<CVector> {
    if h.len() != combiner.n_antennas() {
        return Err(Error::Dimension(format!(
            "channel has {} entries, combiner has {} rows",
            h.len(),
            combiner.n_antennas()
        )));
    }
    Ok(combiner.w.ad_mul(h))
}

/// `n` i.i.d. `CN(0, var)` samples.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize, var: f64) -> CVector {
    let s = (var / 2.0).sqrt();
    DVector::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

/// `y = Wᴴh + n` at the configured post-combining SNR.
pub fn observe<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    combiner: &Combiner,
    pilot: &PilotConfig,
    rng: &mut R,
) -> Result<Observation> {
    let m = pilot.n_measurements();
    if combiner.n_measurements() != m {
        return Err(Error::Dimension(format!(
            "combiner has {} columns, pilot needs {m}",
            combiner.n_measurements()
        )));
    }
    let clean = combine(&channel.h, combiner)?;
    if pilot.is_noiseless() {
        return Ok(Observation {
            y: clean,
            noise_var: 0.0,
        });
    }
    let signal_power = norm_sqr(&clean) / m as f64;
    if signal_power == 0.0 {
        return Err(Error::DegenerateSignal(
            "combined channel is zero; SNR is undefined".into(),
        ));
    }
    let noise_var = signal_power / pilot.snr_linear();
    let noise = complex_gaussian(rng, m, noise_var);
    Ok(Observation {
        y: clean + noise,
        noise_var,
    })
}

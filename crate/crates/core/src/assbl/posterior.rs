//! Gaussian posterior of the structured coefficients (E-step).
//!
//! `Σ = (σ ΨᴴΨ + Ω⁻¹)⁻¹` and `μ = σ Σ Ψᴴ y`. When `M < K` the covariance is
//! kept in Woodbury form `Σ = Ω − (ΨΩ)ᴴ C⁻¹ (ΨΩ)`, `C = σ⁻¹I + ΨΩΨᴴ`, and
//! only the pieces the M-step and the dictionary update need are formed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gemm, hpd_inverse, Op, ZERO};
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EStepPath {
    /// Woodbury iff `M < K`.
    #[default]
    Auto,
    Direct,
    Woodbury,
}

/// Posterior covariance, dense or in Woodbury form.
#[derive(Debug, Clone)]
pub enum Covariance {
    Dense(CMatrix),
    LowRank {
        omega: Vec<f64>,
        /// `ΨΩ`, `M × K`.
        psi_omega: CMatrix,
        /// `C⁻¹ΨΩ`, `M × K`.
        gain: CMatrix,
    },
}

impl Covariance {
    pub fn dim(&self) -> usize {
        match self {
            Covariance::Dense(s) => s.nrows(),
            Covariance::LowRank { omega, .. } => omega.len(),
        }
    }

    /// Real diagonal of `Σ`.
    pub fn diag(&self) -> Vec<f64> {
        match self {
            Covariance::Dense(s) => (0..s.nrows()).map(|k| s[(k, k)].re).collect(),
            Covariance::LowRank {
                omega,
                psi_omega,
                gain,
            } => omega
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let reduction: f64 = psi_omega
                        .column(k)
                        .iter()
                        .zip(gain.column(k).iter())
                        .map(|(a, b)| (a.conj() * b).re)
                        .sum();
                    w - reduction
                })
                .collect(),
        }
    }

    /// Rows `start..start + count` of `Σ`, a `count × K` matrix.
    pub fn rows(&self, start: usize, count: usize) -> CMatrix {
        match self {
            Covariance::Dense(s) => s.rows(start, count).into_owned(),
            Covariance::LowRank {
                omega,
                psi_omega,
                gain,
            } => {
                let mut out = -gemm(&psi_omega.columns(start, count).into_owned(), Op::Adjoint, gain, Op::None);
                for i in 0..count {
                    out[(i, start + i)] += Complex64::new(omega[start + i], 0.0);
                }
                out
            }
        }
    }

    /// Diagonal block `Σ[start..start+count, start..start+count]`.
    pub fn block(&self, start: usize, count: usize) -> CMatrix {
        match self {
            Covariance::Dense(s) => s.view((start, start), (count, count)).into_owned(),
            Covariance::LowRank {
                omega,
                psi_omega,
                gain,
            } => {
                let mut out = -psi_omega.columns(start, count).ad_mul(&gain.columns(start, count));
                for i in 0..count {
                    out[(i, i)] += Complex64::new(omega[start + i], 0.0);
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Covariance::Dense(s) => s.clone(),
            Covariance::LowRank { .. } => {
                let s = self.rows(0, self.dim());
                (&s + s.adjoint()) * Complex64::new(0.5, 0.0)
            }
        }
    }

    /// `Ψ Σ` for an arbitrary `M' × K` matrix `Ψ`.
    pub fn left_mul(&self, psi: &CMatrix) -> CMatrix {
        match self {
            Covariance::Dense(s) => gemm(psi, Op::None, s, Op::None),
            Covariance::LowRank {
                omega,
                psi_omega,
                gain,
            } => {
                let mut out = scale_columns(psi, omega);
                let cross = gemm(psi, Op::None, psi_omega, Op::Adjoint);
                out -= gemm(&cross, Op::None, gain, Op::None);
                out
            }
        }
    }
}

/// `tr(A Bᴴ)` real part for equally shaped `A`, `B`.
pub(crate) fn trace_a_bh(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

pub(crate) fn scale_columns(m: &CMatrix, scale: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (k, &s) in scale.iter().enumerate() {
        out.column_mut(k).scale_mut(s);
    }
    out
}

/// `CN(μ, Σ)` posterior plus `ΨΣ` for the sensing matrix it was computed with.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub mu: CVector,
    pub cov: Covariance,
    /// `ΨΣ`, `M × K`.
    pub psi_sigma: CMatrix,
}

impl Posterior {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Dense `Σ`.
    pub fn sigma_mat(&self) -> CMatrix {
        self.cov.to_dense()
    }

    /// `μ_u` for the `g_count`-sized block at position `pos`.
    pub fn block_mu(&self, pos: usize, g_count: usize) -> CVector {
        self.mu.rows(pos * g_count, g_count).into_owned()
    }

    /// `|μ_{k}|² + Σ_{kk}` for every coordinate.
    pub fn second_moments(&self) -> Vec<f64> {
        self.cov
            .diag()
            .into_iter()
            .zip(self.mu.iter())
            .map(|(v, m)| m.norm_sqr() + v)
            .collect()
    }

    /// `tr(Ψ Σ Ψᴴ)` for the sensing matrix used in the E-step.
    pub fn trace_sandwich(&self, psi: &CMatrix) -> f64 {
        trace_a_bh(&self.psi_sigma, psi)
    }
}

/// E-step with automatic path selection.
pub fn e_step(psi: &CMatrix, y: &CVector, sigma: f64, omega: &[f64]) -> Result<Posterior> {
    e_step_with(psi, y, sigma, omega, EStepPath::Auto)
}

pub fn e_step_with(
    psi: &CMatrix,
    y: &CVector,
    sigma: f64,
    omega: &[f64],
    path: EStepPath,
) -> Result<Posterior> {
    let (m, k) = psi.shape();
    if y.len() != m || omega.len() != k {
        return Err(Error::Dimension(format!(
            "Ψ is {m}x{k}, y has {} entries, Ω has {}",
            y.len(),
            omega.len()
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!(
            "noise precision must be positive, got {sigma}"
        )));
    }
    if let Some(bad) = omega.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::Domain(format!(
            "prior variances must be positive, got {bad}"
        )));
    }
    let woodbury = match path {
        EStepPath::Auto => m < k,
        EStepPath::Direct => false,
        EStepPath::Woodbury => true,
    };
    if woodbury {
        woodbury_step(psi, y, sigma, omega)
    } else {
        direct_step(psi, y, sigma, omega)
    }
}

/// `Σ = Ω^{1/2} (I + σ Ω^{1/2} ΨᴴΨ Ω^{1/2})⁻¹ Ω^{1/2}`, algebraically equal to
/// `(σΨᴴΨ + Ω⁻¹)⁻¹` but well conditioned when some `Ω` entries are tiny.
fn direct_step(psi: &CMatrix, y: &CVector, sigma: f64, omega: &[f64]) -> Result<Posterior> {
    let k = psi.ncols();
    let root: Vec<f64> = omega.iter().map(|w| w.sqrt()).collect();
    let scaled = scale_columns(psi, &root);
    let mut inner = gemm(&scaled, Op::Adjoint, &scaled, Op::None) * Complex64::new(sigma, 0.0);
    for i in 0..k {
        inner[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let inv = hpd_inverse(inner)?;
    let mut cov = DMatrix::from_fn(k, k, |i, j| inv[(i, j)] * (root[i] * root[j]));
    // Symmetrize away rounding.
    for i in 0..k {
        cov[(i, i)].im = 0.0;
        for j in (i + 1)..k {
            let v = (cov[(i, j)] + cov[(j, i)].conj()) * 0.5;
            cov[(i, j)] = v;
            cov[(j, i)] = v.conj();
        }
    }
    let mu = &cov * psi.ad_mul(y) * Complex64::new(sigma, 0.0);
    let psi_sigma = gemm(psi, Op::None, &cov, Op::None);
    Ok(Posterior {
        mu,
        cov: Covariance::Dense(cov),
        psi_sigma,
    })
}

fn woodbury_step(psi: &CMatrix, y: &CVector, sigma: f64, omega: &[f64]) -> Result<Posterior> {
    let m = psi.nrows();
    let psi_omega = scale_columns(psi, omega);
    let mut c = gemm(&psi_omega, Op::None, psi, Op::Adjoint);
    for i in 0..m {
        c[(i, i)] += Complex64::new(1.0 / sigma, 0.0);
    }
    // Hermitian by construction; clean the rounding.
    for i in 0..m {
        c[(i, i)].im = 0.0;
        for j in (i + 1)..m {
            let v = (c[(i, j)] + c[(j, i)].conj()) * 0.5;
            c[(i, j)] = v;
            c[(j, i)] = v.conj();
        }
    }
    let c_inv = hpd_inverse(c)?;
    let gain = gemm(&c_inv, Op::None, &psi_omega, Op::None);
    let mu = psi_omega.ad_mul(&(&c_inv * y));
    // ΨΣ = ΨΩ − (C − σ⁻¹I) C⁻¹ΨΩ = σ⁻¹ C⁻¹ΨΩ.
    let psi_sigma = &gain * Complex64::new(1.0 / sigma, 0.0);
    Ok(Posterior {
        mu,
        cov: Covariance::LowRank {
            omega: omega.to_vec(),
            psi_omega,
            gain,
        },
        psi_sigma,
    })
}

/// Zero `K`-vector helper for callers scattering active-set results.
pub(crate) fn zeros(k: usize) -> CVector {
    CVector::from_element(k, ZERO)
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::CVector;

/// Linear values below this are reported at this floor (−300 dB).
pub const NMSE_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nmse {
    pub linear: f64,
    pub db: f64,
}

impl Nmse {
    pub fn from_linear(linear: f64) -> Self {
        Self {
            linear,
            db: to_db(linear),
        }
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.max(NMSE_FLOOR).log10()
}

/// `‖h − ĥ‖² / ‖h‖²` for one realization.
pub fn nmse(h_true: &CVector, h_est: &CVector) -> Result<Nmse> {
    if h_true.len() != h_est.len() {
        return Err(Error::Dimension(format!(
            "true channel has {} entries, estimate has {}",
            h_true.len(),
            h_est.len()
        )));
    }
    let energy = norm_sqr(h_true);
    if energy == 0.0 {
        return Err(Error::Domain("NMSE of a zero channel is undefined".into()));
    }
    Ok(Nmse::from_linear(norm_sqr(&(h_true - h_est)) / energy))
}

/// Mean of linear per-trial ratios, also in dB. `None` for an empty slice.
pub fn mean_nmse(linear: &[f64]) -> Option<Nmse> {
    if linear.is_empty() {
        return None;
    }
    Some(Nmse::from_linear(linear.iter().sum::<f64>() / linear.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn h() -> CVector {
        CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)])
    }

    #[test]
    fn perfect_estimate() {
        let r = nmse(&h(), &h()).unwrap();
        assert_eq!(r.linear, 0.0);
        assert!(r.db <= -100.0);
    }

    #[test]
    fn zero_estimate_and_scale_error() {
        let zero = CVector::zeros(2);
        assert_eq!(nmse(&h(), &zero).unwrap().linear, 1.0);
        let doubled = h() * Complex64::new(2.0, 0.0);
        let r = nmse(&h(), &doubled).unwrap();
        assert!((r.linear - 1.0).abs() < 1e-15);
        assert!(r.db.abs() < 1e-12);
    }

    #[test]
    fn zero_channel_rejected() {
        assert!(matches!(nmse(&CVector::zeros(2), &h()), Err(Error::Domain(_))));
    }

    #[test]
    fn mean_is_of_linear_values() {
        let m = mean_nmse(&[0.1, 0.001]).unwrap();
        assert!((m.linear - 0.0505).abs() < 1e-15);
        assert!(mean_nmse(&[]).is_none());
    }
}

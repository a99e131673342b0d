//! Comparator estimators.
//!
//! * [`polar_omp`]: greedy selection over the sub-array-masked polar atoms
//!   `Wᴴ diag(a_q) J e_g` with a least-squares refit after every pick.
//! * [`oracle_ls`]: least squares on the true path atoms, a lower bound on
//!   the attainable error.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array_model::{steering_vector_with, ArrayGeometry, ChannelRealization, DistanceModel, SubArrayLayout};
use crate::dictionary::{block_sensing, PolarDictionary};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, select_columns, ZERO};
use crate::measurement::Combiner;
use crate::{CMatrix, CVector};

/// Support bookkeeping for greedy recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    /// Distinct polar atoms used, ascending, zero-based.
    pub atom_indices: Vec<usize>,
    /// Selected `(atom, sub-array)` columns in pick order.
    pub columns: Vec<(usize, usize)>,
    /// Least-squares coefficient of each selected column.
    pub coefficients: CVector,
}

#[derive(Debug, Clone)]
pub struct OmpOutput {
    pub h_hat: CVector,
    pub support: SupportEstimate,
    /// `‖y − Ax‖` after each iteration.
    pub residual_norms: Vec<f64>,
}

/// Simultaneous OMP over the `G·Q` masked polar atoms.
///
/// `n_iters` counts columns. Atoms are chosen by the normalized correlation
/// of the unmasked atom `Wᴴ a_q` with the residual, and the chosen atom's
/// sub-array columns are then added strongest first, with a refit after each.
/// A single masked column resolves angle and distance only at sub-array
/// aperture, so scoring columns in isolation locks onto neighbouring atoms.
///
/// A pick that makes the selected set rank deficient is dropped and
/// excluded from later iterations; it still consumes an iteration.
pub fn polar_omp(
    y: &CVector,
    combiner: &Combiner,
    pdict: &PolarDictionary,
    layout: &SubArrayLayout,
    n_iters: usize,
) -> Result<OmpOutput> {
    if n_iters == 0 {
        return Err(Error::Config("polar OMP needs at least one iteration".into()));
    }
    if y.len() != combiner.n_measurements() || pdict.atoms.nrows() != combiner.n_antennas() {
        return Err(Error::Dimension(format!(
            "y has {} entries, combiner is {}x{}, codebook has {} rows",
            y.len(),
            combiner.n_antennas(),
            combiner.n_measurements(),
            pdict.atoms.nrows()
        )));
    }
    let g_count = layout.n_subarrays();
    let q_count = pdict.q_atoms();
    let mut sensing = DMatrix::from_element(y.len(), g_count * q_count, ZERO);
    for q in 0..q_count {
        let block = block_sensing(combiner, layout, &pdict.atoms.column(q).into_owned())?;
        sensing.columns_mut(q * g_count, g_count).copy_from(&block);
    }
    let norms: Vec<f64> = (0..sensing.ncols())
        .map(|j| sensing.column(j).norm())
        .collect();
    let atom_norms: Vec<f64> = (0..q_count)
        .map(|q| sensing.columns(q * g_count, g_count).column_sum().norm())
        .collect();

    let mut excluded = vec![false; sensing.ncols()];
    let mut selected: Vec<usize> = Vec::new();
    let mut coeffs = CVector::zeros(0);
    let mut residual = y.clone();
    let mut residual_norms = Vec::with_capacity(n_iters);
    let mut used = 0;
    'outer: while used < n_iters {
        let corr = sensing.ad_mul(&residual);
        let score = |j: usize| {
            if excluded[j] || norms[j] == 0.0 {
                0.0
            } else {
                corr[j].norm_sqr() / (norms[j] * norms[j])
            }
        };
        let atom = (0..q_count)
            .filter(|&q| atom_norms[q] > 0.0 && (0..g_count).any(|g| score(q * g_count + g) > 0.0))
            .map(|q| {
                let c: Complex64 = (0..g_count).map(|g| corr[q * g_count + g]).sum();
                (q, c.norm() / atom_norms[q])
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((q, _)) = atom else { break };
        let mut cols: Vec<usize> = (q * g_count..(q + 1) * g_count)
            .filter(|&j| score(j) > 0.0)
            .collect();
        cols.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
        for pick in cols {
            if used == n_iters {
                break 'outer;
            }
            used += 1;
            excluded[pick] = true;
            selected.push(pick);
            let sub = select_columns(&sensing, &selected);
            match least_squares(&sub, y) {
                Some(x) => {
                    residual = y - &sub * &x;
                    coeffs = x;
                }
                None => {
                    selected.pop();
                }
            }
            residual_norms.push(residual.norm());
        }
    }

    let mut h_hat = CVector::from_element(combiner.n_antennas(), ZERO);
    let mut columns = Vec::with_capacity(selected.len());
    for (&col, &c) in selected.iter().zip(coeffs.iter()) {
        let (q, g) = (col / g_count, col % g_count);
        columns.push((q, g));
        for n in layout.antennas(g) {
            h_hat[n] += c * pdict.atoms[(n, q)];
        }
    }
    let atom_indices: Vec<usize> = columns
        .iter()
        .map(|&(q, _)| q)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(OmpOutput {
        h_hat,
        support: SupportEstimate {
            atom_indices,
            columns,
            coefficients: coeffs,
        },
        residual_norms,
    })
}

/// Least-squares fit of one gain per true path on `a(θ_ℓ, r_ℓ) ⊙ J b̄_ℓ`.
pub fn oracle_ls(
    y: &CVector,
    combiner: &Combiner,
    geom: &ArrayGeometry,
    layout: &SubArrayLayout,
    truth: &ChannelRealization,
    model: DistanceModel,
) -> Result<CVector> {
    let n = combiner.n_antennas();
    if y.len() != combiner.n_measurements() || geom.n_antennas() != n {
        return Err(Error::Dimension(format!(
            "y has {} entries, combiner is {}x{}, geometry has {} antennas",
            y.len(),
            n,
            combiner.n_measurements(),
            geom.n_antennas()
        )));
    }
    if truth.paths.is_empty() {
        return Err(Error::Dimension("oracle needs the true paths".into()));
    }
    let mut atoms: CMatrix = DMatrix::from_element(n, truth.paths.len(), ZERO);
    for (l, path) in truth.paths.iter().enumerate() {
        path.validate(layout)?;
        let a = steering_vector_with(geom, path.angle, path.distance, model)?;
        for idx in 0..n {
            if path.visibility[layout.group_of(idx)] {
                atoms[(idx, l)] = a[idx];
            }
        }
    }
    let sensing = combiner.w.ad_mul(&atoms);
    let gains = match least_squares(&sensing, y) {
        Some(x) => x,
        None => sensing
            .svd(true, true)
            .solve(y, 1e-12)
            .map_err(|e| Error::Singular(e.to_string()))?,
    };
    Ok(atoms * gains)
}

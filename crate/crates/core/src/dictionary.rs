//! Polar-domain codebook and the distance-parameterized adaptive dictionary.
//!
//! The adaptive dictionary keeps the uniform angular grid
//! `θ_u = (2u − U − 1)/U` fixed and carries one learnable distance per angle.
//! Block `u` of `D(r)` is `diag(a(θ_u, r_u)) J`, an `N × G` matrix with one
//! nonzero per row. Distances live in the `1/r` domain internally.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::{check_angle_distance, steering_vector, ArrayGeometry, SubArrayLayout};
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::measurement::Combiner;
use crate::{CMatrix, CVector};

/// Uniform angular grid `θ_u = (2u − U − 1)/U`, `u = 1..U`.
pub fn angle_grid(n_angles: usize) -> Vec<f64> {
    let u = n_angles as f64;
    (1..=n_angles)
        .map(|i| (2.0 * i as f64 - u - 1.0) / u)
        .collect()
}

/// Per-angle distance sampling for the polar codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistanceRule {
    /// One far-field atom per angle (DFT codebook).
    FarFieldOnly,
    /// Rings `r_s = N²d²(1 − θ²) / (2 β² λ s)`, `s = 1..s_max`, keeping
    /// those at or beyond `min_distance`, plus one far-field atom.
    Rings {
        beta: f64,
        s_max: usize,
        min_distance: f64,
    },
}

impl Default for DistanceRule {
    /// `β = 0.6`, `s_max = 10` gives 2200 atoms for `N = U = 256` at 100 GHz.
    fn default() -> Self {
        DistanceRule::Rings {
            beta: 0.6,
            s_max: 10,
            min_distance: 5.0,
        }
    }
}

impl DistanceRule {
    /// Distances sampled at `angle`, nearest first; the last is `∞`.
    pub fn distances(&self, geom: &ArrayGeometry, angle: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let DistanceRule::Rings {
            beta,
            s_max,
            min_distance,
        } = *self
        {
            let aperture = geom.n_antennas() as f64 * geom.spacing();
            let base = aperture * aperture * (1.0 - angle * angle)
                / (2.0 * beta * beta * geom.wavelength());
            for s in 1..=s_max {
                let r = base / s as f64;
                if r >= min_distance {
                    out.push(r);
                }
            }
        }
        out.push(f64::INFINITY);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarAtom {
    pub angle: f64,
    /// `f64::INFINITY` marks a far-field atom.
    pub distance: f64,
}

/// Polar-domain codebook `A = [a_1, …, a_Q]`.
#[derive(Debug, Clone)]
pub struct PolarDictionary {
    pub atoms: CMatrix,
    pub grid: Vec<PolarAtom>,
}

impl PolarDictionary {
    pub fn q_atoms(&self) -> usize {
        self.grid.len()
    }
}

pub fn build_polar_dictionary(
    geom: &ArrayGeometry,
    n_angles: usize,
    rule: DistanceRule,
) -> Result<PolarDictionary> {
    if n_angles == 0 {
        return Err(Error::Config("polar codebook needs U ≥ 1".into()));
    }
    let grid: Vec<PolarAtom> = angle_grid(n_angles)
        .into_iter()
        .flat_map(|angle| {
            rule.distances(geom, angle)
                .into_iter()
                .map(move |distance| PolarAtom { angle, distance })
        })
        .collect();
    let mut atoms = DMatrix::from_element(geom.n_antennas(), grid.len(), ZERO);
    for (q, atom) in grid.iter().enumerate() {
        atoms.set_column(q, &steering_vector(geom, atom.angle, atom.distance)?);
    }
    Ok(PolarDictionary { atoms, grid })
}

/// Admissible interval for `1/r` (m⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvDistanceBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for InvDistanceBounds {
    fn default() -> Self {
        Self {
            min: 1.0 / 1000.0,
            max: 1.0,
        }
    }
}

impl InvDistanceBounds {
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }
}

/// Fixed angular grid with one mutable distance per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveDictionary {
    geom: ArrayGeometry,
    layout: SubArrayLayout,
    angles: Vec<f64>,
    inv_distances: Vec<f64>,
    bounds: InvDistanceBounds,
}

impl AdaptiveDictionary {
    pub const DEFAULT_INIT_DISTANCE: f64 = 20.0;

    pub fn new(
        geom: ArrayGeometry,
        layout: SubArrayLayout,
        n_angles: usize,
        init_distance: f64,
        bounds: InvDistanceBounds,
    ) -> Result<Self> {
        if n_angles == 0 {
            return Err(Error::Config("adaptive dictionary needs U ≥ 1".into()));
        }
        if layout.n_antennas() != geom.n_antennas() {
            return Err(Error::Dimension(format!(
                "layout covers {} antennas, geometry has {}",
                layout.n_antennas(),
                geom.n_antennas()
            )));
        }
        if !(bounds.min > 0.0 && bounds.min <= bounds.max) {
            return Err(Error::Config(format!(
                "invalid 1/r bounds [{}, {}]",
                bounds.min, bounds.max
            )));
        }
        if !(init_distance > 0.0) {
            return Err(Error::Domain(format!(
                "initial distance must be positive, got {init_distance}"
            )));
        }
        let x0 = bounds.clamp(1.0 / init_distance);
        Ok(Self {
            geom,
            layout,
            angles: angle_grid(n_angles),
            inv_distances: vec![x0; n_angles],
            bounds,
        })
    }

    pub fn with_defaults(geom: ArrayGeometry, layout: SubArrayLayout, n_angles: usize) -> Result<Self> {
        Self::new(
            geom,
            layout,
            n_angles,
            Self::DEFAULT_INIT_DISTANCE,
            InvDistanceBounds::default(),
        )
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn layout(&self) -> &SubArrayLayout {
        &self.layout
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn n_subarrays(&self) -> usize {
        self.layout.n_subarrays()
    }

    /// `K = G · U`.
    pub fn n_columns(&self) -> usize {
        self.n_angles() * self.n_subarrays()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, u: usize) -> f64 {
        self.angles[u]
    }

    pub fn inv_distance(&self, u: usize) -> f64 {
        self.inv_distances[u]
    }

    pub fn inv_distances(&self) -> &[f64] {
        &self.inv_distances
    }

    pub fn distance(&self, u: usize) -> f64 {
        1.0 / self.inv_distances[u]
    }

    pub fn distances(&self) -> Vec<f64> {
        self.inv_distances.iter().map(|x| 1.0 / x).collect()
    }

    pub fn bounds(&self) -> InvDistanceBounds {
        self.bounds
    }

    /// Sets `1/r_u`, clamped to the admissible interval. Returns the stored value.
    pub fn set_inv_distance(&mut self, u: usize, x: f64) -> f64 {
        let x = self.bounds.clamp(x);
        self.inv_distances[u] = x;
        x
    }

    pub fn steering(&self, u: usize) -> Result<CVector> {
        steering_vector(&self.geom, self.angles[u], self.distance(u))
    }

    pub(crate) fn steering_at_inv(&self, u: usize, inv_distance: f64) -> Result<CVector> {
        steering_vector(&self.geom, self.angles[u], 1.0 / inv_distance)
    }
}

/// `D(r) = [diag(a_1)J, …, diag(a_U)J]`, `N × GU`.
pub fn materialize(adict: &AdaptiveDictionary) -> Result<CMatrix> {
    let layout = adict.layout();
    let g_count = layout.n_subarrays();
    let mut d = DMatrix::from_element(layout.n_antennas(), adict.n_columns(), ZERO);
    for u in 0..adict.n_angles() {
        let a = adict.steering(u)?;
        for g in 0..g_count {
            for n in layout.antennas(g) {
                d[(n, u * g_count + g)] = a[n];
            }
        }
    }
    Ok(d)
}

/// `Wᴴ diag(v) J` for an `N`-vector `v`, an `M × G` block.
pub fn block_sensing(combiner: &Combiner, layout: &SubArrayLayout, v: &CVector) -> Result<CMatrix> {
    if v.len() != combiner.n_antennas() || layout.n_antennas() != combiner.n_antennas() {
        return Err(Error::Dimension(format!(
            "combiner has {} rows, vector has {} entries, layout covers {} antennas",
            combiner.n_antennas(),
            v.len(),
            layout.n_antennas()
        )));
    }
    let m = combiner.n_measurements();
    let g_count = layout.n_subarrays();
    let mut out = DMatrix::from_element(m, g_count, ZERO);
    for j in 0..m {
        let w = combiner.w.column(j);
        for g in 0..g_count {
            let mut acc = ZERO;
            for n in layout.antennas(g) {
                acc += w[n].conj() * v[n];
            }
            out[(j, g)] = acc;
        }
    }
    Ok(out)
}

/// `Ψ = Wᴴ D(r)`, `M × GU`.
pub fn effective_sensing(combiner: &Combiner, adict: &AdaptiveDictionary) -> Result<CMatrix> {
    if combiner.n_antennas() != adict.geometry().n_antennas() {
        return Err(Error::Dimension(format!(
            "combiner has {} rows, dictionary has {} antennas",
            combiner.n_antennas(),
            adict.geometry().n_antennas()
        )));
    }
    let g_count = adict.n_subarrays();
    let mut psi = DMatrix::from_element(combiner.n_measurements(), adict.n_columns(), ZERO);
    for u in 0..adict.n_angles() {
        let block = block_sensing(combiner, adict.layout(), &adict.steering(u)?)?;
        psi.columns_mut(u * g_count, g_count).copy_from(&block);
    }
    Ok(psi)
}

/// `∂a(θ, r)/∂(1/r)`; only the quadratic phase term depends on `1/r`.
pub fn steering_inv_distance_derivative(
    geom: &ArrayGeometry,
    angle: f64,
    distance: f64,
) -> Result<CVector> {
    check_angle_distance(angle, distance)?;
    let a = steering_vector(geom, angle, distance)?;
    let k = geom.wavenumber();
    let d = geom.spacing();
    let curvature = 1.0 - angle * angle;
    Ok(CVector::from_fn(a.len(), |n, _| {
        let delta = geom.offset(n) * d;
        a[n] * Complex64::new(0.0, -k * delta * delta * curvature / 2.0)
    }))
}

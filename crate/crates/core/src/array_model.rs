//! Uniform linear array geometry, near-field steering vectors and the
//! spatially non-stationary multipath channel.
//!
//! Angles are always normalized spatial angles `θ = sin(φ) ∈ [-1, 1]`, never
//! radians. Distances are in meters.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::CVector;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Half-wavelength ULA with `N` elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    n_antennas: usize,
    carrier_freq: f64,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, carrier_freq: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::Config("array needs at least one antenna".into()));
        }
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::Config(format!(
                "carrier frequency must be positive, got {carrier_freq}"
            )));
        }
        Ok(Self {
            n_antennas,
            carrier_freq,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Element spacing, exactly half a wavelength.
    pub fn spacing(&self) -> f64 {
        self.wavelength() / 2.0
    }

    /// `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    /// Offset `δ_n = (2n − N − 1)/2` of the zero-based element `idx`.
    #[inline]
    pub fn offset(&self, idx: usize) -> f64 {
        (2.0 * (idx + 1) as f64 - self.n_antennas as f64 - 1.0) / 2.0
    }
}

/// Per-element offsets `δ_1..δ_N`, symmetric about zero.
pub fn antenna_offsets(geom: &ArrayGeometry) -> Vec<f64> {
    (0..geom.n_antennas()).map(|n| geom.offset(n)).collect()
}

/// How the per-element propagation distance `r⁽ⁿ⁾` is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceModel {
    /// Second-order (Fresnel) expansion
    /// `r⁽ⁿ⁾ ≈ r − δ_n d θ + δ_n² d² (1 − θ²) / (2r)`.
    #[default]
    Fresnel,
    /// Exact law of cosines `r⁽ⁿ⁾ = √(r² − 2 r δ_n d θ + δ_n² d²)`.
    Exact,
}

/// Near-field steering vector under the Fresnel approximation.
pub fn steering_vector(geom: &ArrayGeometry, angle: f64, distance: f64) -> Result<CVector> {
    steering_vector_with(geom, angle, distance, DistanceModel::Fresnel)
}

pub fn steering_vector_with(
    geom: &ArrayGeometry,
    angle: f64,
    distance: f64,
    model: DistanceModel,
) -> Result<CVector> {
    check_angle_distance(angle, distance)?;
    let n = geom.n_antennas();
    let scale = 1.0 / (n as f64).sqrt();
    let k = geom.wavenumber();
    let d = geom.spacing();
    Ok(DVector::from_fn(n, |idx, _| {
        let delta = geom.offset(idx) * d;
        let excess = match model {
            DistanceModel::Fresnel => fresnel_excess(delta, angle, distance),
            DistanceModel::Exact if distance.is_finite() => {
                (distance * distance - 2.0 * distance * delta * angle + delta * delta).sqrt()
                    - distance
            }
            DistanceModel::Exact => -delta * angle,
        };
        Complex64::from_polar(scale, -k * excess)
    }))
}

/// `r⁽ⁿ⁾ − r` for an element at physical offset `delta` (meters).
#[inline]
pub(crate) fn fresnel_excess(delta: f64, angle: f64, distance: f64) -> f64 {
    -delta * angle + delta * delta * (1.0 - angle * angle) / (2.0 * distance)
}

pub(crate) fn check_angle_distance(angle: f64, distance: f64) -> Result<()> {
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if !(-1.0..=1.0).contains(&angle) {
        return Err(Error::Domain(format!(
            "normalized angle must lie in [-1, 1], got {angle}"
        )));
    }
    Ok(())
}

/// Partition of the array into `G` equal groups of consecutive elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubArrayLayout {
    n_subarrays: usize,
    per_subarray: usize,
}

impl SubArrayLayout {
    pub fn new(n_antennas: usize, n_subarrays: usize) -> Result<Self> {
        if n_subarrays == 0 || n_antennas == 0 || !n_antennas.is_multiple_of(n_subarrays) {
            return Err(Error::Config(format!(
                "{n_subarrays} sub-arrays do not evenly divide {n_antennas} antennas"
            )));
        }
        Ok(Self {
            n_subarrays,
            per_subarray: n_antennas / n_subarrays,
        })
    }

    pub fn n_subarrays(&self) -> usize {
        self.n_subarrays
    }

    pub fn per_subarray(&self) -> usize {
        self.per_subarray
    }

    pub fn n_antennas(&self) -> usize {
        self.n_subarrays * self.per_subarray
    }

    /// Sub-array index of antenna `idx`.
    #[inline]
    pub fn group_of(&self, idx: usize) -> usize {
        idx / self.per_subarray
    }

    /// Antenna index range covered by sub-array `g`.
    #[inline]
    pub fn antennas(&self, g: usize) -> std::ops::Range<usize> {
        g * self.per_subarray..(g + 1) * self.per_subarray
    }
}

/// `J = I_G ⊗ 1_{N_g}`.
pub fn expansion_matrix(layout: &SubArrayLayout) -> DMatrix<f64> {
    DMatrix::from_fn(layout.n_antennas(), layout.n_subarrays(), |n, g| {
        if layout.group_of(n) == g {
            1.0
        } else {
            0.0
        }
    })
}

/// One propagation path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub gain: Complex64,
    pub angle: f64,
    pub distance: f64,
    /// Sub-array visibility `b̄`, one flag per sub-array.
    pub visibility: Vec<bool>,
}

impl PathParams {
    pub fn validate(&self, layout: &SubArrayLayout) -> Result<()> {
        if self.visibility.len() != layout.n_subarrays() {
            return Err(Error::Dimension(format!(
                "visibility has {} entries, layout has {} sub-arrays",
                self.visibility.len(),
                layout.n_subarrays()
            )));
        }
        if !self.visibility.iter().any(|&v| v) {
            return Err(Error::Domain("path is visible on no sub-array".into()));
        }
        check_angle_distance(self.angle, self.distance)
    }

    pub fn visible_count(&self) -> usize {
        self.visibility.iter().filter(|&&v| v).count()
    }

    /// Per-antenna mask `J b̄`.
    pub fn antenna_mask(&self, layout: &SubArrayLayout) -> Vec<bool> {
        (0..layout.n_antennas())
            .map(|n| self.visibility[layout.group_of(n)])
            .collect()
    }
}

/// A channel vector together with the paths that generated it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CVector,
    pub paths: Vec<PathParams>,
}

/// `h = √(N/L) Σ_ℓ α_ℓ a(θ_ℓ, r_ℓ) ⊙ J b̄_ℓ`.
pub fn synthesize_channel(
    geom: &ArrayGeometry,
    layout: &SubArrayLayout,
    paths: &[PathParams],
) -> Result<ChannelRealization> {
    synthesize_channel_with(geom, layout, paths, DistanceModel::Fresnel)
}

pub fn synthesize_channel_with(
    geom: &ArrayGeometry,
    layout: &SubArrayLayout,
    paths: &[PathParams],
    model: DistanceModel,
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::Dimension("channel needs at least one path".into()));
    }
    if layout.n_antennas() != geom.n_antennas() {
        return Err(Error::Dimension(format!(
            "layout covers {} antennas, geometry has {}",
            layout.n_antennas(),
            geom.n_antennas()
        )));
    }
    let n = geom.n_antennas();
    let scale = (n as f64 / paths.len() as f64).sqrt();
    let mut h = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for path in paths {
        path.validate(layout)?;
        let a = steering_vector_with(geom, path.angle, path.distance, model)?;
        let coeff = path.gain * scale;
        for (g, &visible) in path.visibility.iter().enumerate() {
            if visible {
                for idx in layout.antennas(g) {
                    h[idx] += coeff * a[idx];
                }
            }
        }
    }
    Ok(ChannelRealization {
        h,
        paths: paths.to_vec(),
    })
}

/// Scenario statistics for drawing random channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub carrier_freq: f64,
    pub n_subarrays: usize,
    pub n_paths: usize,
    /// Angles are drawn from `(-angle_limit, angle_limit)`.
    pub angle_limit: f64,
    pub min_distance: f64,
    pub max_distance: f64,
    pub distance_model: DistanceModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_antennas: 64,
            carrier_freq: 100e9,
            n_subarrays: 4,
            n_paths: 2,
            angle_limit: 3f64.sqrt() / 2.0,
            min_distance: 5.0,
            max_distance: 100.0,
            distance_model: DistanceModel::Fresnel,
        }
    }
}

impl ScenarioConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.n_antennas, self.carrier_freq)
    }

    pub fn layout(&self) -> Result<SubArrayLayout> {
        SubArrayLayout::new(self.n_antennas, self.n_subarrays)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        self.layout()?;
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(self.angle_limit > 0.0 && self.angle_limit <= 1.0) {
            return Err(Error::Config(format!(
                "angle_limit must be in (0, 1], got {}",
                self.angle_limit
            )));
        }
        if !(self.min_distance > 0.0 && self.min_distance <= self.max_distance) {
            return Err(Error::Config(format!(
                "distance range [{}, {}] is invalid",
                self.min_distance, self.max_distance
            )));
        }
        Ok(())
    }

    /// Smallest visibility run the sampler produces, `⌈G/2⌉`.
    pub fn min_visible(&self) -> usize {
        self.n_subarrays.div_ceil(2)
    }

    /// Mean number of visible sub-arrays per path under the sampler.
    pub fn expected_visible(&self) -> f64 {
        (self.min_visible() + self.n_subarrays) as f64 / 2.0
    }
}

/// Draws `n_paths` random paths.
///
/// Visibility is a contiguous run of sub-arrays whose length is uniform on
/// `{⌈G/2⌉, …, G}` and whose start is uniform over the admissible positions.
pub fn sample_paths<R: Rng + ?Sized>(
    rng: &mut R,
    n_paths: usize,
    scenario: &ScenarioConfig,
) -> Result<Vec<PathParams>> {
    scenario.validate()?;
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be at least 1".into()));
    }
    let g = scenario.n_subarrays;
    let lim = scenario.angle_limit;
    let mut out = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let angle = loop {
            let a = rng.random_range(-lim..lim);
            if a > -lim {
                break a;
            }
        };
        let distance = rng.random_range(scenario.min_distance..=scenario.max_distance);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let gain = Complex64::new(re, im) / 2f64.sqrt();
        let len = rng.random_range(scenario.min_visible()..=g);
        let start = rng.random_range(0..=g - len);
        let visibility = (0..g).map(|i| i >= start && i < start + len).collect();
        out.push(PathParams {
            gain,
            angle,
            distance,
            visibility,
        });
    }
    Ok(out)
}

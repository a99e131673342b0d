//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xlmimo_core::measurement::complex_gaussian;
use xlmimo_core::{
    generate_combiner, observe, sample_paths, synthesize_channel, ArrayGeometry, CMatrix,
    CVector, ChannelRealization, Combiner, DMatrix, PilotConfig, ScenarioConfig, SubArrayLayout,
};

/// One noisy observation of a random channel.
pub struct Instance {
    pub geom: ArrayGeometry,
    pub layout: SubArrayLayout,
    pub channel: ChannelRealization,
    pub combiner: Combiner,
    pub y: CVector,
}

impl Instance {
    pub fn new(n_antennas: usize, t_p: usize, snr_db: f64, seed: u64) -> Self {
        let scenario = ScenarioConfig {
            n_antennas,
            ..ScenarioConfig::default()
        };
        let geom = scenario.geometry().unwrap();
        let layout = scenario.layout().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let paths = sample_paths(&mut rng, scenario.n_paths, &scenario).unwrap();
        let channel = synthesize_channel(&geom, &layout, &paths).unwrap();
        let pilot = PilotConfig::new(t_p, 4, snr_db).unwrap();
        let combiner = generate_combiner(&mut rng, &geom, &pilot);
        let y = observe(&channel, &combiner, &pilot, &mut rng).unwrap().y;
        Self {
            geom,
            layout,
            channel,
            combiner,
            y,
        }
    }
}

/// Gaussian `Ψ`, `y` and a prior diagonal for E-step timing.
pub fn estep_problem(m: usize, k: usize, seed: u64) -> (CMatrix, CVector, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = DMatrix::from_vec(m, k, complex_gaussian(&mut rng, m * k, 1.0).as_slice().to_vec());
    let y = complex_gaussian(&mut rng, m, 1.0);
    let omega = (0..k).map(|i| 0.1 + (i % 7) as f64 * 0.3).collect();
    (psi, y, omega)
}

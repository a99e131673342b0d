//! Fast property checks runnable from the command line.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array_model::{antenna_offsets, steering_vector, ArrayGeometry, PathParams, SubArrayLayout, synthesize_channel};
use crate::assbl::{assbl_estimate, e_step_with, AssblConfig, EStepPath};
use crate::dictionary::{angle_grid, steering_inv_distance_derivative};
use crate::harness::nmse;
use crate::linalg::relative_frobenius;
use crate::measurement::{generate_combiner, observe, complex_gaussian, PilotConfig};
use crate::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs every check; never panics on a failed property.
pub fn run_all() -> Vec<Check> {
    vec![
        steering_norms(),
        offsets_symmetric(),
        far_field_limit(),
        woodbury_agrees(),
        derivative_matches_fd(),
        noiseless_recovery(),
    ]
}

fn steering_norms() -> Check {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 64, 256] {
        let geom = ArrayGeometry::new(n, 100e9).expect("valid geometry");
        for _ in 0..20 {
            let a = steering_vector(&geom, rng.random_range(-1.0..=1.0), rng.random_range(1.0..200.0))
                .expect("valid point");
            worst = worst.max((a.norm() - 1.0).abs());
        }
    }
    check("steering vectors have unit norm", worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn offsets_symmetric() -> Check {
    let mut worst = 0.0f64;
    for n in [2, 4, 64, 256] {
        let geom = ArrayGeometry::new(n, 100e9).expect("valid geometry");
        let d = antenna_offsets(&geom);
        for i in 0..n {
            worst = worst.max((d[i] + d[n - 1 - i]).abs());
        }
    }
    check("antenna offsets are symmetric", worst == 0.0, format!("max asymmetry {worst:.2e}"))
}

fn far_field_limit() -> Check {
    let geom = ArrayGeometry::new(64, 100e9).expect("valid geometry");
    let near = steering_vector(&geom, 0.3, 1e9).expect("valid point");
    let far = steering_vector(&geom, 0.3, f64::INFINITY).expect("valid point");
    let gap = (&near - &far).norm();
    check("far-field limit", gap <= 1e-6, format!("‖a(r=1e9) − a(∞)‖ = {gap:.2e}"))
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, k: usize) -> CMatrix {
    let v = complex_gaussian(rng, m * k, 1.0);
    CMatrix::from_iterator(m, k, v.iter().copied())
}

fn woodbury_agrees() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let k = rng.random_range(4..=64);
        let m = rng.random_range(1..=32);
        let psi = random_matrix(&mut rng, m, k);
        let y = complex_gaussian(&mut rng, m, 1.0);
        let omega: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..2.0)).collect();
        let sigma = rng.random_range(0.5..20.0);
        let a = e_step_with(&psi, &y, sigma, &omega, EStepPath::Direct);
        let b = e_step_with(&psi, &y, sigma, &omega, EStepPath::Woodbury);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                worst = worst.max(relative_frobenius(&a.sigma_mat(), &b.sigma_mat()));
                let mu_a = CMatrix::from_column_slice(k, 1, a.mu.as_slice());
                let mu_b = CMatrix::from_column_slice(k, 1, b.mu.as_slice());
                worst = worst.max(relative_frobenius(&mu_a, &mu_b));
            }
            _ => worst = f64::INFINITY,
        }
    }
    check("E-step direct and Woodbury forms agree", worst <= 1e-8, format!("max relative difference {worst:.2e}"))
}

fn derivative_matches_fd() -> Check {
    let geom = ArrayGeometry::new(64, 100e9).expect("valid geometry");
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let theta: f64 = rng.random_range(-0.95..0.95);
        let x: f64 = rng.random_range(0.01..0.2);
        let h = 1e-7;
        let plus = steering_vector(&geom, theta, 1.0 / (x + h)).expect("valid point");
        let minus = steering_vector(&geom, theta, 1.0 / (x - h)).expect("valid point");
        let fd = (plus - minus) / Complex64::new(2.0 * h, 0.0);
        let da = steering_inv_distance_derivative(&geom, theta, 1.0 / x).expect("valid point");
        worst = worst.max((&da - &fd).norm() / da.norm());
    }
    check("1/r derivative matches finite differences", worst <= 1e-4, format!("max relative error {worst:.2e}"))
}

fn noiseless_recovery() -> Check {
    let run = || -> crate::Result<f64> {
        let geom = ArrayGeometry::new(64, 100e9)?;
        let layout = SubArrayLayout::new(64, 4)?;
        let theta = angle_grid(64)[40];
        let path = PathParams {
            gain: Complex64::new(0.8, -0.6),
            angle: theta,
            distance: 20.0,
            visibility: vec![true; 4],
        };
        let channel = synthesize_channel(&geom, &layout, &[path])?;
        let pilot = PilotConfig::new(16, 4, f64::INFINITY)?;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let combiner = generate_combiner(&mut rng, &geom, &pilot);
        let obs = observe(&channel, &combiner, &pilot, &mut rng)?;
        let out = assbl_estimate(&obs.y, &combiner, &geom, &layout, &AssblConfig::default())?;
        Ok(nmse(&channel.h, &out.h_hat)?.db)
    };
    match run() {
        Ok(db) => check("noiseless on-grid recovery", db <= -30.0, format!("NMSE {db:.1} dB")),
        Err(e) => check("noiseless on-grid recovery", false, e.to_string()),
    }
}

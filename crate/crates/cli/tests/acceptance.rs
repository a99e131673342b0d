//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. `ACCEPTANCE_ONLY=4,8` runs a subset.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xlmimo_core::assbl::{
    distance_gradient, e_step, e_step_with, intra_block_covariance, prior_covariance, q_dictionary,
    q_gamma, q_lambda, q_sigma, q_zeta, refine_distances, update_alpha, update_gamma, update_lambda,
    update_sigma, update_zeta, EStepPath, StepOutcome,
};
use xlmimo_core::dictionary::angle_grid;
use xlmimo_core::harness::{sweep, Profile, SweepAxis, SweepConfig, SweepOptions};
use xlmimo_core::measurement::complex_gaussian;
use xlmimo_core::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, k: usize) -> CMatrix {
    let v = complex_gaussian(rng, m * k, 1.0);
    CMatrix::from_iterator(m, k, v.iter().copied())
}

fn hermitian_psd(s: &CMatrix) -> (f64, f64) {
    let asym = (s - s.adjoint()).norm() / s.norm();
    let sym = (s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eig = sym.symmetric_eigenvalues().min();
    (asym, min_eig / s.norm())
}

fn random_state(rng: &mut ChaCha8Rng, u_count: usize, g: usize) -> HyperState {
    HyperState {
        gamma: (0..u_count).map(|_| rng.random_range(0.05..3.0)).collect(),
        alpha: DMatrix::from_fn(u_count, g, |_, _| rng.random_range(0.1..5.0)),
        zeta: (0..u_count).map(|_| rng.random_range(0.1..5.0)).collect(),
        lambda: rng.random_range(0.1..5.0),
        sigma: rng.random_range(0.5..50.0),
    }
}

/// Steering vectors, far-field limit and offset symmetry.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let (mut norm_dev, mut far_dev, mut sym_dev) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 4, 64, 256] {
        let geom = ArrayGeometry::new(n, 100e9).unwrap();
        let offsets = antenna_offsets(&geom);
        sym_dev = sym_dev.max(offsets.iter().sum::<f64>().abs());
        for i in 0..n {
            sym_dev = sym_dev.max((offsets[i] + offsets[n - 1 - i]).abs());
        }
        for _ in 0..200 {
            let theta = r.random_range(-1.0..=1.0);
            let dist = r.random_range(0.5..1000.0);
            let a = steering_vector(&geom, theta, dist).unwrap();
            norm_dev = norm_dev.max((a.norm() - 1.0).abs());
            let far = steering_vector(&geom, theta, 1e12).unwrap();
            let k = geom.wavenumber() * geom.spacing();
            for (idx, z) in far.iter().enumerate() {
                let dft = Complex64::from_polar(1.0 / (n as f64).sqrt(), k * offsets[idx] * theta);
                far_dev = far_dev.max((z - dft).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        norm_dev <= 1e-12 && far_dev <= 1e-6 && sym_dev == 0.0 && secs < 1.0,
        format!("norm dev {norm_dev:.1e}, far-field dev {far_dev:.1e}, offset asymmetry {sym_dev:.1e}, {secs:.2} s"),
    )
}

/// Direct and Woodbury E-steps agree; Σ Hermitian PSD.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let (mut worst, mut worst_asym, mut worst_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..50 {
        let k = r.random_range(2..=64);
        let m = r.random_range(1..=32);
        let psi = random_matrix(&mut r, m, k) * Complex64::new(1.0 / (k as f64).sqrt(), 0.0);
        let y = complex_gaussian(&mut r, m, 1.0);
        let omega: Vec<f64> = (0..k).map(|_| 10f64.powf(r.random_range(-3.0..1.0))).collect();
        let sigma = 10f64.powf(r.random_range(-1.0..3.0));
        let a = e_step_with(&psi, &y, sigma, &omega, EStepPath::Direct).unwrap();
        let b = e_step_with(&psi, &y, sigma, &omega, EStepPath::Woodbury).unwrap();
        let (sa, sb) = (a.sigma_mat(), b.sigma_mat());
        let mu_a = CMatrix::from_column_slice(k, 1, a.mu.as_slice());
        let mu_b = CMatrix::from_column_slice(k, 1, b.mu.as_slice());
        worst = worst
            .max(relative_frobenius(&sb, &sa))
            .max(relative_frobenius(&mu_b, &mu_a));
        for s in [&sa, &sb] {
            let (asym, eig) = hermitian_psd(s);
            worst_asym = worst_asym.max(asym);
            worst_eig = worst_eig.min(eig);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && worst_asym <= 1e-10 && worst_eig >= -1e-12 && secs < 10.0,
        format!(
            "max rel diff {worst:.1e}, max asymmetry {worst_asym:.1e}, min eig/‖Σ‖ {worst_eig:.1e}, {secs:.2} s"
        ),
    )
}

/// `f'(x)` by central differences, normalized by `scale`.
fn normalized_derivative(f: impl Fn(f64) -> f64, x: f64, scale: f64) -> f64 {
    let h = 1e-5 * x;
    ((f(x + h) - f(x - h)) / (2.0 * h) * x / scale).abs()
}

/// M-step roots, stationarity, α oracle and coordinate ascent.
fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3);
    let cfg = AssblConfig::default();
    let h = cfg.hyperpriors;
    let (mut root_res, mut stat, mut alpha_dev, mut drop) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let g = r.random_range(1..=6);
        let u_count = r.random_range(1..=8);
        let k = g * u_count;
        let m = r.random_range(2..=24);
        let psi = random_matrix(&mut r, m, k);
        let y = complex_gaussian(&mut r, m, 1.0);
        let mut state = random_state(&mut r, u_count, g);
        let cfg = AssblConfig {
            beta: r.random_range(0.0..1.5),
            n_angles: u_count,
            ..cfg.clone()
        };
        let omega = prior_covariance(&state, &cfg).unwrap();
        let post = e_step(&psi, &y, state.sigma, &omega).unwrap();
        let e = post.second_moments();

        // γ: root residual and coordinate ascent.
        let gamma = update_gamma(&post, &state, &cfg).unwrap();
        for u in 0..u_count {
            let alpha_u: Vec<f64> = state.alpha.row(u).iter().copied().collect();
            let delta = intra_block_covariance(&alpha_u, cfg.beta).unwrap();
            let s: f64 = (0..g).map(|j| e[u * g + j] / delta[j]).sum();
            let gu = gamma[u];
            let res = (state.lambda * gu * gu + g as f64 * gu - s).abs();
            root_res = root_res.max(res / (g as f64 + state.lambda * gu * gu));
            let before = q_gamma(state.gamma[u], s, g, state.lambda);
            let after = q_gamma(gu, s, g, state.lambda);
            drop = drop.max((before - after) / before.abs().max(1.0));
        }
        state.gamma = gamma;

        // α against a scalar loop.
        let alpha = update_alpha(&post, &state, &cfg).unwrap();
        for u in 0..u_count {
            for j in 0..g {
                let left = if j > 0 { e[u * g + j - 1] } else { 0.0 };
                let right = if j + 1 < g { e[u * g + j + 1] } else { 0.0 };
                let nu = e[u * g + j] + cfg.beta * left + cfg.beta * right;
                let want = cfg.chi * (1.0 + 2.0 * cfg.beta) / (nu / state.gamma[u] + state.zeta[u]);
                alpha_dev = alpha_dev.max((alpha[(u, j)] - want).abs() / want);
            }
        }
        state.alpha = alpha;

        // ζ.
        let zeta = update_zeta(&state, &cfg);
        for (u, &zeta_u) in zeta.iter().enumerate() {
            let alpha_u: Vec<f64> = state.alpha.row(u).iter().copied().collect();
            let sum: f64 = alpha_u.iter().sum();
            let scale = zeta_u * (sum + h.b_zeta) + (g as f64 + h.a_zeta - 1.0);
            stat = stat.max(normalized_derivative(|z| q_zeta(z, &alpha_u, &cfg), zeta_u, scale));
            let before = q_zeta(state.zeta[u], &alpha_u, &cfg);
            let after = q_zeta(zeta[u], &alpha_u, &cfg);
            drop = drop.max((before - after) / before.abs().max(1.0));
        }
        state.zeta = zeta;

        // λ.
        let lambda = update_lambda(&state, &cfg);
        let scale = lambda * (state.gamma.iter().sum::<f64>() + h.b_lambda) + (u_count as f64 + h.a_lambda - 1.0);
        stat = stat.max(normalized_derivative(|l| q_lambda(l, &state.gamma, &cfg), lambda, scale));
        let before = q_lambda(state.lambda, &state.gamma, &cfg);
        drop = drop.max((before - q_lambda(lambda, &state.gamma, &cfg)) / before.abs().max(1.0));
        state.lambda = lambda;

        // σ.
        let sigma = update_sigma(&post, &psi, &y, &cfg).unwrap();
        let fit = (&y - &psi * &post.mu).norm_squared() + post.trace_sandwich(&psi);
        let scale = sigma * (fit + h.b_sigma) + (m as f64 + h.a_sigma - 1.0);
        stat = stat.max(normalized_derivative(|s| q_sigma(s, fit, m, &cfg), sigma, scale));
        let before = q_sigma(state.sigma, fit, m, &cfg);
        drop = drop.max((before - q_sigma(sigma, fit, m, &cfg)) / before.abs().max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        root_res <= 1e-10 && stat <= 1e-8 && alpha_dev <= 1e-15 && drop <= 1e-9 && secs < 10.0,
        format!(
            "γ root residual {root_res:.1e}, stationarity {stat:.1e}, α oracle dev {alpha_dev:.1e}, max objective drop {drop:.1e}, {secs:.2} s"
        ),
    )
}

struct RefineCase {
    combiner: measurement::Combiner,
    adict: AdaptiveDictionary,
    psi: CMatrix,
    y: CVector,
    state: HyperState,
    cfg: AssblConfig,
}

fn refine_case(r: &mut ChaCha8Rng) -> RefineCase {
    let n = 32;
    let g = 4;
    let u_count = 8;
    let geom = ArrayGeometry::new(n, 100e9).unwrap();
    let layout = SubArrayLayout::new(n, g).unwrap();
    let mut adict = AdaptiveDictionary::with_defaults(geom, layout, u_count).unwrap();
    for u in 0..u_count {
        adict.set_inv_distance(u, 1.0 / r.random_range(2.0..60.0));
    }
    let pilot = PilotConfig::new(6, 4, f64::INFINITY).unwrap();
    let combiner = generate_combiner(r, &geom, &pilot);
    let psi = effective_sensing(&combiner, &adict).unwrap();
    let truth = complex_gaussian(r, g * u_count, 1.0);
    let y = &psi * truth + complex_gaussian(r, pilot.n_measurements(), 0.05);
    let cfg = AssblConfig {
        n_angles: u_count,
        n_refine: u_count,
        ..AssblConfig::default()
    };
    let state = random_state(r, u_count, g);
    RefineCase {
        combiner,
        adict,
        psi,
        y,
        state,
        cfg,
    }
}

/// Distance gradient, Armijo monotonicity, on-grid distance recovery.
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut grad_err = 0.0f64;
    for _ in 0..20 {
        let case = refine_case(&mut r);
        let omega = prior_covariance(&case.state, &case.cfg).unwrap();
        let post = e_step(&case.psi, &case.y, case.state.sigma, &omega).unwrap();
        let sigma_mat = post.sigma_mat();
        let u = r.random_range(0..case.adict.n_angles());
        let q_at = |x: f64| {
            let mut d = case.adict.clone();
            d.set_inv_distance(u, x);
            let psi = effective_sensing(&case.combiner, &d).unwrap();
            q_dictionary(&psi, &post.mu, &sigma_mat, case.state.sigma, &case.y)
        };
        let x = case.adict.inv_distance(u);
        let h = 1e-6;
        let fd = (q_at(x + h) - q_at(x - h)) / (2.0 * h);
        let analytic = distance_gradient(
            u,
            &case.psi,
            &case.combiner,
            &case.adict,
            &post.mu,
            &sigma_mat,
            case.state.sigma,
            &case.y,
        )
        .unwrap();
        grad_err = grad_err.max((analytic - fd).abs() / analytic.abs());
    }

    let (mut accepted, mut violations, mut q_mismatch) = (0usize, 0usize, 0.0f64);
    for _ in 0..20 {
        let case = refine_case(&mut r);
        let omega = prior_covariance(&case.state, &case.cfg).unwrap();
        let post = e_step(&case.psi, &case.y, case.state.sigma, &omega).unwrap();
        let (refined, report) =
            refine_distances(&case.adict, &post, &case.state, &case.combiner, &case.y, &case.cfg).unwrap();
        for (_, step) in &report.steps {
            if let StepOutcome::Accepted { q_before, q_after, .. } = step {
                accepted += 1;
                if q_after > q_before {
                    violations += 1;
                }
            }
        }
        let psi = effective_sensing(&case.combiner, &refined).unwrap();
        let dense = q_dictionary(&psi, &post.mu, &post.sigma_mat(), case.state.sigma, &case.y);
        q_mismatch = q_mismatch.max((dense - report.q_after).abs() / dense.abs());
    }

    // With 64 elements the whole 5 to 100 m range lies beyond the array's
    // Rayleigh distance and r is not identifiable; 256 elements resolve it.
    let mut closer = 0;
    let mut lines = Vec::new();
    for seed in 0..20u64 {
        let mut r = rng(400 + seed);
        let geom = ArrayGeometry::new(256, 100e9).unwrap();
        let layout = SubArrayLayout::new(256, 4).unwrap();
        let grid = angle_grid(64);
        let u = r.random_range(8..56);
        let r_true = r.random_range(5.0..100.0);
        let path = PathParams {
            gain: Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU)),
            angle: grid[u],
            distance: r_true,
            visibility: vec![true; 4],
        };
        let channel = synthesize_channel(&geom, &layout, &[path]).unwrap();
        let pilot = PilotConfig::new(16, 4, f64::INFINITY).unwrap();
        let combiner = generate_combiner(&mut r, &geom, &pilot);
        let y = observe(&channel, &combiner, &pilot, &mut r).unwrap().y;
        let cfg = AssblConfig::default();
        let out = assbl_estimate(&y, &combiner, &geom, &layout, &cfg).unwrap();
        let r_hat = out.dictionary.distance(u);
        if (r_hat - r_true).abs() < (cfg.init_distance - r_true).abs() {
            closer += 1;
        } else {
            lines.push(format!("seed {seed}: r={r_true:.1} r̂={r_hat:.1}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        grad_err <= 1e-4 && violations == 0 && accepted > 0 && q_mismatch <= 1e-9 && closer >= 18 && secs < 60.0,
        format!(
            "gradient rel err {grad_err:.1e}, {accepted} accepted steps with {violations} increases (incremental Q dev {q_mismatch:.1e}), distance closer in {closer}/20{}, {secs:.1} s",
            if lines.is_empty() { String::new() } else { format!(" [{}]", lines.join("; ")) }
        ),
    )
}

/// Noiseless on-grid recovery and zero observation.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let geom = ArrayGeometry::new(64, 100e9).unwrap();
    let layout = SubArrayLayout::new(64, 4).unwrap();
    let grid = angle_grid(64);
    let cfg = AssblConfig::default();
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..5u64 {
        let mut r = rng(500 + seed);
        let path = PathParams {
            gain: Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU)),
            angle: grid[r.random_range(0..64)],
            distance: r.random_range(5.0..100.0),
            visibility: vec![true; 4],
        };
        let channel = synthesize_channel(&geom, &layout, &[path]).unwrap();
        let pilot = PilotConfig::new(16, 4, f64::INFINITY).unwrap();
        let combiner = generate_combiner(&mut r, &geom, &pilot);
        let y = observe(&channel, &combiner, &pilot, &mut r).unwrap().y;
        let out = assbl_estimate(&y, &combiner, &geom, &layout, &cfg).unwrap();
        worst = worst.max(nmse(&channel.h, &out.h_hat).unwrap().db);
    }
    let pilot = PilotConfig::new(16, 4, f64::INFINITY).unwrap();
    let combiner = generate_combiner(&mut rng(599), &geom, &pilot);
    let zero = CVector::zeros(pilot.n_measurements());
    let out = assbl_estimate(&zero, &combiner, &geom, &layout, &cfg).unwrap();
    let h_norm = out.h_hat.norm();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= -30.0 && h_norm <= 1e-6 * 8.0 && secs < 30.0,
        format!("worst noiseless NMSE {worst:.1} dB over 5 seeds, ‖ĥ‖ from y=0 {h_norm:.1e}, {secs:.1} s"),
    )
}

fn desk_sweep(axis: SweepAxis, dir: &Path) -> SweepConfig {
    let mut cfg = SweepConfig::profile(Profile::Desk);
    cfg.output_dir = dir.to_path_buf();
    if axis == SweepAxis::Pilot {
        cfg.snr_db = 15.0;
    }
    cfg
}

fn mean_db(out: &harness::SweepOutput, est: &str, snr_db: f64, t_p: usize) -> f64 {
    out.row(est, harness::AxisPoint { snr_db, t_p })
        .map_or(f64::NAN, |r| r.mean_nmse_db)
}

/// Ordering against SNR at desk scale.
fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_sweep(SweepAxis::Snr, dir.path());
    let out = sweep(&cfg, SweepAxis::Snr, SweepOptions { serial: true, progress: false }).unwrap();
    let mut ok = out.records.iter().all(|r| !r.failed());
    let mut cells = Vec::new();
    let mut prev = f64::INFINITY;
    for &snr in &cfg.snr_grid {
        let (a, p, o) = (
            mean_db(&out, "assbl", snr, cfg.t_p),
            mean_db(&out, "polar_omp", snr, cfg.t_p),
            mean_db(&out, "oracle_ls", snr, cfg.t_p),
        );
        if snr >= 10.0 {
            ok &= o <= a && a <= p;
        }
        ok &= a <= prev - 0.5;
        prev = a;
        cells.push(format!("{snr} dB: oracle {o:.1} / assbl {a:.1} / omp {p:.1}"));
    }
    outcome(ok, format!("{}; {:.0} s", cells.join(", "), out.elapsed_s))
}

/// Trend against pilot length at desk scale.
fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = desk_sweep(SweepAxis::Pilot, dir.path());
    let out = sweep(&cfg, SweepAxis::Pilot, SweepOptions { serial: true, progress: false }).unwrap();
    let curve: Vec<f64> = cfg
        .pilot_grid
        .iter()
        .map(|&t| mean_db(&out, "assbl", cfg.snr_db, t))
        .collect();
    let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
    let gain = curve[0] - curve[curve.len() - 1];
    let ok = out.records.iter().all(|r| !r.failed()) && monotone && gain >= 3.0;
    let cells: Vec<String> = cfg
        .pilot_grid
        .iter()
        .zip(&curve)
        .map(|(t, v)| format!("T_p={t}: {v:.1}"))
        .collect();
    outcome(ok, format!("assbl {} dB, improvement {gain:.1} dB; {:.0} s", cells.join(", "), out.elapsed_s))
}

/// Byte-identical serial sweeps through the binary.
fn criterion_8() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str| -> std::result::Result<Vec<u8>, String> {
        let out = root.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_xlmimo"))
            .args(["sweep-snr", "--serial", "--quiet", "--trials", "4", "--seed", "2024", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(out.join(harness::TRIALS_CSV)).map_err(|e| e.to_string())
    };
    match (run("a"), run("b")) {
        (Ok(a), Ok(b)) => outcome(
            a == b && !a.is_empty(),
            format!("trials.csv {} bytes, identical: {}", a.len(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("sweep failed: {e}")),
    }
}

/// Full-scale smoke run.
fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::profile(Profile::Full);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.n_trials = 5;
    cfg.snr_grid = vec![15.0];
    cfg.t_p = 32;
    let out = sweep(&cfg, SweepAxis::Snr, SweepOptions { serial: true, progress: false }).unwrap();
    let failed = out.records.iter().filter(|r| r.failed()).count();
    let trace_rows = std::fs::read_to_string(dir.path().join(harness::TRACE_CSV))
        .map(|t| t.lines().count().saturating_sub(1))
        .unwrap_or(0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(harness::MANIFEST)).unwrap()).unwrap();
    let elapsed = manifest["elapsed_seconds"].as_f64();
    outcome(
        failed == 0 && trace_rows > 0 && elapsed.is_some(),
        format!(
            "{} records, {failed} failed, {trace_rows} trace rows, assbl {:.1} dB, manifest runtime {:.1} s",
            out.records.len(),
            mean_db(&out, "assbl", 15.0, 32),
            elapsed.unwrap_or(f64::NAN)
        ),
    )
}

fn main() -> ExitCode {
    // Under a name filter that is not ours, stay out of the way.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("steering and geometry", criterion_1),
        ("E-step forms", criterion_2),
        ("M-step updates", criterion_3),
        ("dictionary refinement", criterion_4),
        ("end-to-end sanity", criterion_5),
        ("NMSE ordering against SNR", criterion_6),
        ("NMSE trend against pilot length", criterion_7),
        ("serial determinism", criterion_8),
        ("full-scale smoke run", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let res = run();
        println!(
            "criterion {id} [{}] {name}: {}",
            if res.passed { "PASS" } else { "FAIL" },
            res.detail
        );
        if !res.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

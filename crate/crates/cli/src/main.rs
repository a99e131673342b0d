use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use xlmimo_core::assbl::assbl_estimate;
use xlmimo_core::harness::{
    sweep, AxisPoint, EstimatorConfig, PreparedEstimator, Profile, SweepAxis, SweepConfig,
    SweepOptions, TrialInstance,
};
use xlmimo_core::{nmse, selftest};

#[derive(Parser)]
#[command(name = "xlmimo", version, about = "Near-field XL-MIMO channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE against SNR at a fixed pilot length.
    SweepSnr(SweepArgs),
    /// NMSE against pilot length at a fixed SNR.
    SweepPilot(SweepArgs),
    /// One paired trial; prints NMSE and ASSBL diagnostics.
    Estimate(EstimateArgs),
    /// Quick numerical property checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base parameter set.
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// SNR in dB; a comma-separated grid for `sweep-snr`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Option<Vec<f64>>,
    /// Pilot slots; a comma-separated grid for `sweep-pilot`.
    #[arg(long, value_delimiter = ',')]
    tp: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single-threaded, byte-reproducible `trials.csv`.
    #[arg(long)]
    serial: bool,
    /// No per-point progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: Common,
    /// Trial index fed to the seed derivation.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Write ASSBL per-iteration diagnostics to this CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: xlmimo_core::Error| e.to_string())
}

fn single<T: Copy>(values: &[T], flag: &str) -> Result<T> {
    match values {
        [v] => Ok(*v),
        _ => bail!("--{flag} takes a single value here"),
    }
}

fn load(common: &Common) -> Result<SweepConfig> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = SweepConfig::from_toml_with(&text, common.profile)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn run_sweep(args: SweepArgs, axis: SweepAxis) -> Result<()> {
    let mut cfg = load(&args.common)?;
    match axis {
        SweepAxis::Snr => {
            if let Some(snr) = &args.common.snr {
                cfg.snr_grid = snr.clone();
            }
            if let Some(tp) = &args.common.tp {
                cfg.t_p = single(tp, "tp")?;
            }
        }
        SweepAxis::Pilot => {
            if let Some(snr) = &args.common.snr {
                cfg.snr_db = single(snr, "snr")?;
            }
            if let Some(tp) = &args.common.tp {
                cfg.pilot_grid = tp.clone();
            }
        }
    }
    if let Some(n) = args.trials {
        cfg.n_trials = n;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    let opts = SweepOptions {
        serial: args.serial,
        progress: !args.quiet,
    };
    let out = sweep(&cfg, axis, opts)?;
    println!("{:<10} {:>8} {:>5} {:>7} {:>12} {:>12}", "estimator", "snr_db", "t_p", "failed", "mean_dB", "median_dB");
    for row in &out.summary {
        println!(
            "{:<10} {:>8} {:>5} {:>7} {:>12.2} {:>12.2}",
            row.estimator, row.snr_db, row.t_p, row.n_failed, row.mean_nmse_db, row.median_nmse_db
        );
    }
    println!("wrote {} ({:.1} s)", out.output_dir.display(), out.elapsed_s);
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let mut cfg = load(&args.common)?;
    if let Some(snr) = &args.common.snr {
        cfg.snr_db = single(snr, "snr")?;
    }
    if let Some(tp) = &args.common.tp {
        cfg.t_p = single(tp, "tp")?;
    }
    let axis = AxisPoint {
        snr_db: cfg.snr_db,
        t_p: cfg.t_p,
    };
    let inst = TrialInstance::generate(&cfg, args.trial, axis)?;
    println!(
        "N={} G={} L={} T_p={} N_RF={} SNR={} dB seed={} trial={}",
        cfg.scenario.n_antennas,
        cfg.scenario.n_subarrays,
        cfg.scenario.n_paths,
        axis.t_p,
        cfg.n_rf,
        axis.snr_db,
        cfg.master_seed,
        args.trial
    );
    for (l, p) in inst.channel.paths.iter().enumerate() {
        let vis: String = p.visibility.iter().map(|&v| if v { '1' } else { '0' }).collect();
        println!("path {l}: theta={:+.4} r={:.2} m |gain|={:.3} visibility={vis}", p.angle, p.distance, p.gain.norm());
    }
    for est in &cfg.estimators {
        if let EstimatorConfig::Assbl(c) = est {
            let c = xlmimo_core::AssblConfig {
                trace_path: args.trace.clone(),
                ..c.clone()
            };
            let start = Instant::now();
            let out = assbl_estimate(&inst.observation.y, &inst.combiner, &inst.geom, &inst.layout, &c)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let score = nmse(&inst.channel.h, &out.h_hat)?;
            println!("{:<10} NMSE {:>8.2} dB  iters {:>4}  {:.1} ms", "assbl", score.db, out.iterations, ms);
            print_assbl(&out);
            continue;
        }
        let prepared = PreparedEstimator::prepare(est, &cfg)?;
        let rec = prepared.run(&inst, &cfg);
        match &rec.error {
            Some(e) => println!("{:<10} failed: {e}", rec.estimator),
            None => println!(
                "{:<10} NMSE {:>8.2} dB  iters {:>4}  {:.1} ms",
                rec.estimator, rec.nmse_db, rec.iters, rec.wall_ms
            ),
        }
    }
    Ok(())
}

fn print_assbl(out: &xlmimo_core::AssblOutput) {
    println!(
        "  converged={} active_blocks={} sigma={:.4e}",
        out.converged,
        out.active_blocks.len(),
        out.state.sigma
    );
    let g = out.dictionary.n_subarrays();
    let mut strongest: Vec<(usize, f64)> = (0..out.dictionary.n_angles())
        .map(|u| (u, out.mu.rows(u * g, g).norm()))
        .collect();
    strongest.sort_by(|a, b| b.1.total_cmp(&a.1));
    for &(u, norm) in strongest.iter().take(4) {
        println!(
            "  block {u:>3}: theta={:+.4} r={:.2} m ‖mu‖={norm:.3}",
            out.dictionary.angle(u),
            out.dictionary.distance(u)
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SweepSnr(args) => run_sweep(args, SweepAxis::Snr),
        Command::SweepPilot(args) => run_sweep(args, SweepAxis::Pilot),
        Command::Estimate(args) => run_estimate(args),
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(anyhow::anyhow!("self-test failed"))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use super::config::SweepConfig;
use super::metrics::{mean_nmse, to_db};
use super::trial::{run_prepared, AxisPoint, PreparedEstimator, TrialRecord};
use crate::assbl::IterationRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Snr,
    Pilot,
}

impl SweepAxis {
    pub fn points(&self, cfg: &SweepConfig) -> Vec<AxisPoint> {
        match self {
            SweepAxis::Snr => cfg
                .snr_grid
                .iter()
                .map(|&snr_db| AxisPoint { snr_db, t_p: cfg.t_p })
                .collect(),
            SweepAxis::Pilot => cfg
                .pilot_grid
                .iter()
                .map(|&t_p| AxisPoint { snr_db: cfg.snr_db, t_p })
                .collect(),
        }
    }

    fn column(&self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr_db",
            SweepAxis::Pilot => "t_p",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Single-threaded, with `wall_ms` written as 0 in `trials.csv` so the
    /// file is byte-reproducible. Timings then go to `timings.csv` only.
    pub serial: bool,
    /// Print one line per finished axis point to stderr.
    pub progress: bool,
}

/// One row of `summary.csv`; statistics ignore failed trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub estimator: String,
    pub snr_db: f64,
    pub t_p: usize,
    pub n_trials: usize,
    pub n_failed: usize,
    pub mean_nmse_linear: f64,
    pub mean_nmse_db: f64,
    pub median_nmse_db: f64,
    pub p10_nmse_db: f64,
    pub p90_nmse_db: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub axis: SweepAxis,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub elapsed_s: f64,
    pub output_dir: PathBuf,
}

impl SweepOutput {
    pub fn row(&self, estimator: &str, point: AxisPoint) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.estimator == estimator && r.snr_db == point.snr_db && r.t_p == point.t_p)
    }
}

#[derive(Serialize)]
struct TraceRow {
    trial_id: u64,
    snr_db: f64,
    t_p: usize,
    iter: usize,
    q: f64,
    sigma: f64,
    active_blocks: usize,
    delta_alpha: f64,
    accepted_steps: usize,
}

impl TraceRow {
    fn new(r: &TrialRecord, it: &IterationRecord) -> Self {
        Self {
            trial_id: r.trial_id,
            snr_db: r.snr_db,
            t_p: r.t_p,
            iter: it.iter,
            q: it.q,
            sigma: it.sigma,
            active_blocks: it.active_blocks,
            delta_alpha: it.delta_alpha,
            accepted_steps: it.accepted_steps,
        }
    }
}

#[derive(Serialize)]
struct TimingRow<'a> {
    trial_id: u64,
    estimator: &'a str,
    snr_db: f64,
    t_p: usize,
    wall_ms: f64,
}

pub const TRIALS_CSV: &str = "trials.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const TRACE_CSV: &str = "assbl_trace.csv";
pub const PLOT_SCRIPT: &str = "plot_nmse.py";
pub const MANIFEST: &str = "manifest.json";

/// Runs every `(axis point, trial)` pair and writes the output files.
///
/// The output directory is created and probed for writability before any
/// trial runs. Records are ordered by axis point, then trial, then estimator,
/// regardless of execution order.
pub fn sweep(cfg: &SweepConfig, axis: SweepAxis, opts: SweepOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    ensure_writable(&dir)?;
    let prepared = PreparedEstimator::prepare_all(cfg)?;
    let points = axis.points(cfg);
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let start = Instant::now();

    let mut records = Vec::with_capacity(points.len() * cfg.n_trials * prepared.len());
    for point in &points {
        let ids: Vec<u64> = (0..cfg.n_trials as u64).collect();
        let run = |&id: &u64| run_prepared(cfg, &prepared, id, *point);
        let batches: Vec<Result<Vec<TrialRecord>>> = if opts.serial {
            ids.iter().map(run).collect()
        } else {
            ids.par_iter().map(run).collect()
        };
        for batch in batches {
            records.extend(batch?);
        }
        if opts.progress {
            eprintln!(
                "{}={} done ({} trials, {:.1} s elapsed)",
                axis.column(),
                match axis {
                    SweepAxis::Snr => point.snr_db.to_string(),
                    SweepAxis::Pilot => point.t_p.to_string(),
                },
                cfg.n_trials,
                start.elapsed().as_secs_f64()
            );
        }
    }
    let elapsed_s = start.elapsed().as_secs_f64();
    let summary = summarize(&records, &points, &prepared);

    write_csv(&dir.join(TIMINGS_CSV), records.iter().map(|r| TimingRow {
        trial_id: r.trial_id,
        estimator: &r.estimator,
        snr_db: r.snr_db,
        t_p: r.t_p,
        wall_ms: r.wall_ms,
    }))?;
    write_csv(&dir.join(TRIALS_CSV), records.iter().map(|r| TrialRecord {
        wall_ms: if opts.serial { 0.0 } else { r.wall_ms },
        trace: Vec::new(),
        ..r.clone()
    }))?;
    write_csv(&dir.join(SUMMARY_CSV), summary.iter())?;
    if cfg.write_traces {
        write_csv(
            &dir.join(TRACE_CSV),
            records
                .iter()
                .flat_map(|r| r.trace.iter().map(move |it| TraceRow::new(r, it))),
        )?;
    }
    write_file(&dir.join(PLOT_SCRIPT), &plot_script(axis))?;

    let failures: Vec<String> = records
        .iter()
        .filter_map(|r| {
            r.error.as_ref().map(|e| {
                format!("trial {} {} at snr {} t_p {}: {e}", r.trial_id, r.estimator, r.snr_db, r.t_p)
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "tool": "xlmimo",
        "version": env!("CARGO_PKG_VERSION"),
        "axis": axis,
        "serial": opts.serial,
        "threads": if opts.serial { 1 } else { rayon::current_num_threads() },
        "started_unix": started_unix,
        "elapsed_seconds": elapsed_s,
        "n_records": records.len(),
        "n_failed": failures.len(),
        "failures": failures,
        "files": [TRIALS_CSV, SUMMARY_CSV, TIMINGS_CSV, PLOT_SCRIPT],
        "config": cfg,
    });
    write_file(&dir.join(MANIFEST), &serde_json::to_string_pretty(&manifest)?)?;

    Ok(SweepOutput {
        axis,
        records,
        summary,
        elapsed_s,
        output_dir: dir,
    })
}

/// Per `(axis point, estimator)` statistics in sweep order.
pub fn summarize(records: &[TrialRecord], points: &[AxisPoint], prepared: &[PreparedEstimator]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for point in points {
        for est in prepared {
            let rows: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.estimator == est.name() && r.snr_db == point.snr_db && r.t_p == point.t_p)
                .collect();
            let ok: Vec<f64> = rows.iter().filter(|r| !r.failed()).map(|r| r.nmse_linear).collect();
            let mut db: Vec<f64> = ok.iter().map(|&v| to_db(v)).collect();
            db.sort_by(f64::total_cmp);
            let mean = mean_nmse(&ok);
            out.push(SummaryRow {
                estimator: est.name().to_string(),
                snr_db: point.snr_db,
                t_p: point.t_p,
                n_trials: rows.len(),
                n_failed: rows.len() - ok.len(),
                mean_nmse_linear: mean.map_or(f64::NAN, |m| m.linear),
                mean_nmse_db: mean.map_or(f64::NAN, |m| m.db),
                median_nmse_db: quantile(&db, 0.5),
                p10_nmse_db: quantile(&db, 0.1),
                p90_nmse_db: quantile(&db, 0.9),
            });
        }
    }
    out
}

/// Linear-interpolated quantile of ascending `sorted`; NaN when empty.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn plot_script(axis: SweepAxis) -> String {
    let (x, label) = match axis {
        SweepAxis::Snr => ("snr_db", "SNR (dB)"),
        SweepAxis::Pilot => ("t_p", "pilot length T_p"),
    };
    format!(
        r#"#!/usr/bin/env python3
"""Plot mean NMSE per estimator from summary.csv (written by xlmimo)."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "summary.csv")
curves = {{}}
with open(src, newline="") as f:
    for row in csv.DictReader(f):
        curves.setdefault(row["estimator"], []).append(
            (float(row["{x}"]), float(row["mean_nmse_db"]))
        )

fig, ax = plt.subplots(figsize=(6, 4))
for name, pts in curves.items():
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
ax.set_xlabel("{label}")
ax.set_ylabel("NMSE (dB)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
out = os.path.join(os.path.dirname(os.path.abspath(src)), "nmse_vs_{x}.png")
fig.savefig(out, dpi=150)
print(out)
"#
    )
}

//! Deterministic artifact emission: the canonical CSV, a gnuplot script
//! rendering it as a heatmap, and a JSON run manifest. CSV bytes depend
//! only on the [`SweepSpec`], never on thread count or wall clock.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;

use qslt_core::sweep::{CellRecord, SweepGrid, SweepSpec};

pub const CSV_HEADER: &str = "topology,lambda,tau,gamma0,J,ratio,tau_qsl,tight_norm,flags";

pub const CSV_NAME: &str = "sweep.csv";
pub const PLOT_NAME: &str = "plot.gp";
pub const MANIFEST_NAME: &str = "manifest.json";

/// Semicolon-joined diagnostic tokens for one cell; empty when clean.
pub fn flag_tokens(record: &CellRecord) -> String {
    let mut tokens: Vec<String> = Vec::new();
    if record.flags.degenerate_roots {
        tokens.push("degenerate-roots".into());
    }
    if record.flags.oracle_fallback {
        tokens.push("oracle-fallback".into());
    }
    if let Some(dev) = record.flags.oracle_deviation {
        tokens.push(format!("odev={dev:e}"));
    }
    if let Some(q) = &record.qslt {
        if q.zero_dynamics {
            tokens.push("zero-dynamics".into());
        }
    }
    if let Some(msg) = &record.failure {
        // The field separator and newlines must never leak into the CSV.
        tokens.push(format!("failed:{}", msg.replace([',', '\n', '\r'], " ")));
    }
    tokens.join(";")
}

/// Renders the grid as CSV, one row per cell in γ₀-major order. Values
/// use shortest round-trip scientific notation; failed cells carry `nan`
/// numeric fields and a `failed:` token in the flags column.
pub fn csv_string(grid: &SweepGrid) -> String {
    let mut out = String::with_capacity(64 + grid.cells.len() * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in &grid.cells {
        let (ratio, tau_qsl, tight) = match &record.qslt {
            Some(q) => (
                format!("{:e}", q.ratio),
                format!("{:e}", q.tau_qsl),
                q.tight_norm.token(),
            ),
            None => ("nan".to_string(), "nan".to_string(), "-"),
        };
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{},{},{},{}",
            grid.topology.token(),
            grid.lambda,
            grid.tau,
            record.gamma0,
            record.hopping,
            ratio,
            tau_qsl,
            tight,
            flag_tokens(record),
        )
        .expect("writing to String cannot fail");
    }
    out
}

/// Gnuplot script rendering the CSV as a (J, γ₀) heatmap of the ratio.
pub fn plot_script(grid: &SweepGrid) -> String {
    format!(
        "\
# Heatmap of the speed-limit ratio over the (gamma0, J) grid.
# Usage: gnuplot plot.gp   (expects {csv} in the working directory)
set datafile separator ','
set terminal pngcairo size 900,720
set output 'sweep.png'
set title '{topology}: tau_qsl / tau at lambda = {lambda}, tau = {tau}'
set xlabel 'J'
set ylabel 'gamma0'
set cblabel 'tau_qsl / tau'
set cbrange [0:1]
set view map
plot '{csv}' every ::1 using 5:4:6 with image notitle
",
        csv = CSV_NAME,
        topology = grid.topology.token(),
        lambda = grid.lambda,
        tau = grid.tau,
    )
}

/// Run manifest: input-parameter echo, grid accounting, runtime. Timings
/// vary between runs by design; the CSV is the deterministic artifact.
pub fn manifest(
    spec: &SweepSpec,
    grid: &SweepGrid,
    elapsed: Duration,
    threads: usize,
) -> serde_json::Value {
    json!({
        "package": {
            "name": "qslt",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "spec": {
            "topology": spec.topology.token(),
            "gamma0": { "min": spec.gamma0.min, "max": spec.gamma0.max, "steps": spec.gamma0.steps },
            "J": { "min": spec.hopping.min, "max": spec.hopping.max, "steps": spec.hopping.steps },
            "lambda": spec.lambda,
            "tau": spec.tau,
            "time_samples": spec.time_samples,
            "oracle": spec.oracle.token(),
            "safety_cap": spec.safety_cap,
        },
        "grid": {
            "cells": grid.cells.len(),
            "failed": grid.failed,
            "failed_fraction": grid.failed_fraction(),
        },
        "runtime": {
            "requested_threads": threads,
            "elapsed_ms": elapsed.as_millis() as u64,
        },
    })
}

/// Paths written by [`emit_outputs`].
#[derive(Debug, Clone)]
pub struct EmittedPaths {
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub manifest: PathBuf,
}

/// Writes CSV, plot script, and manifest into `out_dir`, creating it.
pub fn emit_outputs(
    spec: &SweepSpec,
    grid: &SweepGrid,
    out_dir: &Path,
    elapsed: Duration,
    threads: usize,
) -> Result<EmittedPaths> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let paths = EmittedPaths {
        csv: out_dir.join(CSV_NAME),
        plot: out_dir.join(PLOT_NAME),
        manifest: out_dir.join(MANIFEST_NAME),
    };
    std::fs::write(&paths.csv, csv_string(grid))
        .with_context(|| format!("writing {}", paths.csv.display()))?;
    std::fs::write(&paths.plot, plot_script(grid))
        .with_context(|| format!("writing {}", paths.plot.display()))?;
    let manifest_text = format!(
        "{}\n",
        serde_json::to_string_pretty(&manifest(spec, grid, elapsed, threads))?
    );
    std::fs::write(&paths.manifest, manifest_text)
        .with_context(|| format!("writing {}", paths.manifest.display()))?;
    Ok(paths)
}

/// JSON payload for a single-point evaluation.
pub fn point_json(spec: &SweepSpec, record: &CellRecord) -> serde_json::Value {
    let mut value = json!({
        "topology": spec.topology.token(),
        "lambda": spec.lambda,
        "tau": spec.tau,
        "gamma0": record.gamma0,
        "J": record.hopping,
    });
    if let Some(q) = &record.qslt {
        value["result"] = json!({
            "bures_angle": q.bures_angle,
            "rate_op": q.rate_op,
            "rate_hs": q.rate_hs,
            "rate_tr": q.rate_tr,
            "tau_qsl": q.tau_qsl,
            "ratio": q.ratio,
            "tight_norm": q.tight_norm.token(),
            "zero_dynamics": q.zero_dynamics,
        });
    }
    if !record.flags.is_empty() {
        value["flags"] = json!({
            "degenerate_roots": record.flags.degenerate_roots,
            "oracle_fallback": record.flags.oracle_fallback,
            "oracle_deviation": record.flags.oracle_deviation,
        });
    }
    if let Some(msg) = &record.failure {
        value["failure"] = json!(msg);
    }
    value
}

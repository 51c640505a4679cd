//! Run configuration assembled from three layers, later layers winning:
//! built-in defaults, an INI-style `key = value` file, command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use qslt_core::sweep::{AxisRange, OracleMode, SweepSpec};
use qslt_core::Topology;

/// Axis argument in `min:max:steps` form.
#[derive(Debug, Clone, Copy)]
pub struct RangeArg(pub AxisRange);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected min:max:steps, got {s:?}"));
        }
        let min: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad min in {s:?}: {e}"))?;
        let max: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| format!("bad max in {s:?}: {e}"))?;
        let steps: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("bad steps in {s:?}: {e}"))?;
        Ok(RangeArg(AxisRange::new(min, max, steps)))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file with `key = value` lines (# starts a comment).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Bath wiring: id | common | sys.
    #[arg(long)]
    pub topology: Option<String>,
    /// Spectral width of the Lorentzian bath.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Evolution horizon the bound is evaluated against.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Samples per trajectory (controls quadrature resolution).
    #[arg(long)]
    pub time_samples: Option<usize>,
    /// Per-cell cross-check: off | kernel | discrete.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Largest coupling accepted without an explicit override.
    #[arg(long)]
    pub safety_cap: Option<f64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Flags for grid-shaped runs (`sweep`, `verify`).
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Coupling-strength axis.
    #[arg(long, value_name = "MIN:MAX:STEPS")]
    pub gamma0: Option<RangeArg>,
    /// Hopping axis.
    #[arg(long = "J", value_name = "MIN:MAX:STEPS")]
    pub hopping: Option<RangeArg>,
    /// Output directory for CSV, plot script, and manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Flags for a single-point evaluation.
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bath coupling strength at the point.
    #[arg(long)]
    pub gamma0: f64,
    /// Hopping rate at the point.
    #[arg(long = "J")]
    pub hopping: f64,
}

/// Everything a grid run needs after the layers are merged.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: SweepSpec,
    pub out: PathBuf,
    /// Requested pool size; 0 means one thread per core.
    pub threads: usize,
}

/// Values read from a config file; every field optional.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub topology: Option<Topology>,
    pub gamma0: Option<AxisRange>,
    pub hopping: Option<AxisRange>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub time_samples: Option<usize>,
    pub oracle: Option<OracleMode>,
    pub safety_cap: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse_topology(token: &str) -> Result<Topology> {
    Topology::from_token(token)
        .ok_or_else(|| anyhow!("unknown topology {token:?} (expected id, common, or sys)"))
}

fn parse_oracle(token: &str) -> Result<OracleMode> {
    OracleMode::from_token(token)
        .ok_or_else(|| anyhow!("unknown oracle mode {token:?} (expected off, kernel, or discrete)"))
}

/// Parses INI-style text: `key = value` lines, `#` comments, blank lines.
/// Unknown keys are errors so typos cannot silently fall back to defaults.
pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected key = value, got {raw:?}"))?;
        let key = key.trim();
        let value = value.trim();
        let range = || -> Result<AxisRange> {
            value
                .parse::<RangeArg>()
                .map(|r| r.0)
                .map_err(|e| anyhow!("line {lineno}: {e}"))
        };
        match key {
            "topology" => cfg.topology = Some(parse_topology(value)?),
            "gamma0" => cfg.gamma0 = Some(range()?),
            "J" => cfg.hopping = Some(range()?),
            "lambda" => {
                cfg.lambda = Some(value.parse().with_context(|| format!("line {lineno}: lambda"))?)
            }
            "tau" => cfg.tau = Some(value.parse().with_context(|| format!("line {lineno}: tau"))?),
            "time_samples" => {
                cfg.time_samples = Some(
                    value
                        .parse()
                        .with_context(|| format!("line {lineno}: time_samples"))?,
                )
            }
            "oracle" => cfg.oracle = Some(parse_oracle(value)?),
            "safety_cap" => {
                cfg.safety_cap = Some(
                    value
                        .parse()
                        .with_context(|| format!("line {lineno}: safety_cap"))?,
                )
            }
            "threads" => {
                cfg.threads = Some(
                    value
                        .parse()
                        .with_context(|| format!("line {lineno}: threads"))?,
                )
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => bail!("line {lineno}: unknown key {key:?}"),
        }
    }
    Ok(cfg)
}

fn load_file(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            parse_config(&text).with_context(|| format!("parsing config {}", p.display()))
        }
        None => Ok(FileConfig::default()),
    }
}

fn apply_common(spec: &mut SweepSpec, file: &FileConfig, args: &CommonArgs) -> Result<usize> {
    if let Some(t) = file.topology {
        spec.topology = t;
    }
    if let Some(v) = file.lambda {
        spec.lambda = v;
    }
    if let Some(v) = file.tau {
        spec.tau = v;
    }
    if let Some(v) = file.time_samples {
        spec.time_samples = v;
    }
    if let Some(v) = file.oracle {
        spec.oracle = v;
    }
    if let Some(v) = file.safety_cap {
        spec.safety_cap = v;
    }

    if let Some(tok) = &args.topology {
        spec.topology = parse_topology(tok)?;
    }
    if let Some(v) = args.lambda {
        spec.lambda = v;
    }
    if let Some(v) = args.tau {
        spec.tau = v;
    }
    if let Some(v) = args.time_samples {
        spec.time_samples = v;
    }
    if let Some(tok) = &args.oracle {
        spec.oracle = parse_oracle(tok)?;
    }
    if let Some(v) = args.safety_cap {
        spec.safety_cap = v;
    }
    Ok(args.threads.or(file.threads).unwrap_or(0))
}

/// Merges the three layers into a grid run configuration.
pub fn resolve_grid(args: &GridArgs) -> Result<RunConfig> {
    let file = load_file(args.common.config.as_ref())?;
    let mut spec = SweepSpec::default();
    let threads = apply_common(&mut spec, &file, &args.common)?;
    if let Some(r) = file.gamma0 {
        spec.gamma0 = r;
    }
    if let Some(r) = file.hopping {
        spec.hopping = r;
    }
    if let Some(r) = args.gamma0 {
        spec.gamma0 = r.0;
    }
    if let Some(r) = args.hopping {
        spec.hopping = r.0;
    }
    let out = args
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(RunConfig { spec, out, threads })
}

/// Merges the layers for a single-point evaluation. The returned spec
/// keeps default axes; only the scalar point is evaluated.
pub fn resolve_point(args: &PointArgs) -> Result<(SweepSpec, f64, f64, usize)> {
    let file = load_file(args.common.config.as_ref())?;
    let mut spec = SweepSpec::default();
    let threads = apply_common(&mut spec, &file, &args.common)?;
    let (gamma0, hopping) = (args.gamma0, args.hopping);
    if !gamma0.is_finite() || gamma0 < 0.0 {
        bail!("gamma0 must be finite and nonnegative, got {gamma0}");
    }
    if !hopping.is_finite() || hopping < 0.0 {
        bail!("J must be finite and nonnegative, got {hopping}");
    }
    let cap = spec.safety_cap;
    if gamma0.max(hopping) > cap {
        bail!("coupling {} exceeds the safety cap {cap}", gamma0.max(hopping));
    }
    Ok((spec, gamma0, hopping, threads))
}

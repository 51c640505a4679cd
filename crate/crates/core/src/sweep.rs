//! Parameter sweeps over (γ₀, J) grids and the self-check suite that
//! compares the closed-form dynamics against the reference integrators.
//!
//! Cells are independent and evaluated in parallel; results are collected
//! in a fixed γ₀-major order so the output is bit-identical regardless of
//! thread count. Per-cell failures are isolated into flagged records and
//! never abort the grid.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{
    amplitude_common, amplitude_common_cos_variant, sample_trajectory, AnalyticError,
};
use crate::engine::{qslt, EngineError, QsltResult};
use crate::model::{
    uniform_grid, AmplitudeTrajectory, ModelConfig, ModelError, SpectralParams, Topology,
};
use crate::ode::OdeOptions;
use crate::oracle::{
    integrate_discrete_bath, integrate_kernel, oracle_ode_options, DiscreteBath, OracleError,
};

/// Sup-norm tolerance for closed-form vs kernel amplitudes in [`verify`].
pub const AMP_VERIFY_TOL: f64 = 1e-7;

/// Tolerance for the speed-limit ratio in [`verify`].
pub const RATIO_VERIFY_TOL: f64 = 1e-6;

/// Sup-norm tolerance against the discrete-bath reference, which is
/// limited by window truncation rather than integration accuracy.
pub const DISCRETE_VERIFY_TOL: f64 = 1e-3;

/// Deviation the discarded trigonometric reading of the common-bath
/// closed form must exceed for the check to be conclusive.
pub const ALTERNATE_READING_MIN_DEV: f64 = 1e-2;

/// Largest coupling magnitude accepted without an explicit cap override.
pub const DEFAULT_SAFETY_CAP: f64 = 20.0;

/// Default number of time samples per trajectory (power of two plus one,
/// so the quadrature's half-resolution pass reuses the same endpoints).
pub const DEFAULT_TIME_SAMPLES: usize = 2049;

/// Default mode count for discrete-bath cross-checks.
pub const DEFAULT_DISCRETE_MODES: usize = 1024;

/// Fewest time samples a sweep may request; below this the quadrature
/// error estimate is meaningless.
pub const MIN_TIME_SAMPLES: usize = 33;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("cell ({topology}, gamma0 = {gamma0}, J = {hopping}) failed: {message}")]
    CellFailure {
        topology: Topology,
        gamma0: f64,
        hopping: f64,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

type Result<T, E = SweepError> = std::result::Result<T, E>;

/// Inclusive linear range `[min, max]` sampled at `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    /// Evenly spaced values with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let denom = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * (i as f64) / denom
                }
            })
            .collect()
    }
}

/// Which reference integrator, if any, every cell is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    Off,
    Kernel,
    Discrete,
}

impl OracleMode {
    pub fn token(&self) -> &'static str {
        match self {
            OracleMode::Off => "off",
            OracleMode::Kernel => "kernel",
            OracleMode::Discrete => "discrete",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "off" => Some(OracleMode::Off),
            "kernel" => Some(OracleMode::Kernel),
            "discrete" => Some(OracleMode::Discrete),
            _ => None,
        }
    }
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// Full description of one sweep: topology, axes, fixed parameters, and
/// the cross-check mode.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub topology: Topology,
    pub gamma0: AxisRange,
    pub hopping: AxisRange,
    pub lambda: f64,
    pub tau: f64,
    pub time_samples: usize,
    pub oracle: OracleMode,
    pub safety_cap: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            topology: Topology::IndependentBaths,
            gamma0: AxisRange::new(0.1, 10.0, 50),
            hopping: AxisRange::new(0.0, 10.0, 50),
            lambda: 2.0,
            tau: 3.0,
            time_samples: DEFAULT_TIME_SAMPLES,
            oracle: OracleMode::Off,
            safety_cap: DEFAULT_SAFETY_CAP,
        }
    }
}

impl SweepSpec {
    pub fn with_topology(topology: Topology) -> Self {
        Self {
            topology,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axis = |name: &str, r: &AxisRange| -> Result<()> {
            if !r.min.is_finite() || !r.max.is_finite() || r.min < 0.0 {
                return Err(SweepError::InvalidSpec(format!(
                    "{name} range must be finite and nonnegative, got [{}, {}]",
                    r.min, r.max
                )));
            }
            if r.steps < 2 {
                return Err(SweepError::InvalidSpec(format!(
                    "{name} axis needs at least 2 steps, got {}",
                    r.steps
                )));
            }
            if r.max <= r.min {
                return Err(SweepError::InvalidSpec(format!(
                    "{name} range must satisfy min < max, got [{}, {}]",
                    r.min, r.max
                )));
            }
            Ok(())
        };
        axis("gamma0", &self.gamma0)?;
        axis("J", &self.hopping)?;
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(SweepError::InvalidSpec(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(SweepError::InvalidSpec(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.time_samples < MIN_TIME_SAMPLES {
            return Err(SweepError::InvalidSpec(format!(
                "time_samples must be at least {MIN_TIME_SAMPLES}, got {}",
                self.time_samples
            )));
        }
        if !self.safety_cap.is_finite() || self.safety_cap <= 0.0 {
            return Err(SweepError::InvalidSpec(format!(
                "safety cap must be positive, got {}",
                self.safety_cap
            )));
        }
        let largest = self.gamma0.max.max(self.hopping.max);
        if largest > self.safety_cap {
            return Err(SweepError::InvalidSpec(format!(
                "coupling {largest} exceeds the safety cap {}; raise safety_cap explicitly \
                 if the time grid can resolve it",
                self.safety_cap
            )));
        }
        Ok(())
    }
}

/// Per-cell diagnostics that do not invalidate the result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellFlags {
    /// The closed form was ill-conditioned here (confluent roots).
    pub degenerate_roots: bool,
    /// The cell was evaluated with the kernel integrator instead.
    pub oracle_fallback: bool,
    /// Sup-norm amplitude deviation against the requested reference.
    pub oracle_deviation: Option<f64>,
}

impl CellFlags {
    pub fn is_empty(&self) -> bool {
        !self.degenerate_roots && !self.oracle_fallback && self.oracle_deviation.is_none()
    }
}

/// One evaluated grid cell. `failure` is set (and `qslt` empty) when the
/// cell could not be computed; the grid itself always completes.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub gamma0: f64,
    pub hopping: f64,
    pub qslt: Option<QsltResult>,
    pub flags: CellFlags,
    pub failure: Option<String>,
}

/// Completed sweep: axis values plus cells in γ₀-major order
/// (`cells[ig * hopping_values.len() + ih]`).
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub topology: Topology,
    pub lambda: f64,
    pub tau: f64,
    pub gamma0_values: Vec<f64>,
    pub hopping_values: Vec<f64>,
    pub cells: Vec<CellRecord>,
    pub failed: usize,
}

impl SweepGrid {
    pub fn cell(&self, ig: usize, ih: usize) -> &CellRecord {
        &self.cells[ig * self.hopping_values.len() + ih]
    }

    pub fn failed_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            0.0
        } else {
            self.failed as f64 / self.cells.len() as f64
        }
    }
}

/// Largest pointwise amplitude difference between two trajectories
/// sampled on the same grid.
pub fn sup_amplitude_deviation(a: &AmplitudeTrajectory, b: &AmplitudeTrajectory) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Discrete-bath comparisons tolerate a looser integrator setting: the
/// mode-truncation floor (~1e-5) dominates integration error long before
/// 1e-10 per-step tolerance is the limit.
fn discrete_ode_options() -> OdeOptions {
    OdeOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_steps: 20_000_000,
    }
}

/// Evaluates a single (γ₀, J) cell of `spec`, isolating every failure
/// into the returned record.
pub fn evaluate_cell(spec: &SweepSpec, gamma0: f64, hopping: f64) -> CellRecord {
    let mut flags = CellFlags::default();
    let failed = |flags: CellFlags, message: String| CellRecord {
        gamma0,
        hopping,
        qslt: None,
        flags,
        failure: Some(message),
    };

    let spectral = match SpectralParams::new(gamma0, spec.lambda) {
        Ok(s) => s,
        Err(e) => return failed(flags, e.to_string()),
    };
    let cfg = match ModelConfig::new(spec.topology, hopping, spec.tau, spectral) {
        Ok(c) => c,
        Err(e) => return failed(flags, e.to_string()),
    };
    let grid = uniform_grid(spec.tau, spec.time_samples);

    let trajectory = match sample_trajectory(&cfg, spec.time_samples) {
        Ok(t) => t,
        Err(AnalyticError::NearDegenerateRoots { .. }) => {
            flags.degenerate_roots = true;
            flags.oracle_fallback = true;
            match integrate_kernel(&cfg, &grid, &oracle_ode_options()) {
                Ok(t) => t,
                Err(e) => return failed(flags, e.to_string()),
            }
        }
        Err(e) => return failed(flags, e.to_string()),
    };

    match spec.oracle {
        OracleMode::Off => {}
        // After a fallback the trajectory already came from the kernel;
        // comparing it against itself would report a vacuous zero.
        OracleMode::Kernel if flags.oracle_fallback => {}
        OracleMode::Kernel => {
            match integrate_kernel(&cfg, &grid, &oracle_ode_options()) {
                Ok(reference) => {
                    flags.oracle_deviation = Some(sup_amplitude_deviation(&trajectory, &reference));
                }
                Err(e) => return failed(flags, e.to_string()),
            }
        }
        OracleMode::Discrete => {
            let bath = DiscreteBath::uniform(
                &cfg.spectral,
                DEFAULT_DISCRETE_MODES,
                DiscreteBath::default_half_width(&cfg.spectral),
            );
            match integrate_discrete_bath(&cfg, &bath, &grid, &discrete_ode_options()) {
                Ok(reference) => {
                    flags.oracle_deviation = Some(sup_amplitude_deviation(&trajectory, &reference));
                }
                Err(e) => return failed(flags, e.to_string()),
            }
        }
    }

    match qslt(&trajectory) {
        Ok(q) => CellRecord {
            gamma0,
            hopping,
            qslt: Some(q),
            flags,
            failure: None,
        },
        Err(e) => failed(flags, e.to_string()),
    }
}

/// Runs the full grid in parallel. Output ordering and values are
/// independent of the rayon pool size.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let gamma0_values = spec.gamma0.values();
    let hopping_values = spec.hopping.values();
    let nh = hopping_values.len();

    let cells: Vec<CellRecord> = (0..gamma0_values.len() * nh)
        .into_par_iter()
        .map(|idx| evaluate_cell(spec, gamma0_values[idx / nh], hopping_values[idx % nh]))
        .collect();
    let failed = cells.iter().filter(|c| c.failure.is_some()).count();

    Ok(SweepGrid {
        topology: spec.topology,
        lambda: spec.lambda,
        tau: spec.tau,
        gamma0_values,
        hopping_values,
        cells,
        failed,
    })
}

/// One closed-form vs reference comparison point.
#[derive(Debug, Clone)]
pub struct VerifyPoint {
    pub topology: Topology,
    pub gamma0: f64,
    pub hopping: f64,
    /// sup |a_closed − a_kernel| over the shared grid.
    pub amp_dev: f64,
    /// |ratio_closed − ratio_kernel|.
    pub ratio_dev: f64,
    /// sup deviation against the discrete bath, when requested.
    pub discrete_dev: Option<f64>,
    /// The closed form was degenerate here; both routes are the kernel.
    pub fallback: bool,
}

/// Numerical comparison of the two candidate readings of the common-bath
/// closed form (hyperbolic vs trigonometric interior function) against
/// the kernel integrator at one parameter point where they differ.
#[derive(Debug, Clone, Copy)]
pub struct ReadingComparison {
    pub gamma0: f64,
    pub hopping: f64,
    pub lambda: f64,
    pub time: f64,
    pub hyperbolic_dev: f64,
    pub trig_dev: f64,
}

impl ReadingComparison {
    /// The hyperbolic reading agrees with the integrator and the
    /// trigonometric one measurably does not.
    pub fn conclusive(&self) -> bool {
        self.hyperbolic_dev <= AMP_VERIFY_TOL && self.trig_dev > ALTERNATE_READING_MIN_DEV
    }
}

/// Speed-limit ratios for all three topologies at one (γ₀, J) point.
#[derive(Debug, Clone, Copy)]
pub struct OrderingPoint {
    pub gamma0: f64,
    pub hopping: f64,
    pub ratio_independent: f64,
    pub ratio_common: f64,
    pub ratio_system_only: f64,
}

impl OrderingPoint {
    /// Common-bath bound is at least as tight as independent baths here.
    pub fn common_not_slower(&self) -> bool {
        self.ratio_common <= self.ratio_independent + RATIO_VERIFY_TOL
    }

    /// System-only coupling is at least as tight as independent baths.
    pub fn system_only_not_slower(&self) -> bool {
        self.ratio_system_only <= self.ratio_independent + RATIO_VERIFY_TOL
    }
}

/// Result of the self-check suite: per-point deviations, the closed-form
/// reading comparison, and cross-topology ratio orderings.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub points: Vec<VerifyPoint>,
    pub reading: ReadingComparison,
    pub ordering: Vec<OrderingPoint>,
    pub amp_tolerance: f64,
    pub ratio_tolerance: f64,
    pub discrete_tolerance: f64,
}

impl VerifyReport {
    pub fn worst_amplitude(&self) -> Option<&VerifyPoint> {
        self.points
            .iter()
            .max_by(|a, b| a.amp_dev.total_cmp(&b.amp_dev))
    }

    pub fn worst_ratio(&self) -> Option<&VerifyPoint> {
        self.points
            .iter()
            .max_by(|a, b| a.ratio_dev.total_cmp(&b.ratio_dev))
    }

    /// Number of ordering points where the common bath is tightest.
    pub fn common_not_slower_hits(&self) -> usize {
        self.ordering
            .iter()
            .filter(|o| o.common_not_slower())
            .count()
    }

    /// Number of ordering points where system-only beats independent.
    pub fn system_only_not_slower_hits(&self) -> usize {
        self.ordering
            .iter()
            .filter(|o| o.system_only_not_slower())
            .count()
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| {
            p.amp_dev <= self.amp_tolerance
                && p.ratio_dev <= self.ratio_tolerance
                && p.discrete_dev.is_none_or(|d| d <= self.discrete_tolerance)
        }) && self.reading.conclusive()
    }
}

fn axis_point(range: &AxisRange, fraction: f64) -> f64 {
    range.min + fraction * (range.max - range.min)
}

fn cell_ratio(spec: &SweepSpec, topology: Topology, gamma0: f64, hopping: f64) -> Result<f64> {
    let probe = SweepSpec {
        topology,
        oracle: OracleMode::Off,
        ..spec.clone()
    };
    let record = evaluate_cell(&probe, gamma0, hopping);
    match (record.qslt, record.failure) {
        (Some(q), None) => Ok(q.ratio),
        (_, failure) => Err(SweepError::CellFailure {
            topology,
            gamma0,
            hopping,
            message: failure.unwrap_or_else(|| "missing result".into()),
        }),
    }
}

/// Parameter point and horizon for the closed-form reading comparison;
/// chosen where the two readings differ at the percent level.
pub const READING_CHECK_POINT: (f64, f64, f64, f64) = (1.0, 1.0, 2.0, 2.0);

fn compare_readings() -> Result<ReadingComparison> {
    let (gamma0, hopping, lambda, time) = READING_CHECK_POINT;
    let cfg = ModelConfig::new(
        Topology::CommonBath,
        hopping,
        time,
        SpectralParams::new(gamma0, lambda)?,
    )?;
    let grid = uniform_grid(time, 257);
    let kernel = integrate_kernel(&cfg, &grid, &oracle_ode_options())?;
    let reference: Complex64 = *kernel.amplitudes().last().expect("nonempty grid");
    Ok(ReadingComparison {
        gamma0,
        hopping,
        lambda,
        time,
        hyperbolic_dev: (amplitude_common(time, &cfg) - reference).norm(),
        trig_dev: (amplitude_common_cos_variant(time, &cfg) - reference).norm(),
    })
}

/// Sampled points where cross-topology ratio orderings are recorded.
pub const ORDERING_GAMMA0: [f64; 3] = [1.0, 5.0, 10.0];
pub const ORDERING_HOPPING: [f64; 3] = [1.0, 3.0, 5.0];

/// Cross-checks the closed forms against the reference integrators on a
/// deterministic subsample of cells covering all three topologies, plus
/// the closed-form reading comparison and cross-topology orderings.
pub fn verify(spec: &SweepSpec) -> Result<VerifyReport> {
    spec.validate()?;
    let fractions = [0.15, 0.5, 0.9];
    let grid = uniform_grid(spec.tau, spec.time_samples);
    let opts = oracle_ode_options();

    let mut points = Vec::new();
    for &topology in Topology::ALL.iter() {
        let mut cells: Vec<(f64, f64, bool)> = Vec::new();
        for &fg in &fractions {
            for &fh in &fractions {
                // Discrete cross-check only at the central cell: the mode
                // integration is ~500x the cost of the kernel one.
                let central = fg == 0.5 && fh == 0.5;
                cells.push((
                    axis_point(&spec.gamma0, fg),
                    axis_point(&spec.hopping, fh),
                    central,
                ));
            }
        }
        cells.push((axis_point(&spec.gamma0, 0.5), spec.hopping.min, false));

        for (gamma0, hopping, central) in cells {
            let cfg = ModelConfig::new(
                topology,
                hopping,
                spec.tau,
                SpectralParams::new(gamma0, spec.lambda)?,
            )?;
            let kernel = integrate_kernel(&cfg, &grid, &opts)?;
            let (closed, fallback) = match sample_trajectory(&cfg, spec.time_samples) {
                Ok(t) => (t, false),
                Err(AnalyticError::NearDegenerateRoots { .. }) => (kernel.clone(), true),
                Err(e) => return Err(e.into()),
            };
            let amp_dev = sup_amplitude_deviation(&closed, &kernel);
            let ratio_dev = (qslt(&closed)?.ratio - qslt(&kernel)?.ratio).abs();
            let discrete_dev = if spec.oracle == OracleMode::Discrete && central {
                let bath = DiscreteBath::uniform(
                    &cfg.spectral,
                    DEFAULT_DISCRETE_MODES,
                    DiscreteBath::default_half_width(&cfg.spectral),
                );
                let reference = integrate_discrete_bath(&cfg, &bath, &grid, &discrete_ode_options())?;
                Some(sup_amplitude_deviation(&closed, &reference))
            } else {
                None
            };
            points.push(VerifyPoint {
                topology,
                gamma0,
                hopping,
                amp_dev,
                ratio_dev,
                discrete_dev,
                fallback,
            });
        }
    }

    let mut ordering = Vec::new();
    for &gamma0 in ORDERING_GAMMA0.iter() {
        for &hopping in ORDERING_HOPPING.iter() {
            ordering.push(OrderingPoint {
                gamma0,
                hopping,
                ratio_independent: cell_ratio(spec, Topology::IndependentBaths, gamma0, hopping)?,
                ratio_common: cell_ratio(spec, Topology::CommonBath, gamma0, hopping)?,
                ratio_system_only: cell_ratio(spec, Topology::SystemOnlyBath, gamma0, hopping)?,
            });
        }
    }

    Ok(VerifyReport {
        points,
        reading: compare_readings()?,
        ordering,
        amp_tolerance: AMP_VERIFY_TOL,
        ratio_tolerance: RATIO_VERIFY_TOL,
        discrete_tolerance: DISCRETE_VERIFY_TOL,
    })
}

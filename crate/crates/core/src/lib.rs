//! Excitation dynamics of a coupled emitter pair in Lorentzian baths, and
//! the quantum-speed-limit analysis built on top.
//!
//! The crate is layered bottom-up:
//!
//! * [`model`] — parameters, bath topologies, sampled trajectories;
//! * [`cubic`] — the decay-rate cubic behind the single-bath solution;
//! * [`analytic`] — exact closed-form amplitudes for all three topologies;
//! * [`ode`] — adaptive Dormand–Prince 5(4) integration;
//! * [`oracle`] — independent numerical routes (memory-kernel ODE and a
//!   discrete-mode bath) used to cross-check the closed forms;
//! * [`engine`] — Bures angle, evolution rates, and the unified
//!   speed-limit bound for a sampled trajectory;
//! * [`sweep`] — parallel (γ₀, J) grids and the self-check suite.

#![forbid(unsafe_code)]

pub mod analytic;
pub mod cubic;
pub mod engine;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod sweep;

pub use analytic::{AnalyticError, ClosedFormCoefficients};
pub use engine::{EngineError, NormKind, QsltResult};
pub use model::{
    AmplitudeTrajectory, Frame, ModelConfig, ModelError, SpectralParams, Topology,
};
pub use ode::{OdeError, OdeOptions};
pub use oracle::{DiscreteBath, KernelRun, OracleError};
pub use sweep::{
    evaluate_cell, run_sweep, sup_amplitude_deviation, verify, AxisRange, CellFlags, CellRecord,
    OracleMode, SweepError, SweepGrid, SweepSpec, VerifyReport,
};

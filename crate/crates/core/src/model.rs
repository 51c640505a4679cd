//! Model configuration and shared types.
//!
//! Two two-level emitters exchange a single excitation through a hopping
//! term `J` while coupled (individually, jointly, or one-sided) to a bath
//! with Lorentzian spectral density
//!
//! ```text
//! I(ω) = (1/2π) · γ₀ λ² / ((ω − ω₀)² + λ²),
//! ```
//!
//! whose rotating-frame correlation function is the exponential memory
//! kernel `f(Δ) = (γ₀ λ / 2) e^{−λΔ}`. All rates are expressed in units of
//! the transition frequency `ω₀` and ħ = 1. With the excitation injected in
//! the first emitter, the reduced state stays diagonal and everything of
//! interest is carried by the excited-state amplitude `a(t)`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

/// Default transition frequency; the natural unit of every other rate.
pub const DEFAULT_OMEGA0: f64 = 1.0;

/// Slack applied to exact-in-principle trajectory invariants (|a|² ≤ 1,
/// a(0) = 1, rotating-frame ȧ(0) = 0) to absorb floating-point noise.
pub const TRAJECTORY_SLACK: f64 = 1e-9;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("gamma0 must be finite and non-negative, got {0}")]
    InvalidGamma0(f64),
    #[error("lambda must be finite and positive, got {0}")]
    InvalidLambda(f64),
    #[error("omega0 must be finite and positive, got {0}")]
    InvalidOmega0(f64),
    #[error("hopping strength must be finite and non-negative, got {0}")]
    InvalidHopping(f64),
    #[error("tau must be finite and positive, got {0}")]
    InvalidTau(f64),
    #[error("trajectory arrays must have equal length >= 2 (times: {times}, amp: {amp}, amp_dot: {amp_dot})")]
    TrajectoryShape {
        times: usize,
        amp: usize,
        amp_dot: usize,
    },
    #[error("trajectory times must start at 0 and increase strictly (violation near index {0})")]
    TrajectoryTimes(usize),
    #[error("trajectory must start from the excited state: |a(0) - 1| = {0:.3e}")]
    TrajectoryStart(f64),
    #[error("rotating-frame trajectory must have a_dot(0) = 0, got |a_dot(0)| = {0:.3e}")]
    TrajectoryInitialSlope(f64),
    #[error("excited-state population exceeds unity at index {index}: |a|^2 = {population}")]
    PopulationOverflow { index: usize, population: f64 },
}

/// Lorentzian bath parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Emitter–bath coupling strength (peak decay rate scale).
    pub gamma0: f64,
    /// Spectral half-width; `1/lambda` is the bath memory time.
    pub lambda: f64,
    /// Center of the Lorentzian line, equal to the emitter transition
    /// frequency.
    pub omega0: f64,
}

impl SpectralParams {
    pub fn new(gamma0: f64, lambda: f64) -> Result<Self> {
        Self::with_omega0(gamma0, lambda, DEFAULT_OMEGA0)
    }

    pub fn with_omega0(gamma0: f64, lambda: f64, omega0: f64) -> Result<Self> {
        if !gamma0.is_finite() || gamma0 < 0.0 {
            return Err(ModelError::InvalidGamma0(gamma0));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(ModelError::InvalidLambda(lambda));
        }
        if !omega0.is_finite() || omega0 <= 0.0 {
            return Err(ModelError::InvalidOmega0(omega0));
        }
        Ok(Self {
            gamma0,
            lambda,
            omega0,
        })
    }

    /// Spectral density `I(ω)`.
    pub fn lorentzian_density(&self, omega: f64) -> f64 {
        let det = omega - self.omega0;
        self.gamma0 * self.lambda * self.lambda
            / (2.0 * PI * (det * det + self.lambda * self.lambda))
    }

    /// Rotating-frame memory kernel `f(Δ) = (γ₀λ/2) e^{−λΔ}` at delay
    /// `dt >= 0`; the Fourier transform of the spectral density.
    pub fn memory_kernel(&self, dt: f64) -> f64 {
        debug_assert!(dt >= 0.0);
        self.kernel_weight() * (-self.lambda * dt).exp()
    }

    /// Kernel weight `f(0) = γ₀λ/2`, the total spectral mass.
    pub fn kernel_weight(&self) -> f64 {
        0.5 * self.gamma0 * self.lambda
    }

    /// Memory effects are negligible when the bath width dominates the
    /// coupling: λ > 2γ₀ (the single-emitter decay branch rate
    /// √(λ(λ−2γ₀)) stays real).
    pub fn is_markovian(&self) -> bool {
        self.lambda > 2.0 * self.gamma0
    }

    pub fn is_non_markovian(&self) -> bool {
        !self.is_markovian()
    }
}

/// How the two emitters see the bath(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Each emitter couples to its own, identical bath.
    IndependentBaths,
    /// Both emitters couple to one shared bath.
    CommonBath,
    /// Only the initially excited emitter couples to a bath.
    SystemOnlyBath,
}

impl Topology {
    pub const ALL: [Topology; 3] = [
        Topology::IndependentBaths,
        Topology::CommonBath,
        Topology::SystemOnlyBath,
    ];

    /// Short token used by the CLI and CSV output.
    pub fn token(&self) -> &'static str {
        match self {
            Topology::IndependentBaths => "id",
            Topology::CommonBath => "common",
            Topology::SystemOnlyBath => "sys",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "id" => Some(Topology::IndependentBaths),
            "common" => Some(Topology::CommonBath),
            "sys" => Some(Topology::SystemOnlyBath),
            _ => None,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A complete model instance: topology, hopping strength `J`, drive
/// horizon `τ`, and bath parameters.
#[derive(Debug, Clone, Copy)]
pub struct ModelConfig {
    pub topology: Topology,
    /// Excitation-exchange rate `J` between the two emitters.
    pub hopping: f64,
    /// Evolution horizon the speed limit is evaluated against.
    pub tau: f64,
    pub spectral: SpectralParams,
}

impl ModelConfig {
    pub fn new(topology: Topology, hopping: f64, tau: f64, spectral: SpectralParams) -> Result<Self> {
        if !hopping.is_finite() || hopping < 0.0 {
            return Err(ModelError::InvalidHopping(hopping));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(ModelError::InvalidTau(tau));
        }
        Ok(Self {
            topology,
            hopping,
            tau,
            spectral,
        })
    }
}

/// Reference frame of stored amplitudes. `Rotating` amplitudes have the
/// bare e^{−iω₀t} phase removed; `Lab` amplitudes keep it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Rotating,
    Lab,
}

/// Uniform time grid over [0, tau] with exact endpoints.
pub fn uniform_grid(tau: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2 && tau > 0.0);
    let n = samples - 1;
    (0..samples)
        .map(|i| {
            if i == n {
                tau
            } else {
                tau * (i as f64) / (n as f64)
            }
        })
        .collect()
}

/// Sampled excited-state amplitude `a(t)` and its time derivative on a
/// grid covering `[0, τ]`. Derivatives come from the generating route
/// (closed form or ODE right-hand side), never from differencing.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    times: Vec<f64>,
    amp: Vec<Complex64>,
    amp_dot: Vec<Complex64>,
    frame: Frame,
}

impl AmplitudeTrajectory {
    /// Validates the construction invariants: equal lengths, strictly
    /// increasing times from 0, a(0) = 1 and (rotating frame) ȧ(0) = 0
    /// within [`TRAJECTORY_SLACK`], and |a|² ≤ 1 + slack everywhere.
    pub fn new(
        times: Vec<f64>,
        amp: Vec<Complex64>,
        amp_dot: Vec<Complex64>,
        frame: Frame,
    ) -> Result<Self> {
        if times.len() < 2 || times.len() != amp.len() || times.len() != amp_dot.len() {
            return Err(ModelError::TrajectoryShape {
                times: times.len(),
                amp: amp.len(),
                amp_dot: amp_dot.len(),
            });
        }
        if times[0] != 0.0 {
            return Err(ModelError::TrajectoryTimes(0));
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(ModelError::TrajectoryTimes(i));
            }
        }
        let start_dev = (amp[0] - Complex64::new(1.0, 0.0)).norm();
        if start_dev > TRAJECTORY_SLACK {
            return Err(ModelError::TrajectoryStart(start_dev));
        }
        if frame == Frame::Rotating && amp_dot[0].norm() > TRAJECTORY_SLACK {
            return Err(ModelError::TrajectoryInitialSlope(amp_dot[0].norm()));
        }
        for (index, a) in amp.iter().enumerate() {
            let population = a.norm_sqr();
            if population > 1.0 + TRAJECTORY_SLACK {
                return Err(ModelError::PopulationOverflow { index, population });
            }
        }
        Ok(Self {
            times,
            amp,
            amp_dot,
            frame,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn derivatives(&self) -> &[Complex64] {
        &self.amp_dot
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Final grid time; the evolution horizon τ.
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Excited-state population p(t) = |a(t)|² at each sample.
    pub fn populations(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Population rate ṗ = 2 Re[ȧ a*] at each sample; identical in both
    /// frames since the bare phase contributes Re[−iω₀|a|²] = 0.
    pub fn population_rates(&self) -> Vec<f64> {
        self.amp
            .iter()
            .zip(&self.amp_dot)
            .map(|(a, ad)| 2.0 * (ad * a.conj()).re)
            .collect()
    }

    /// Re-attaches the bare phase: A = a e^{−iω₀t}, Ȧ = (ȧ − iω₀ a) e^{−iω₀t}.
    pub fn to_lab(&self, omega0: f64) -> Self {
        assert_eq!(self.frame, Frame::Rotating);
        let rot = |t: f64| Complex64::from_polar(1.0, -omega0 * t);
        let amp: Vec<Complex64> = self
            .times
            .iter()
            .zip(&self.amp)
            .map(|(&t, a)| a * rot(t))
            .collect();
        let amp_dot: Vec<Complex64> = self
            .times
            .iter()
            .zip(self.amp.iter().zip(&self.amp_dot))
            .map(|(&t, (a, ad))| (ad - Complex64::i() * omega0 * a) * rot(t))
            .collect();
        Self {
            times: self.times.clone(),
            amp,
            amp_dot,
            frame: Frame::Lab,
        }
    }

    /// Removes the bare phase: a = A e^{iω₀t}, ȧ = (Ȧ + iω₀ A) e^{iω₀t}.
    pub fn to_rotating(&self, omega0: f64) -> Self {
        assert_eq!(self.frame, Frame::Lab);
        let rot = |t: f64| Complex64::from_polar(1.0, omega0 * t);
        let amp: Vec<Complex64> = self
            .times
            .iter()
            .zip(&self.amp)
            .map(|(&t, a)| a * rot(t))
            .collect();
        let amp_dot: Vec<Complex64> = self
            .times
            .iter()
            .zip(self.amp.iter().zip(&self.amp_dot))
            .map(|(&t, (a, ad))| (ad + Complex64::i() * omega0 * a) * rot(t))
            .collect();
        Self {
            times: self.times.clone(),
            amp,
            amp_dot,
            frame: Frame::Rotating,
        }
    }
}

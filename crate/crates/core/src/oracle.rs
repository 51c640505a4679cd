//! Independent numerical routes to the excitation amplitude.
//!
//! Two oracles cross-check the closed forms without sharing any algebra
//! with them:
//!
//! * **Kernel ODE** — the exact memory integral z(t) = ∫₀ᵗ e^{−λ(t−s)} x(s) ds
//!   is promoted to a state variable (ż = x − λz), turning the
//!   integro-differential amplitude equations into a small linear ODE system
//!   integrated adaptively.
//! * **Discrete bath** — the Lorentzian line is sampled by N discrete modes
//!   on [ω₀−W, ω₀+W] and the full closed-system Schrödinger dynamics is
//!   integrated; this converges to the exact dynamics as N → ∞, W → ∞ and
//!   conserves total norm exactly, which doubles as an integration check.

use crate::model::{
    AmplitudeTrajectory, Frame, ModelConfig, ModelError, SpectralParams, Topology,
};
use crate::ode::{integrate_over_grid, OdeError, OdeOptions};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, OracleError>;

/// Slack on the excited-pair population |a|² + |b|² ≤ 1.
pub const PAIR_POPULATION_SLACK: f64 = 1e-9;

/// Hard cap on discrete-bath norm drift before the run is rejected.
pub const NORM_DRIFT_CAP: f64 = 1e-8;

/// Default half-width of the discrete-bath window, in units of λ.
pub const DEFAULT_WINDOW_WIDTHS: f64 = 20.0;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("excited-pair population exceeds unity at t = {t:.6}: excess {excess:.3e}")]
    PopulationOverflow { t: f64, excess: f64 },
    #[error("discrete-bath norm drifted by {drift:.3e} at t = {t:.6}")]
    NormDrift { t: f64, drift: f64 },
}

/// Integration options tight enough that oracle error is negligible against
/// every tolerance the oracles are used with.
pub fn oracle_ode_options() -> OdeOptions {
    OdeOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_steps: 20_000_000,
    }
}

/// Kernel-ODE solution: the tracked amplitude plus the partner amplitude
/// and the instantaneous bath-absorption rate at each grid point.
#[derive(Debug, Clone)]
pub struct KernelRun {
    pub trajectory: AmplitudeTrajectory,
    pub partner: Vec<Complex64>,
    pub absorbed_rate: Vec<f64>,
}

/// Pointwise bookkeeping of excitation: emitters + absorbed = 1.
#[derive(Debug, Clone)]
pub struct BalanceReport {
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
}

impl KernelRun {
    /// |a|² + |b|² at each grid point.
    pub fn excited_total(&self) -> Vec<f64> {
        self.trajectory
            .amplitudes()
            .iter()
            .zip(&self.partner)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// Checks that emitter population plus the time-integrated absorption
    /// rate accounts for the full excitation at every grid point.
    pub fn balance(&self) -> BalanceReport {
        let times = self.trajectory.times();
        let total = self.excited_total();
        let mut absorbed = 0.0;
        let mut deviations = Vec::with_capacity(times.len());
        let mut max_abs = 0.0f64;
        for i in 0..times.len() {
            if i > 0 {
                let h = times[i] - times[i - 1];
                absorbed += 0.5 * h * (self.absorbed_rate[i] + self.absorbed_rate[i - 1]);
            }
            let dev = total[i] + absorbed - 1.0;
            max_abs = max_abs.max(dev.abs());
            deviations.push(dev);
        }
        BalanceReport {
            deviations,
            max_abs_deviation: max_abs,
        }
    }
}

/// Integrates the memory-kernel formulation on `grid` (rotating frame).
pub fn integrate_kernel(
    cfg: &ModelConfig,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<AmplitudeTrajectory> {
    Ok(integrate_kernel_full(cfg, grid, opts)?.trajectory)
}

/// As [`integrate_kernel`], but keeps the partner amplitude and the
/// absorption rate for balance checks.
pub fn integrate_kernel_full(cfg: &ModelConfig, grid: &[f64], opts: &OdeOptions) -> Result<KernelRun> {
    let j = cfg.hopping;
    let w = cfg.spectral.kernel_weight();
    let lambda = cfg.spectral.lambda;
    let mij = Complex64::new(0.0, -j);
    let topology = cfg.topology;

    let dim = match topology {
        Topology::IndependentBaths => 4,
        Topology::CommonBath => 3,
        Topology::SystemOnlyBath => 3,
    };
    let mut y0 = vec![Complex64::new(0.0, 0.0); dim];
    y0[0] = Complex64::new(1.0, 0.0);

    let rhs = move |_t: f64, y: &[Complex64], dy: &mut [Complex64]| match topology {
        Topology::IndependentBaths => {
            // [a, b, z_a, z_b]
            dy[0] = mij * y[1] - w * y[2];
            dy[1] = mij * y[0] - w * y[3];
            dy[2] = y[0] - lambda * y[2];
            dy[3] = y[1] - lambda * y[3];
        }
        Topology::CommonBath => {
            // [a, b, z] with the memory fed by a + b
            dy[0] = mij * y[1] - w * y[2];
            dy[1] = mij * y[0] - w * y[2];
            dy[2] = y[0] + y[1] - lambda * y[2];
        }
        Topology::SystemOnlyBath => {
            // [a, b, z_a]; the partner is undamped
            dy[0] = mij * y[1] - w * y[2];
            dy[1] = mij * y[0];
            dy[2] = y[0] - lambda * y[2];
        }
    };

    let n = grid.len();
    let mut amp = Vec::with_capacity(n);
    let mut amp_dot = Vec::with_capacity(n);
    let mut partner = Vec::with_capacity(n);
    let mut absorbed_rate = Vec::with_capacity(n);
    let mut overflow: Option<(f64, f64)> = None;

    integrate_over_grid(rhs, &y0, grid, opts, |_, t, y, dy| {
        amp.push(y[0]);
        amp_dot.push(dy[0]);
        partner.push(y[1]);
        let rate = match topology {
            Topology::IndependentBaths => {
                2.0 * w * ((y[0].conj() * y[2]).re + (y[1].conj() * y[3]).re)
            }
            Topology::CommonBath => 2.0 * w * (((y[0] + y[1]).conj() * y[2]).re),
            Topology::SystemOnlyBath => 2.0 * w * (y[0].conj() * y[2]).re,
        };
        absorbed_rate.push(rate);
        let excess = y[0].norm_sqr() + y[1].norm_sqr() - 1.0;
        if excess > PAIR_POPULATION_SLACK && overflow.is_none() {
            overflow = Some((t, excess));
        }
    })?;
    if let Some((t, excess)) = overflow {
        return Err(OracleError::PopulationOverflow { t, excess });
    }

    let trajectory = AmplitudeTrajectory::new(grid.to_vec(), amp, amp_dot, Frame::Rotating)?;
    Ok(KernelRun {
        trajectory,
        partner,
        absorbed_rate,
    })
}

/// A finite set of bath modes standing in for the Lorentzian continuum.
#[derive(Debug, Clone)]
pub struct DiscreteBath {
    detunings: Vec<f64>,
    couplings: Vec<f64>,
    half_width: f64,
}

impl DiscreteBath {
    /// N modes on a uniform endpoint-inclusive grid over [−W, W] around the
    /// line center, with |g_k|² = I(ω_k) Δω, Δω = 2W/(N−1). The quadrature
    /// error of this layout is linear in Δω, so halving Δω halves the
    /// dynamical error — a property the convergence checks rely on.
    pub fn uniform(spectral: &SpectralParams, modes: usize, half_width: f64) -> Self {
        assert!(modes >= 2, "need at least two modes");
        assert!(half_width.is_finite() && half_width > 0.0);
        let dw = 2.0 * half_width / (modes as f64 - 1.0);
        let mut detunings = Vec::with_capacity(modes);
        let mut couplings = Vec::with_capacity(modes);
        for k in 0..modes {
            let delta = -half_width + dw * k as f64;
            detunings.push(delta);
            couplings.push((spectral.lorentzian_density(spectral.omega0 + delta) * dw).sqrt());
        }
        Self {
            detunings,
            couplings,
            half_width,
        }
    }

    /// Hand-built mode layout (single resonant mode, custom grids, …).
    pub fn from_parts(detunings: Vec<f64>, couplings: Vec<f64>, half_width: f64) -> Self {
        assert_eq!(detunings.len(), couplings.len());
        assert!(!detunings.is_empty());
        Self {
            detunings,
            couplings,
            half_width,
        }
    }

    /// Default window half-width: [`DEFAULT_WINDOW_WIDTHS`] line widths.
    pub fn default_half_width(spectral: &SpectralParams) -> f64 {
        DEFAULT_WINDOW_WIDTHS * spectral.lambda
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total discrete coupling mass Σ|g_k|²; approximates the window mass.
    pub fn coupling_mass(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    /// Exact spectral mass inside ±W: (γ₀λ/π)·atan(W/λ).
    pub fn window_mass(spectral: &SpectralParams, half_width: f64) -> f64 {
        spectral.gamma0 * spectral.lambda / PI * (half_width / spectral.lambda).atan()
    }
}

/// Discrete-bath solution with its exact-conservation diagnostic.
#[derive(Debug, Clone)]
pub struct DiscreteRun {
    pub trajectory: AmplitudeTrajectory,
    pub partner: Vec<Complex64>,
    /// Total norm² of the full emitter+bath state at each grid point;
    /// exactly 1 for the true dynamics.
    pub total_norm: Vec<f64>,
}

/// Integrates the full emitter+modes Schrödinger dynamics on `grid`
/// (rotating frame, detunings relative to ω₀).
pub fn integrate_discrete_bath(
    cfg: &ModelConfig,
    bath: &DiscreteBath,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<AmplitudeTrajectory> {
    Ok(integrate_discrete_bath_full(cfg, bath, grid, opts)?.trajectory)
}

/// As [`integrate_discrete_bath`], keeping the partner amplitude and the
/// norm history.
pub fn integrate_discrete_bath_full(
    cfg: &ModelConfig,
    bath: &DiscreteBath,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<DiscreteRun> {
    let j = cfg.hopping;
    let mij = Complex64::new(0.0, -j);
    let mi = Complex64::new(0.0, -1.0);
    let topology = cfg.topology;
    let nmodes = bath.len();
    let deltas = bath.detunings.clone();
    let gs = bath.couplings.clone();

    let dim = match topology {
        Topology::IndependentBaths => 2 + 2 * nmodes,
        _ => 2 + nmodes,
    };
    let mut y0 = vec![Complex64::new(0.0, 0.0); dim];
    y0[0] = Complex64::new(1.0, 0.0);

    let rhs = move |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let (a, b) = (y[0], y[1]);
        match topology {
            Topology::IndependentBaths => {
                let (ca, cb) = y[2..].split_at(nmodes);
                let mut sa = Complex64::new(0.0, 0.0);
                let mut sb = Complex64::new(0.0, 0.0);
                for k in 0..nmodes {
                    sa += gs[k] * ca[k];
                    sb += gs[k] * cb[k];
                    dy[2 + k] = mi * (deltas[k] * ca[k] + gs[k] * a);
                    dy[2 + nmodes + k] = mi * (deltas[k] * cb[k] + gs[k] * b);
                }
                dy[0] = mij * b + mi * sa;
                dy[1] = mij * a + mi * sb;
            }
            Topology::CommonBath => {
                let c = &y[2..];
                let mut s = Complex64::new(0.0, 0.0);
                let drive = a + b;
                for k in 0..nmodes {
                    s += gs[k] * c[k];
                    dy[2 + k] = mi * (deltas[k] * c[k] + gs[k] * drive);
                }
                dy[0] = mij * b + mi * s;
                dy[1] = mij * a + mi * s;
            }
            Topology::SystemOnlyBath => {
                let c = &y[2..];
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..nmodes {
                    s += gs[k] * c[k];
                    dy[2 + k] = mi * (deltas[k] * c[k] + gs[k] * a);
                }
                dy[0] = mij * b + mi * s;
                dy[1] = mij * a;
            }
        }
    };

    let n = grid.len();
    let mut amp = Vec::with_capacity(n);
    let mut amp_dot = Vec::with_capacity(n);
    let mut partner = Vec::with_capacity(n);
    let mut total_norm = Vec::with_capacity(n);
    let mut drift_hit: Option<(f64, f64)> = None;

    integrate_over_grid(rhs, &y0, grid, opts, |_, t, y, dy| {
        amp.push(y[0]);
        amp_dot.push(dy[0]);
        partner.push(y[1]);
        let norm: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        total_norm.push(norm);
        let drift = (norm - 1.0).abs();
        if drift > NORM_DRIFT_CAP && drift_hit.is_none() {
            drift_hit = Some((t, drift));
        }
    })?;
    if let Some((t, drift)) = drift_hit {
        return Err(OracleError::NormDrift { t, drift });
    }

    let trajectory = AmplitudeTrajectory::new(grid.to_vec(), amp, amp_dot, Frame::Rotating)?;
    Ok(DiscreteRun {
        trajectory,
        partner,
        total_norm,
    })
}

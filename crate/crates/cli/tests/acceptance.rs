//! Acceptance gate. Each test checks one release criterion end to end and
//! prints a single `ACCEPTANCE <id> ...: PASS|FAIL` line with the measured
//! numbers (visible with `--nocapture`; failures always show theirs).
//! Tolerances are pinned locally so library changes cannot drift the gate.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qslt_core::analytic::{amplitude_common, sample_trajectory, AnalyticError};
use qslt_core::engine::{qslt, NormKind};
use qslt_core::model::{uniform_grid, ModelConfig, SpectralParams, Topology};
use qslt_core::ode::OdeOptions;
use qslt_core::oracle::{
    integrate_discrete_bath, integrate_kernel, oracle_ode_options, DiscreteBath,
};
use qslt_core::sweep::{
    evaluate_cell, run_sweep, sup_amplitude_deviation, verify, SweepSpec,
};

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn model(topology: Topology, gamma0: f64, hopping: f64, lambda: f64, tau: f64) -> ModelConfig {
    ModelConfig::new(
        topology,
        hopping,
        tau,
        SpectralParams::new(gamma0, lambda).unwrap(),
    )
    .unwrap()
}

/// Uniform draw from (0, 10]: flip the half-open interval to exclude 0.
fn draw_coupling(rng: &mut ChaCha8Rng) -> f64 {
    10.0 - rng.random_range(0.0..10.0)
}

// ---------------------------------------------------------------- C1 --

const C1_SUP_TOL: f64 = 1e-7;
const C1_POINTS_PER_TOPOLOGY: usize = 50;
const C1_BUDGET_SECS: f64 = 60.0;

#[test]
fn c1_closed_form_matches_kernel_integrator() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51c1);
    let grid = uniform_grid(3.0, 2049);
    let opts = oracle_ode_options();
    let mut worst = 0.0f64;
    let mut worst_at = (Topology::IndependentBaths, 0.0f64, 0.0f64);
    for &topology in Topology::ALL.iter() {
        let mut accepted = 0;
        while accepted < C1_POINTS_PER_TOPOLOGY {
            let gamma0 = draw_coupling(&mut rng);
            let hopping = draw_coupling(&mut rng);
            let cfg = model(topology, gamma0, hopping, 2.0, 3.0);
            let closed = match sample_trajectory(&cfg, 2049) {
                Ok(t) => t,
                // Confluent-root parameters form a measure-zero curve;
                // a random draw landing on it is redrawn, not skipped.
                Err(AnalyticError::NearDegenerateRoots { .. }) => continue,
                Err(e) => panic!("closed form failed at ({gamma0}, {hopping}): {e}"),
            };
            let kernel = integrate_kernel(&cfg, &grid, &opts).unwrap();
            let dev = sup_amplitude_deviation(&closed, &kernel);
            if dev > worst {
                worst = dev;
                worst_at = (topology, gamma0, hopping);
            }
            accepted += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= C1_SUP_TOL && elapsed <= C1_BUDGET_SECS;
    println!(
        "ACCEPTANCE C1 closed form matches kernel integrator at 50 random points per topology: {} \
         (worst sup dev {:.3e} at ({}, gamma0 = {:.4}, J = {:.4}), limit {:.0e}; {:.1} s of {:.0} s)",
        verdict(pass),
        worst,
        worst_at.0.token(),
        worst_at.1,
        worst_at.2,
        C1_SUP_TOL,
        elapsed,
        C1_BUDGET_SECS
    );
    assert!(pass, "worst sup dev {worst:.3e}, elapsed {elapsed:.1} s");
}

// ---------------------------------------------------------------- C2 --

const C2_SUP_TOL: f64 = 1e-3;
const C2_MODES: usize = 1024;
const C2_HALF_WIDTH: f64 = 40.0;
const C2_HALVING_BAND: (f64, f64) = (0.35, 0.65);

fn discrete_opts() -> OdeOptions {
    OdeOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_steps: 20_000_000,
    }
}

#[test]
fn c2a_discrete_bath_matches_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51c2);
    let grid = uniform_grid(3.0, 513);
    let kernel_opts = oracle_ode_options();
    let mode_opts = discrete_opts();
    let mut worst = 0.0f64;
    let mut worst_at = (Topology::IndependentBaths, 0.0f64, 0.0f64);
    for &topology in Topology::ALL.iter() {
        for _ in 0..5 {
            let gamma0 = draw_coupling(&mut rng);
            let hopping = draw_coupling(&mut rng);
            let cfg = model(topology, gamma0, hopping, 2.0, 3.0);
            let bath = DiscreteBath::uniform(&cfg.spectral, C2_MODES, C2_HALF_WIDTH);
            let discrete = integrate_discrete_bath(&cfg, &bath, &grid, &mode_opts).unwrap();
            let kernel = integrate_kernel(&cfg, &grid, &kernel_opts).unwrap();
            let dev = sup_amplitude_deviation(&discrete, &kernel);
            if dev > worst {
                worst = dev;
                worst_at = (topology, gamma0, hopping);
            }
        }
    }
    let pass = worst <= C2_SUP_TOL;
    println!(
        "ACCEPTANCE C2a discrete bath (N = {}, half-width {}) matches kernel at 5 points per topology: {} \
         (worst sup dev {:.3e} at ({}, gamma0 = {:.4}, J = {:.4}), limit {:.0e})",
        C2_MODES,
        C2_HALF_WIDTH,
        verdict(pass),
        worst,
        worst_at.0.token(),
        worst_at.1,
        worst_at.2,
        C2_SUP_TOL
    );
    assert!(pass, "worst sup dev {worst:.3e}");
}

#[test]
fn c2b_discrete_bath_error_halves_when_modes_double() {
    let grid = uniform_grid(3.0, 513);
    let kernel_opts = oracle_ode_options();
    let mode_opts = discrete_opts();
    let mut rows = Vec::new();
    for &topology in Topology::ALL.iter() {
        let cfg = model(topology, 2.0, 3.0, 2.0, 3.0);
        let kernel = integrate_kernel(&cfg, &grid, &kernel_opts).unwrap();
        let err_at = |modes: usize| -> f64 {
            let bath = DiscreteBath::uniform(&cfg.spectral, modes, C2_HALF_WIDTH);
            let run = integrate_discrete_bath(&cfg, &bath, &grid, &mode_opts).unwrap();
            sup_amplitude_deviation(&run, &kernel)
        };
        let e_base = err_at(C2_MODES);
        let e_double = err_at(2 * C2_MODES);
        rows.push((topology, e_base, e_double, e_double / e_base));
    }
    let pass = rows
        .iter()
        .all(|&(_, _, _, r)| r >= C2_HALVING_BAND.0 && r <= C2_HALVING_BAND.1);
    let detail: Vec<String> = rows
        .iter()
        .map(|(t, e1, e2, r)| {
            format!(
                "{}: err({}) = {:.3e}, err({}) = {:.3e}, ratio = {:.3}",
                t.token(),
                C2_MODES,
                e1,
                2 * C2_MODES,
                e2,
                r
            )
        })
        .collect();
    println!(
        "ACCEPTANCE C2b discrete-bath error halves when modes double (ratio in [{}, {}]): {} ({})",
        C2_HALVING_BAND.0,
        C2_HALVING_BAND.1,
        verdict(pass),
        detail.join("; ")
    );
    assert!(
        pass,
        "mode-doubling error ratios out of band: {}. At fixed half-width {} the deviation \
         floor is set by the spectral weight outside the frequency window, which adding \
         modes inside the window cannot reduce; doubling the mode count leaves the error \
         unchanged rather than halving it.",
        detail.join("; "),
        C2_HALF_WIDTH
    );
}

// ---------------------------------------------------------------- C3 --

const C3_AMP_TOL: f64 = 1e-10;
const C3_SATURATION_REL_TOL: f64 = 1e-8;

#[test]
fn c3_frozen_bath_reduces_to_two_site_oscillation() {
    let tau = 3.0;
    let samples = 2049;
    let grid = uniform_grid(tau, samples);

    let mut worst_amp = 0.0f64;
    for &topology in Topology::ALL.iter() {
        for &hopping in &[0.3, 0.5, 1.2, 3.7] {
            let cfg = model(topology, 0.0, hopping, 2.0, tau);
            let traj = sample_trajectory(&cfg, samples).unwrap();
            for (t, p) in grid.iter().zip(traj.populations()) {
                let expected = (hopping * t).cos().powi(2);
                worst_amp = worst_amp.max((p - expected).abs());
            }
        }
    }

    // Monotone population (J*tau <= pi/2) must saturate the bound.
    let mut worst_rel = 0.0f64;
    for &topology in Topology::ALL.iter() {
        for &hopping in &[0.1, 0.35, std::f64::consts::FRAC_PI_6] {
            let cfg = model(topology, 0.0, hopping, 2.0, tau);
            let traj = sample_trajectory(&cfg, samples).unwrap();
            let q = qslt(&traj).unwrap();
            worst_rel = worst_rel.max((q.tau_qsl - tau).abs() / tau);
        }
    }

    let pass = worst_amp <= C3_AMP_TOL && worst_rel <= C3_SATURATION_REL_TOL;
    println!(
        "ACCEPTANCE C3 frozen bath gives |a|^2 = cos^2(Jt) and a saturated bound below the quarter period: {} \
         (worst population dev {:.3e}, limit {:.0e}; worst saturation rel dev {:.3e}, limit {:.0e})",
        verdict(pass),
        worst_amp,
        C3_AMP_TOL,
        worst_rel,
        C3_SATURATION_REL_TOL
    );
    assert!(pass, "population dev {worst_amp:.3e}, saturation rel dev {worst_rel:.3e}");
}

// ---------------------------------------------------------------- C4 --

const C4_AMP_TOL: f64 = 1e-10;
const C4_PLATEAU_TOL: f64 = 1e-3;

/// Single emitter in a Lorentzian bath: the reference both decoupled
/// topologies must reproduce at J = 0.
fn single_emitter_amplitude(t: f64, gamma0: f64, lambda: f64) -> Complex64 {
    let d = Complex64::new(lambda * (lambda - 2.0 * gamma0), 0.0).sqrt();
    let x = d * (0.5 * t);
    (-0.5 * lambda * t).exp() * (x.cosh() + (Complex64::from(lambda) / d) * x.sinh())
}

#[test]
fn c4_decoupled_emitter_reduction_and_common_plateau() {
    let tau = 3.0;
    let samples = 2049;
    let grid = uniform_grid(tau, samples);

    let mut worst = 0.0f64;
    for &topology in &[Topology::IndependentBaths, Topology::SystemOnlyBath] {
        for &gamma0 in &[0.2, 0.9, 3.0, 8.0] {
            let cfg = model(topology, gamma0, 0.0, 2.0, tau);
            let traj = sample_trajectory(&cfg, samples).unwrap();
            for (t, a) in grid.iter().zip(traj.amplitudes()) {
                let dev = (a - single_emitter_amplitude(*t, gamma0, 2.0)).norm();
                worst = worst.max(dev);
            }
        }
    }

    // Shared bath at J = 0: half the excitation is trapped in the
    // antisymmetric dark state, so |a| plateaus at 1/2.
    let cfg = model(Topology::CommonBath, 1.0, 0.0, 2.0, 50.0);
    let plateau_dev = (amplitude_common(50.0, &cfg).norm() - 0.5).abs();

    let pass = worst <= C4_AMP_TOL && plateau_dev <= C4_PLATEAU_TOL;
    println!(
        "ACCEPTANCE C4 J = 0 reduces to the single-emitter closed form; shared bath plateaus at 1/2: {} \
         (worst amplitude dev {:.3e}, limit {:.0e}; plateau dev {:.3e} at t = 50, limit {:.0e})",
        verdict(pass),
        worst,
        C4_AMP_TOL,
        plateau_dev,
        C4_PLATEAU_TOL
    );
    assert!(pass, "amplitude dev {worst:.3e}, plateau dev {plateau_dev:.3e}");
}

// ---------------------------------------------------------------- C5 --

#[test]
fn c5_bound_structure_holds_on_every_sweep_cell() {
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first_violation = String::new();
    for &topology in Topology::ALL.iter() {
        let grid = run_sweep(&SweepSpec::with_topology(topology)).unwrap();
        assert_eq!(grid.failed, 0, "{topology}: {} failed cells", grid.failed);
        for cell in &grid.cells {
            let q = cell.qslt.as_ref().unwrap();
            let ok = (0.0..=1.0).contains(&q.ratio)
                && q.rate_op <= q.rate_hs
                && q.rate_hs <= q.rate_tr
                && matches!(q.tight_norm, NormKind::Op);
            if !ok {
                violations += 1;
                if first_violation.is_empty() {
                    first_violation = format!(
                        "({}, gamma0 = {}, J = {}): ratio = {}, rates = ({}, {}, {}), tight = {}",
                        topology.token(),
                        cell.gamma0,
                        cell.hopping,
                        q.ratio,
                        q.rate_op,
                        q.rate_hs,
                        q.rate_tr,
                        q.tight_norm.token()
                    );
                }
            }
            checked += 1;
        }
    }
    let pass = violations == 0;
    println!(
        "ACCEPTANCE C5 ratio in [0, 1], rate ordering, op-norm tightness on every sweep cell: {} \
         ({checked} cells, {violations} violations{})",
        verdict(pass),
        if first_violation.is_empty() {
            String::new()
        } else {
            format!("; first: {first_violation}")
        }
    );
    assert!(pass, "{violations} violations; first: {first_violation}");
}

// ---------------------------------------------------------------- C6 --

const C6_GRID_BUDGET_SECS: f64 = 10.0;
const C6_SPACING_BAND: (f64, f64) = (0.85, 1.15);
const C6_MONOTONE_SLACK: f64 = 1e-9;

#[test]
fn c6_heatmap_morphology_and_throughput() {
    let spec = SweepSpec::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap();
    let (grid, elapsed) = pool.install(|| {
        let start = Instant::now();
        let grid = run_sweep(&spec).unwrap();
        (grid, start.elapsed().as_secs_f64())
    });
    let nh = grid.hopping_values.len();
    let ng = grid.gamma0_values.len();

    // (a) Oscillation along J at the weakest coupling row: interior
    // minima, refined by a parabola through the three bracketing cells.
    let row: Vec<f64> = (0..nh)
        .map(|ih| grid.cell(0, ih).qslt.as_ref().unwrap().ratio)
        .collect();
    let dj = grid.hopping_values[1] - grid.hopping_values[0];
    let mut minima = Vec::new();
    for i in 1..nh - 1 {
        if row[i] < row[i - 1] && row[i] < row[i + 1] {
            let denom = row[i - 1] - 2.0 * row[i] + row[i + 1];
            let offset = if denom > 0.0 {
                0.5 * dj * (row[i - 1] - row[i + 1]) / denom
            } else {
                0.0
            };
            minima.push(grid.hopping_values[i] + offset);
        }
    }
    let expected_spacing = std::f64::consts::PI / spec.tau;
    let spacings: Vec<f64> = minima.windows(2).map(|w| w[1] - w[0]).collect();
    let spacing_ok = spacings.iter().all(|s| {
        *s >= C6_SPACING_BAND.0 * expected_spacing && *s <= C6_SPACING_BAND.1 * expected_spacing
    });
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;

    // (b) At J = 0 the ratio is non-increasing in gamma0 past the knee.
    let knee = spec.lambda / 2.0;
    let mut monotone_ok = true;
    for ig in 0..ng - 1 {
        if grid.gamma0_values[ig] >= knee {
            let here = grid.cell(ig, 0).qslt.as_ref().unwrap().ratio;
            let next = grid.cell(ig + 1, 0).qslt.as_ref().unwrap().ratio;
            if next > here + C6_MONOTONE_SLACK {
                monotone_ok = false;
            }
        }
    }

    let pass =
        minima.len() >= 3 && spacing_ok && monotone_ok && elapsed <= C6_GRID_BUDGET_SECS;
    println!(
        "ACCEPTANCE C6 heatmap morphology and throughput: {} \
         ({} minima along J at gamma0 = {}, mean spacing {:.4} vs pi/tau = {:.4}, band +/-15%; \
         J = 0 column non-increasing past gamma0 = {}: {}; 50x50 grid in {:.2} s of {:.0} s)",
        verdict(pass),
        minima.len(),
        grid.gamma0_values[0],
        mean_spacing,
        expected_spacing,
        knee,
        monotone_ok,
        elapsed,
        C6_GRID_BUDGET_SECS
    );
    assert!(
        pass,
        "minima {} (need >= 3), spacings {spacings:?} (expected ~{expected_spacing:.4}), \
         monotone_ok {monotone_ok}, elapsed {elapsed:.2} s",
        minima.len()
    );
}

// ---------------------------------------------------------------- C7 --

const C7_RATIO_EPS: f64 = 1e-12;

#[test]
fn c7_common_bath_bound_is_tightest_at_sampled_points() {
    let ratio_at = |topology: Topology, gamma0: f64, hopping: f64| -> f64 {
        let record = evaluate_cell(&SweepSpec::with_topology(topology), gamma0, hopping);
        assert!(
            record.failure.is_none(),
            "({topology}, {gamma0}, {hopping}): {:?}",
            record.failure
        );
        record.qslt.unwrap().ratio
    };
    let mut common_hits = 0;
    let mut system_hits = 0;
    let mut violations = Vec::new();
    for &gamma0 in &[1.0, 5.0, 10.0] {
        for &hopping in &[1.0, 3.0, 5.0] {
            let independent = ratio_at(Topology::IndependentBaths, gamma0, hopping);
            let common = ratio_at(Topology::CommonBath, gamma0, hopping);
            let system_only = ratio_at(Topology::SystemOnlyBath, gamma0, hopping);
            if common <= independent + C7_RATIO_EPS {
                common_hits += 1;
            } else {
                violations.push(format!(
                    "(gamma0 = {gamma0}, J = {hopping}): common = {common:.6} > independent = {independent:.6}"
                ));
            }
            if system_only <= independent + C7_RATIO_EPS {
                system_hits += 1;
            }
        }
    }
    for v in &violations {
        println!("  C7 ordering violation {v}");
    }
    let pass = common_hits >= 8;
    println!(
        "ACCEPTANCE C7 common-bath ratio <= independent-bath ratio at >= 8 of 9 sampled points: {} \
         (common tighter at {common_hits}/9; system-only tighter at {system_hits}/9, recorded)",
        verdict(pass)
    );
    assert!(pass, "common tighter at only {common_hits}/9: {violations:?}");
}

// ---------------------------------------------------------------- C8 --

const C8_HYPERBOLIC_TOL: f64 = 1e-7;
const C8_TRIG_MIN_DEV: f64 = 1e-2;

#[test]
fn c8_interior_function_reading_is_settled_numerically() {
    let report = verify(&SweepSpec::default()).unwrap();
    let reading = report.reading;
    let pass = reading.hyperbolic_dev <= C8_HYPERBOLIC_TOL
        && reading.trig_dev > C8_TRIG_MIN_DEV
        && report.passed();
    println!(
        "ACCEPTANCE C8 hyperbolic reading matches the integrator, trigonometric reading does not: {} \
         (at gamma0 = {}, J = {}, lambda = {}, t = {}: hyperbolic dev {:.3e} <= {:.0e}, \
         trigonometric dev {:.3e} > {:.0e}; full self-check passed: {})",
        verdict(pass),
        reading.gamma0,
        reading.hopping,
        reading.lambda,
        reading.time,
        reading.hyperbolic_dev,
        C8_HYPERBOLIC_TOL,
        reading.trig_dev,
        C8_TRIG_MIN_DEV,
        report.passed()
    );
    assert!(
        pass,
        "hyperbolic {:.3e}, trigonometric {:.3e}, self-check {}",
        reading.hyperbolic_dev,
        reading.trig_dev,
        report.passed()
    );
}

// ---------------------------------------------------------------- C9 --

#[test]
fn c9_csv_bytes_identical_across_threads_and_reruns() {
    let base = std::env::temp_dir().join(format!("qslt-acceptance-c9-{}", std::process::id()));
    let run = |tag: &str, threads: &str| -> Vec<u8> {
        let out_dir = base.join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_qslt"))
            .args([
                "sweep",
                "--gamma0",
                "0.1:10:20",
                "--J",
                "0:10:20",
                "--time-samples",
                "513",
                "--threads",
                threads,
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success(), "sweep failed for {tag}");
        std::fs::read(out_dir.join("sweep.csv")).unwrap()
    };
    let serial = run("serial", "1");
    let parallel = run("parallel", "8");
    let repeat = run("repeat", "8");
    let pass = serial == parallel && parallel == repeat;
    println!(
        "ACCEPTANCE C9 CSV bytes identical across thread counts and repeat runs: {} \
         ({} bytes, 1-thread vs 8-thread vs repeated 8-thread)",
        verdict(pass),
        serial.len()
    );
    std::fs::remove_dir_all(&base).ok();
    assert!(pass);
}

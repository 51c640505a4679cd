//! Adaptive Dormand–Prince 5(4) integration over complex state vectors,
//! with exact landing on caller-supplied output grids.
//!
//! The observer receives the state *and* the right-hand side at every grid
//! point, so downstream consumers get true derivatives rather than
//! finite differences.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t:.6e}")]
    StepSizeUnderflow { t: f64 },
    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// Difference between the 5th-order and embedded 4th-order weights.
const ERR_W: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = rhs(t, y) from grid[0], calling `observe(k, t, y, y')`
/// exactly at every grid point (including the first). The grid must be
/// strictly increasing.
pub fn integrate_over_grid<F, O>(
    mut rhs: F,
    y0: &[Complex64],
    grid: &[f64],
    opts: &OdeOptions,
    mut observe: O,
) -> Result<(), OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(usize, f64, &[Complex64], &[Complex64]),
{
    assert!(grid.len() >= 2, "need at least two grid points");
    assert!(
        grid.windows(2).all(|w| w[1] > w[0]),
        "grid must be strictly increasing"
    );
    let dim = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = y0.to_vec();
    let mut t = grid[0];

    let mut k = vec![vec![zero; dim]; 7];
    let mut ytmp = vec![zero; dim];
    let mut ynew = vec![zero; dim];

    rhs(t, &y, &mut k[0]);
    observe(0, t, &y, &k[0]);

    let t_end = grid[grid.len() - 1];
    let span = t_end - grid[0];
    let mut h = (span / (grid.len() as f64 - 1.0) / 4.0)
        .min(span * 1e-2)
        .max(1e-8);
    let mut steps = 0usize;
    let mut next_out = 1usize;

    while next_out < grid.len() {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }
        steps += 1;

        // Land exactly on the next output point when it is within reach.
        let mut h_try = h.min(t_end - t);
        let landing = t + h_try >= grid[next_out] - 1e-14 * t_end.abs().max(1.0);
        if landing {
            h_try = grid[next_out] - t;
        }

        for s in 1..7 {
            let target: &mut [Complex64] = if s == 6 { &mut ynew } else { &mut ytmp };
            for i in 0..dim {
                let mut acc = zero;
                for (j, aj) in A[s - 1][..s].iter().enumerate() {
                    if *aj != 0.0 {
                        acc += *aj * k[j][i];
                    }
                }
                target[i] = y[i] + h_try * acc;
            }
            let (done, todo) = k.split_at_mut(s);
            let _ = done;
            if s == 6 {
                rhs(t + C[6] * h_try, &ynew, &mut todo[0]);
            } else {
                rhs(t + C[s] * h_try, &ytmp, &mut todo[0]);
            }
        }

        // Embedded error estimate, RMS over mixed abs/rel scales.
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut de = zero;
            for (e, kj) in ERR_W.iter().zip(k.iter()) {
                if *e != 0.0 {
                    de += *e * kj[i];
                }
            }
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(ynew[i].norm());
            let r = h_try * de.norm() / sc;
            err_sq += r * r;
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            t += h_try;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);

            if landing {
                t = grid[next_out];
                observe(next_out, t, &y, &k[0]);
                next_out += 1;
            }
        } else if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t });
        }

        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h_try * fac).min(span);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::uniform_grid;

    #[test]
    fn exponential_decay_to_tolerance() {
        let grid = uniform_grid(5.0, 51);
        let mut got = Vec::new();
        integrate_over_grid(
            |_, y, dy| dy[0] = -y[0],
            &[Complex64::new(1.0, 0.0)],
            &grid,
            &OdeOptions::default(),
            |_, t, y, dy| {
                got.push((t, y[0], dy[0]));
            },
        )
        .unwrap();
        assert_eq!(got.len(), 51);
        for (t, y, dy) in got {
            let exact = (-t).exp();
            assert!((y.re - exact).abs() < 5e-10, "t={t}");
            assert!((dy + y).norm() < 1e-12, "derivative is the rhs, exactly");
        }
    }

    #[test]
    fn oscillator_preserves_norm_and_phase() {
        // y' = i y on a long horizon; checks both accuracy and that the
        // observer lands exactly on the requested times.
        let grid = uniform_grid(20.0, 101);
        let mut last = Complex64::new(0.0, 0.0);
        let mut count = 0;
        integrate_over_grid(
            |_, y, dy| dy[0] = Complex64::new(0.0, 1.0) * y[0],
            &[Complex64::new(1.0, 0.0)],
            &grid,
            &OdeOptions::default(),
            |k, t, y, _| {
                assert_eq!(t, grid[k]);
                last = y[0];
                count += 1;
            },
        )
        .unwrap();
        assert_eq!(count, 101);
        let exact = Complex64::new(20.0f64.cos(), 20.0f64.sin());
        assert!((last - exact).norm() < 5e-9);
        assert!((last.norm() - 1.0).abs() < 5e-9);
    }

    #[test]
    fn coupled_rotation_matches_matrix_exponential() {
        // y1' = -i y2, y2' = -i y1 → y1(t) = cos t, y2(t) = -i sin t.
        let grid = uniform_grid(3.0, 31);
        let mut end = (Complex64::default(), Complex64::default());
        let opts = OdeOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..OdeOptions::default()
        };
        integrate_over_grid(
            |_, y, dy| {
                dy[0] = Complex64::new(0.0, -1.0) * y[1];
                dy[1] = Complex64::new(0.0, -1.0) * y[0];
            },
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            &grid,
            &opts,
            |_, _, y, _| end = (y[0], y[1]),
        )
        .unwrap();
        assert!((end.0 - Complex64::new(3.0f64.cos(), 0.0)).norm() < 1e-10);
        assert!((end.1 - Complex64::new(0.0, -(3.0f64.sin()))).norm() < 1e-10);
    }

    #[test]
    fn step_budget_is_enforced() {
        let grid = uniform_grid(1.0, 11);
        let opts = OdeOptions {
            max_steps: 3,
            ..OdeOptions::default()
        };
        let err = integrate_over_grid(
            |_, y, dy| dy[0] = Complex64::new(0.0, 200.0) * y[0],
            &[Complex64::new(1.0, 0.0)],
            &grid,
            &opts,
            |_, _, _, _| {},
        )
        .unwrap_err();
        assert!(matches!(err, OdeError::TooManySteps(3)));
    }
}

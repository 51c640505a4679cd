//! Real-coefficient cubic solver for the single-bath decay rates.
//!
//! With only the first emitter damped, the Laplace image of the excitation
//! amplitude is s(s+λ) over the cubic
//!
//! ```text
//! 2s³ + 2λs² + (2J² + γ₀λ)s + 2J²λ = 0,
//! ```
//!
//! so `a(t)` is a sum of three exponentials e^{uᵢt} over its roots. Real
//! coefficients mean the roots are either all real or one real plus a
//! conjugate pair; they are returned in a deterministic order (ascending
//! real part, then imaginary part).

use num_complex::Complex64;

/// Relative root-separation floor below which the partial-fraction
/// residues lose too many digits to cancellation; callers should switch
/// to the ODE route.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct CubicRoots {
    /// Roots sorted by (re, im).
    pub roots: [Complex64; 3],
    /// Smallest pairwise distance between roots.
    pub min_separation: f64,
    /// True when `min_separation < DEGENERACY_REL_TOL · max(|uᵢ|, 1)`.
    pub near_degenerate: bool,
}

impl CubicRoots {
    /// Largest residual |u³ + c₂u² + c₁u + c₀| over the three roots,
    /// relative to the root magnitude scale.
    pub fn max_relative_residual(&self, c2: f64, c1: f64, c0: f64) -> f64 {
        let scale = self
            .roots
            .iter()
            .map(|u| u.norm())
            .fold(1.0f64, f64::max)
            .powi(3);
        self.roots
            .iter()
            .map(|&u| (((u + c2) * u + c1) * u + c0).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// Roots of the monic cubic x³ + c₂x² + c₁x + c₀ with real coefficients.
pub fn solve_monic_cubic(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // Depressed form t³ + pt + q via x = t − c₂/3.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;

    let mut roots = if p == 0.0 && q == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let disc = -4.0 * p.powi(3) - 27.0 * q * q;
        if disc >= 0.0 {
            // Three real roots: trigonometric form (p < 0 here).
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let mut r = [0.0f64; 3];
            for (k, rk) in r.iter_mut().enumerate() {
                *rk = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            }
            [
                Complex64::new(r[0], 0.0),
                Complex64::new(r[1], 0.0),
                Complex64::new(r[2], 0.0),
            ]
        } else {
            // One real root plus a conjugate pair: Cardano with a
            // cancellation-safe branch for the real cube-root pair.
            let s = (q * q / 4.0 + p.powi(3) / 27.0).sqrt();
            let u = if q >= 0.0 { -q / 2.0 - s } else { -q / 2.0 + s };
            let u = u.cbrt();
            let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
            let real = u + v;
            let im = 3.0f64.sqrt() / 2.0 * (u - v);
            [
                Complex64::new(real, 0.0),
                Complex64::new(-real / 2.0, im),
                Complex64::new(-real / 2.0, -im),
            ]
        }
    };

    for r in roots.iter_mut() {
        *r -= shift;
        // A couple of Newton polish steps on the monic cubic push the
        // residual to roundoff without disturbing the branch structure.
        for _ in 0..3 {
            let f = ((*r + c2) * *r + c1) * *r + c0;
            let df = (3.0 * *r + 2.0 * c2) * *r + c1;
            if df.norm() > 1e-300 {
                let step = f / df;
                if step.norm() < 1.0 + r.norm() {
                    *r -= step;
                }
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Decay-rate cubic for the single-bath topology, in monic form
/// s³ + λs² + (J² + γ₀λ/2)s + J²λ.
pub fn solve_cubic(hopping: f64, lambda: f64, gamma0: f64) -> CubicRoots {
    let c2 = lambda;
    let c1 = hopping * hopping + 0.5 * gamma0 * lambda;
    let c0 = hopping * hopping * lambda;
    let roots = solve_monic_cubic(c2, c1, c0);
    let mut min_separation = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            min_separation = min_separation.min((roots[i] - roots[j]).norm());
        }
    }
    let scale = roots.iter().map(|u| u.norm()).fold(1.0f64, f64::max);
    CubicRoots {
        roots,
        min_separation,
        near_degenerate: min_separation < DEGENERACY_REL_TOL * scale,
    }
}

//! Plain-text rendering of the self-check report.

use std::fmt::Write as _;

use qslt_core::sweep::{VerifyPoint, VerifyReport};
use qslt_core::Topology;

fn worst_for<'a>(
    report: &'a VerifyReport,
    topology: Topology,
    key: impl Fn(&VerifyPoint) -> f64,
) -> Option<&'a VerifyPoint> {
    report
        .points
        .iter()
        .filter(|p| p.topology == topology)
        .max_by(|a, b| key(a).total_cmp(&key(b)))
}

/// Renders the report as a human-readable block, one section per check.
pub fn render(report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "self-check: closed form vs reference integrators");
    let _ = writeln!(
        out,
        "  tolerances: amplitude {:.0e}, ratio {:.0e}",
        report.amp_tolerance, report.ratio_tolerance
    );
    for &topology in Topology::ALL.iter() {
        let amp = worst_for(report, topology, |p| p.amp_dev);
        let ratio = worst_for(report, topology, |p| p.ratio_dev);
        if let (Some(a), Some(r)) = (amp, ratio) {
            let _ = writeln!(
                out,
                "  {:<6} worst |da| = {:.3e} at (gamma0 = {:.3}, J = {:.3}); worst |dratio| = {:.3e}",
                topology.token(),
                a.amp_dev,
                a.gamma0,
                a.hopping,
                r.ratio_dev
            );
        }
        let fallbacks = report
            .points
            .iter()
            .filter(|p| p.topology == topology && p.fallback)
            .count();
        if fallbacks > 0 {
            let _ = writeln!(
                out,
                "         {fallbacks} point(s) used the kernel fallback (degenerate closed form)"
            );
        }
    }
    let discrete: Vec<&VerifyPoint> = report
        .points
        .iter()
        .filter(|p| p.discrete_dev.is_some())
        .collect();
    if !discrete.is_empty() {
        let _ = writeln!(
            out,
            "  discrete-bath cross-check (tolerance {:.0e}):",
            report.discrete_tolerance
        );
        for p in discrete {
            let _ = writeln!(
                out,
                "    {:<6} (gamma0 = {:.3}, J = {:.3}): sup dev = {:.3e}",
                p.topology.token(),
                p.gamma0,
                p.hopping,
                p.discrete_dev.unwrap()
            );
        }
    }

    let r = &report.reading;
    let _ = writeln!(
        out,
        "reading check at (gamma0 = {}, J = {}, lambda = {}, t = {}):",
        r.gamma0, r.hopping, r.lambda, r.time
    );
    let _ = writeln!(
        out,
        "  hyperbolic interior function: dev = {:.3e} (must be <= {:.0e})",
        r.hyperbolic_dev, report.amp_tolerance
    );
    let _ = writeln!(
        out,
        "  trigonometric interior function: dev = {:.3e} (must exceed 1e-2 to be conclusive)",
        r.trig_dev
    );

    let _ = writeln!(
        out,
        "cross-topology ordering at {} sampled points:",
        report.ordering.len()
    );
    let _ = writeln!(
        out,
        "  common <= independent at {}/{} points",
        report.common_not_slower_hits(),
        report.ordering.len()
    );
    let _ = writeln!(
        out,
        "  system-only <= independent at {}/{} points",
        report.system_only_not_slower_hits(),
        report.ordering.len()
    );
    for o in &report.ordering {
        if !o.common_not_slower() {
            let _ = writeln!(
                out,
                "  violation at (gamma0 = {}, J = {}): common = {:.6}, independent = {:.6}",
                o.gamma0, o.hopping, o.ratio_common, o.ratio_independent
            );
        }
    }

    if report.passed() {
        let _ = writeln!(out, "result: PASS");
    } else {
        let _ = writeln!(out, "result: FAIL");
        if let Some(w) = report.worst_amplitude() {
            let _ = writeln!(
                out,
                "  worst amplitude deviation: {:.3e} at ({}, gamma0 = {}, J = {})",
                w.amp_dev,
                w.topology.token(),
                w.gamma0,
                w.hopping
            );
        }
        if let Some(w) = report.worst_ratio() {
            let _ = writeln!(
                out,
                "  worst ratio deviation: {:.3e} at ({}, gamma0 = {}, J = {})",
                w.ratio_dev,
                w.topology.token(),
                w.gamma0,
                w.hopping
            );
        }
    }
    out
}

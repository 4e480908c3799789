//! Chart data invariants and the total flux through the sphere.

use std::f64::consts::PI;

use super::{planar, sphere, CheckResult, Comparison, VerifyOptions, FLAT_CASES};
use crate::geometry::{validate_geometry, ChartedGeometry, ValidationOptions};
use crate::linalg::c;
use crate::sampling::{box_point, stream};

fn invariant_checks(label: &str, geo: &ChartedGeometry, half_width: f64, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut rng = stream(opts.seed, &format!("geometry/{label}"));
    let samples: Vec<Vec<f64>> = (0..opts.count(50)).map(|_| box_point(&mut rng, geo.dim(), half_width)).collect();
    match validate_geometry(geo, &samples, &ValidationOptions::default()) {
        Ok(report) => report
            .residuals
            .into_iter()
            .map(|r| CheckResult {
                name: format!("{}[{label}]", r.name),
                criterion: None,
                value: r.max_residual,
                tolerance: r.tolerance,
                comparison: Comparison::Below,
                samples: report.samples,
                errors: 0,
                passed: r.passed,
                expected_degenerate: false,
                note: r.location.map(|at| format!("worst at {at:?}")),
            })
            .collect(),
        Err(e) => vec![CheckResult {
            name: format!("validate[{label}]"),
            criterion: None,
            value: f64::NAN,
            tolerance: 0.0,
            comparison: Comparison::Below,
            samples: samples.len(),
            errors: 1,
            passed: false,
            expected_degenerate: false,
            note: Some(e.to_string()),
        }],
    }
}

/// `∫ β₁₂ du₁du₂` over the chart in polar coordinates (Simpson's rule), with
/// the rotationally symmetric field sampled on the positive `u₁` axis and the
/// tail beyond `ρ_max` added from the `1/ρ³` decay of the integrand.
fn radial_flux(geo: &ChartedGeometry, rho_max: f64, intervals: usize) -> f64 {
    let h = rho_max / intervals as f64;
    let f = |rho: f64| geo.beta(&[c(rho), c(0.0)])[(0, 1)].re * rho;
    let mut sum = f(0.0) + f(rho_max);
    for i in 1..intervals {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum *= h / 3.0;
    // ∫_ρ^∞ β₁₂ ρ' dρ' ≈ ½ρ²β₁₂(ρ) for β₁₂ ∝ ρ⁻⁴
    let tail = 0.5 * rho_max * rho_max * geo.beta(&[c(rho_max), c(0.0)])[(0, 1)].re;
    -2.0 * PI * (sum + tail)
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    for &(b, m) in &FLAT_CASES {
        checks.extend(invariant_checks(&format!("flat,B={b},m={m}"), &planar(b, m), 2.0, opts));
    }
    let spheres = [(1.0, 1.0), (1.3, 0.7)];
    for &(r, b) in &spheres {
        checks.extend(invariant_checks(&format!("sphere,r={r},B={b}"), &sphere(r, b), 2.5, opts));
    }
    let worst = spheres
        .iter()
        .map(|&(r, b)| {
            let expected = 4.0 * PI * r * r * b;
            (radial_flux(&sphere(r, b), 200.0, 40_000) - expected).abs() / expected
        })
        .fold(0.0, f64::max);
    let sampled = super::Sampled { worst, samples: spheres.len(), errors: 0, first_error: None };
    checks.push(CheckResult::below("sphere_flux_4pi_r2_b", None, sampled, 1e-6));
    checks
}

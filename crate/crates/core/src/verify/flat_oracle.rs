//! Engine against the closed forms on the plane with a constant field.

use std::f64::consts::PI;

use rand::Rng;

use super::{planar, sample_max, CheckResult, VerifyOptions, FLAT_CASES};
use crate::flow::{flow_complex, flow_real, ComplexTime};
use crate::geometry::PhasePoint;
use crate::kahler::{
    ddbar_residual, flat_weight_squared, kappa2, potential_f, resolve_kappa1_coefficient, section_weight,
};
use crate::linalg::{max_abs, C, I};
use crate::oracles::{
    flat_complex_coordinates, flat_f_sigma, flat_flow_oracle, flat_kappa2, flat_pushforward, FlatParams,
};
use crate::sampling::{box_point, stream, SampleRng};

/// `x` in `(−2, 2)²`, `|p| ≤ 2`.
pub(crate) fn plane_point(rng: &mut SampleRng) -> PhasePoint {
    let x = box_point(rng, 2, 2.0);
    let angle = rng.random_range(0.0..2.0 * PI);
    let len = rng.random_range(0.0..2.0);
    PhasePoint::real(&x, &[len * angle.cos(), len * angle.sin()])
}

/// Uniform in the disk `|σ| ≤ radius`.
pub(crate) fn disk_time(rng: &mut SampleRng, radius: f64) -> C {
    let r = radius * rng.random_range(0.0_f64..1.0).sqrt();
    C::from_polar(r, rng.random_range(0.0..2.0 * PI))
}

struct Sample {
    case: usize,
    z: PhasePoint,
    real: f64,
    complex: C,
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut rng = stream(opts.seed, "flat-oracle");
    let samples: Vec<Sample> = (0..opts.count(200))
        .map(|k| Sample {
            case: k % FLAT_CASES.len(),
            z: plane_point(&mut rng),
            real: rng.random_range(-1.2..1.2),
            complex: disk_time(&mut rng, 1.2),
        })
        .collect();
    let geos: Vec<_> = FLAT_CASES.iter().map(|&(b, m)| planar(b, m)).collect();
    let params: Vec<_> = FLAT_CASES.iter().map(|&(b, m)| FlatParams { field: b, mass_freq: m }).collect();
    let flow = opts.flow;
    let mut checks = Vec::new();

    checks.push(CheckResult::below(
        "flow_real_vs_closed_form",
        Some(1),
        sample_max(&samples, |s| {
            let engine = flow_real(&geos[s.case], &s.z, s.real, &flow.without_jacobian())?;
            Ok(engine.z.distance(&flat_flow_oracle(params[s.case], &s.z, C::from(s.real))?))
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "flow_complex_vs_closed_form",
        Some(1),
        sample_max(&samples, |s| {
            let mut worst = 0.0_f64;
            for t in [s.complex, I] {
                let engine = flow_complex(&geos[s.case], &s.z, &ComplexTime::new(t), &flow.without_jacobian())?;
                worst = worst.max(engine.z.distance(&flat_flow_oracle(params[s.case], &s.z, t)?));
            }
            Ok(worst)
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "tangent_map_vs_closed_form",
        None,
        sample_max(&samples, |s| {
            let engine = flow_complex(&geos[s.case], &s.z, &ComplexTime::new(s.complex), &flow)?;
            Ok(max_abs(&(engine.jacobian()? - flat_pushforward(params[s.case], s.complex))))
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "larmor_period",
        None,
        sample_max(&samples[..opts.count(20).min(samples.len())], |s| {
            let period = 2.0 * PI / params[s.case].reduced();
            Ok(flow_real(&geos[s.case], &s.z, period, &flow.without_jacobian())?.z.distance(&s.z))
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "complex_coordinates",
        Some(2),
        sample_max(&samples, |s| {
            let engine = flow_complex(&geos[s.case], &s.z, &ComplexTime::new(I), &flow.without_jacobian())?;
            let (z1, z2) = flat_complex_coordinates(params[s.case], &s.z.real_coords()[..2], &s.z.real_coords()[2..]);
            Ok((engine.z.x[0] - z1).norm().max((engine.z.x[1] - z2).norm()))
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "f_sigma_vs_closed_form",
        None,
        sample_max(&samples[..opts.count(50)], |s| {
            let mut worst = 0.0_f64;
            for t in [s.complex, I, -I] {
                let engine = potential_f(&geos[s.case], &s.z, &ComplexTime::new(t), &flow)?;
                worst = worst.max((engine - flat_f_sigma(params[s.case], &s.z, t)?).norm());
            }
            Ok(worst)
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "kappa2_vs_closed_form",
        Some(7),
        sample_max(&samples[..opts.count(50)], |s| {
            let xp = s.z.real_coords();
            let (z1, z2) = flat_complex_coordinates(params[s.case], &xp[..2], &xp[2..]);
            Ok((kappa2(&geos[s.case], &s.z, &flow)? - flat_kappa2(params[s.case], z1, z2)).abs())
        }),
        1e-7,
    ));
    checks.push(CheckResult::below(
        "ddbar_kappa2_is_twisted_form",
        None,
        sample_max(&samples[..opts.count(10)], |s| ddbar_residual(&geos[s.case], params[s.case], &s.z, 1e-3, &flow)),
        1e-5,
    ));
    checks.push(CheckResult::below(
        "section_weight_vs_closed_form",
        None,
        sample_max(&samples[..opts.count(20)], |s| {
            let xp = s.z.real_coords();
            let mut worst = 0.0_f64;
            for k in 1..=2 {
                let w = section_weight(&geos[s.case], &s.z, k, &flow)?.norm_sqr();
                let exact = flat_weight_squared(params[s.case], &xp[..2], &xp[2..], k);
                worst = worst.max((w - exact).abs() / exact.max(1.0));
            }
            Ok(worst)
        }),
        1e-9,
    ));
    checks.push(kappa1_check(opts, &geos, &params, &samples[..opts.count(20)]));
    checks
}

/// Tests both candidate tanh coefficients of `κ₁` and passes iff one of them
/// satisfies `Im ∂̄κ₁ = θ^A` on every field strength.
fn kappa1_check(
    opts: &VerifyOptions,
    geos: &[crate::geometry::ChartedGeometry],
    params: &[FlatParams],
    samples: &[Sample],
) -> CheckResult {
    let tol = 1e-6;
    let flow = opts.flow;
    let mut notes = Vec::new();
    let mut worst = 0.0_f64;
    let mut chosen = Vec::new();
    let mut errors = 0;
    for (case, (geo, p)) in geos.iter().zip(params).enumerate() {
        let pts: Vec<PhasePoint> = samples.iter().filter(|s| s.case == case).map(|s| s.z.clone()).collect();
        match resolve_kappa1_coefficient(geo, *p, &pts, tol, &flow) {
            Ok(res) => {
                let r = match res.chosen {
                    Some(crate::kahler::TanhCoefficient::HalfB) => res.residual_half_b,
                    Some(crate::kahler::TanhCoefficient::FullB) => res.residual_full_b,
                    None => res.residual_half_b.min(res.residual_full_b),
                };
                worst = worst.max(r);
                chosen.push(res.chosen);
                notes.push(format!("B̃={}: {}", p.reduced(), res.note()));
            }
            Err(e) => {
                errors += 1;
                notes.push(format!("B̃={}: {e}", p.reduced()));
            }
        }
    }
    let consistent = chosen.iter().all(|c| c.is_some() && *c == chosen[0]);
    let sampled = super::Sampled { worst, samples: samples.len(), errors, first_error: None };
    let mut check = CheckResult::below("kappa1_adaptedness", Some(7), sampled, tol).with_note(notes.join("; "));
    check.passed &= consistent;
    check
}

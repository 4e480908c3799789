//! Engine and embedding map against the rotation exponential on the sphere.

use rand::Rng;

use super::flat_oracle::disk_time;
use super::{sample_max, sample_min, sphere, CheckResult, VerifyOptions};
use crate::error::Result;
use crate::flow::{flow_complex, ComplexTime};
use crate::geometry::PhasePoint;
use crate::linalg::{c, C};
use crate::oracles::{
    chart_to_embedding, im_a_modulus, ima_display, sphere_embedding_map, sphere_flow_oracle, sphere_moment_map,
    SphereState, V3,
};
use crate::sampling::{sphere_state, stream, tube_point};

/// `(r, B)` pairs checked against the oracle.
const SPHERE_CASES: [(f64, f64); 2] = [(1.0, 1.0), (1.3, 0.7)];

fn dot(a: &V3, b: &V3) -> C {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn vmax(v: &V3) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn state_gap(a: &SphereState, b: &SphereState) -> f64 {
    a.distance(b)
}

struct FlowSample {
    case: usize,
    z: PhasePoint,
    real: f64,
    complex: C,
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let flow = opts.flow.without_jacobian();

    let mut rng = stream(opts.seed, "sphere-oracle/states");
    let states: Vec<SphereState> = (0..opts.count(500))
        .map(|k| {
            let (r, b) = SPHERE_CASES[k % SPHERE_CASES.len()];
            sphere_state(&mut rng, r, b, 3.0)
        })
        .collect();
    checks.push(CheckResult::below(
        "embedding_on_complex_sphere",
        Some(10),
        sample_max(&states, |s| Ok((dot(&sphere_embedding_map(s), &sphere_embedding_map(s)) - c(s.r * s.r)).norm())),
        1e-12,
    ));
    checks.push(CheckResult::below(
        "moment_map_square",
        None,
        sample_max(&states, |s| {
            let j = sphere_moment_map(s);
            let p2 = dot(&s.p, &s.p);
            let expected = p2 * (s.r * s.r) + c(s.r.powi(4) * s.b * s.b);
            Ok((dot(&j, &j) - expected).norm() / expected.norm().max(1.0))
        }),
        1e-12,
    ));
    let times: Vec<C> = (0..states.len()).map(|_| disk_time(&mut rng, 1.2)).collect();
    let indexed: Vec<usize> = (0..states.len()).collect();
    checks.push(CheckResult::below(
        "oracle_preserves_constraints",
        None,
        sample_max(&indexed, |&k| Ok(sphere_flow_oracle(&states[k], times[k]).constraint_residual())),
        1e-12,
    ));
    checks.push(CheckResult::below(
        "im_a_closed_form",
        None,
        sample_max(&states, |s| {
            let a = sphere_embedding_map(s);
            let im = (a[0].im.powi(2) + a[1].im.powi(2) + a[2].im.powi(2)).sqrt();
            let p = dot(&s.p, &s.p).re.sqrt();
            Ok((im - im_a_modulus(p, s.r, s.b)).abs())
        }),
        1e-12,
    ));

    let mut rng = stream(opts.seed, "sphere-oracle/flows");
    let geos: Vec<_> = SPHERE_CASES.iter().map(|&(r, b)| sphere(r, b)).collect();
    let flows: Vec<FlowSample> = (0..opts.count(100))
        .map(|k| {
            let case = k % SPHERE_CASES.len();
            FlowSample {
                case,
                z: tube_point(&mut rng, &geos[case], 1.5, 2.0),
                real: rng.random_range(-1.2..1.2),
                complex: disk_time(&mut rng, 1.2),
            }
        })
        .collect();
    let engine_end = |s: &FlowSample, t: C| -> Result<SphereState> {
        let (r, b) = SPHERE_CASES[s.case];
        let end = flow_complex(&geos[s.case], &s.z, &ComplexTime::new(t), &flow)?;
        Ok(chart_to_embedding(&end.z, r, b))
    };
    checks.push(CheckResult::below(
        "engine_vs_rotation_oracle",
        Some(10),
        sample_max(&flows, |s| {
            let (r, b) = SPHERE_CASES[s.case];
            let start = chart_to_embedding(&s.z, r, b);
            let mut worst = 0.0_f64;
            for t in [C::from(s.real), s.complex, C::new(0.0, 1.0)] {
                let g = state_gap(&engine_end(s, t)?, &sphere_flow_oracle(&start, t));
                worst = worst.max(g);
            }
            Ok(worst)
        }),
        1e-8,
    ));
    checks.push(CheckResult::below(
        "moment_map_conservation",
        Some(10),
        sample_max(&flows, |s| {
            let (r, b) = SPHERE_CASES[s.case];
            let j0 = sphere_moment_map(&chart_to_embedding(&s.z, r, b));
            let mut worst = 0.0_f64;
            for t in [C::from(s.real), s.complex] {
                worst = worst.max(vmax(&(sphere_moment_map(&engine_end(s, t)?) - j0)));
            }
            Ok(worst)
        }),
        1e-9,
    ));

    // |Im a| along a ray p = s·v at a fixed base point.
    let (r, b) = SPHERE_CASES[0];
    let ray: Vec<f64> = (1..=opts.count(100)).map(|k| 3.0 * k as f64 / opts.count(100) as f64).collect();
    let ima_on_ray = |len: f64| {
        let s = SphereState::real([0.0, 0.0, r], [len, 0.0, 0.0], r, b);
        let a = sphere_embedding_map(&s);
        (a[0].im.powi(2) + a[1].im.powi(2) + a[2].im.powi(2)).sqrt()
    };
    let steps: Vec<usize> = (1..ray.len()).collect();
    let display_gap = ray.iter().map(|&p| (ima_display(p, r, b) - im_a_modulus(p, r, b)).abs()).fold(0.0, f64::max);
    checks.push(
        CheckResult::above(
            "im_a_monotone_in_p",
            Some(10),
            sample_min(&steps, |&k| Ok(ima_on_ray(ray[k]) - ima_on_ray(ray[k - 1]))),
            0.0,
        )
        .with_note(format!(
            "|Im a| = (sinh L/L)|p| with L = √(p²+r²B²)/r; the variant with sinh(p²+r²B²) differs by up to {display_gap:.3e} on this ray"
        )),
    );

    let mut rng = stream(opts.seed, "sphere-oracle/pairs");
    let pairs: Vec<(SphereState, SphereState)> =
        (0..opts.count(200)).map(|_| (sphere_state(&mut rng, r, b, 3.0), sphere_state(&mut rng, r, b, 3.0))).collect();
    checks.push(CheckResult::above(
        "injectivity_margin",
        Some(10),
        sample_min(&pairs, |(s1, s2)| {
            let gap = vmax(&(sphere_embedding_map(s1) - sphere_embedding_map(s2)));
            Ok(gap / state_gap(s1, s2))
        }),
        1e-6,
    ));
    checks
}

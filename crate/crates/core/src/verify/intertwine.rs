//! Fiber inversion between the `β` and `−β` structures.

use rand::Rng;

use super::flat_oracle::plane_point;
use super::{planar, sample_max, sphere, CheckResult, VerifyOptions, FLAT_CASES};
use crate::flow::ComplexTime;
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::intertwine::{check_flow_reversal, check_frame_intertwine, check_frame_intertwine_shifted, nu_push};
use crate::linalg::{subspace_distance, C, I};
use crate::oracles::{flat_flow_oracle, FlatParams};
use crate::sampling::{stream, tube_point};
use crate::structure::frame_at;

struct Sample {
    z: PhasePoint,
    sigma: f64,
    t: C,
}

fn samples(opts: &VerifyOptions, label: &str, geo: &ChartedGeometry, nominal: usize) -> Vec<Sample> {
    let mut rng = stream(opts.seed, &format!("intertwine/{label}"));
    (0..opts.count(nominal))
        .map(|_| Sample {
            z: tube_point(&mut rng, geo, 1.5, 2.0),
            sigma: rng.random_range(-1.2..1.2),
            t: C::new(rng.random_range(-0.8..0.8), rng.random_range(0.3..0.9)),
        })
        .collect()
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let flow = opts.flow;
    let at_i = ComplexTime::new(I);

    // Both sides from the closed form: ν Φ^{−B}_σ ν z = Φ^B_{−σ} z.
    let mut rng = stream(opts.seed, "intertwine/closed-form");
    let closed: Vec<(usize, PhasePoint, f64)> = (0..opts.count(50))
        .map(|k| (k % FLAT_CASES.len(), plane_point(&mut rng), rng.random_range(-1.2..1.2)))
        .collect();
    checks.push(CheckResult::below(
        "flow_reversal_closed_form[flat]",
        Some(9),
        sample_max(&closed, |(k, z, s)| {
            let (b, m) = FLAT_CASES[*k];
            let lhs = flat_flow_oracle(FlatParams { field: -b, mass_freq: m }, &z.fiber_inverted(), C::from(*s))?;
            let rhs = flat_flow_oracle(FlatParams { field: b, mass_freq: m }, z, C::from(-*s))?;
            Ok(lhs.fiber_inverted().distance(&rhs))
        }),
        1e-9,
    ));

    let cases: [(&str, ChartedGeometry, f64, f64); 3] = [
        ("flat[B=1]", planar(1.0, 1.0), 1e-9, 1e-7),
        ("flat[B=0]", planar(0.0, 1.0), 1e-9, 1e-8),
        ("sphere[r=1,B=1]", sphere(1.0, 1.0), 1e-8, 1e-6),
    ];
    for (label, geo, flow_tol, frame_tol) in cases {
        let pts = samples(opts, label, &geo, 40);
        checks.push(CheckResult::below(
            format!("flow_reversal[{label}]"),
            Some(9),
            sample_max(&pts, |s| check_flow_reversal(&geo, &s.z, s.sigma, &flow)),
            flow_tol,
        ));
        let frames = &pts[..opts.count(20).min(pts.len())];
        checks.push(CheckResult::below(
            format!("frame_intertwine[{label}]"),
            Some(9),
            sample_max(frames, |s| check_frame_intertwine(&geo, &s.z, &at_i, &flow)),
            frame_tol,
        ));
        checks.push(CheckResult::below(
            format!("frame_intertwine_general_time[{label}]"),
            None,
            sample_max(frames, |s| check_frame_intertwine(&geo, &s.z, &ComplexTime::new(s.t), &flow)),
            1e-6,
        ));
        checks.push(CheckResult::below(
            format!("frame_intertwine_shifted[{label}]"),
            Some(9),
            sample_max(frames, |s| check_frame_intertwine_shifted(&geo, &s.z, &ComplexTime::new(s.t), &flow)),
            1e-6,
        ));
        checks.push(CheckResult::below(
            format!("involution[{label}]"),
            None,
            sample_max(frames, |s| {
                let f = frame_at(&geo, &s.z, &at_i, &flow)?;
                subspace_distance(&nu_push(&nu_push(&f.columns)), &f.columns)
            }),
            1e-10,
        ));
    }
    checks
}

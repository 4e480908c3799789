//! Lagrangian frames, the complex structure they define, and its integrability.

use super::{default_geometries, planar, sample_max, sample_min, sphere, CheckResult, VerifyOptions};
use crate::flow::{flow_complex, ComplexTime};
use crate::geometry::PhasePoint;
use crate::linalg::{max_abs, real_part, subspace_distance, C, I};
use crate::oracles::{zero_section_linearization_metric, zero_section_positivity};
use crate::sampling::{stream, tube_point, zero_section_point};
use crate::structure::{
    assemble_j, frame_at, integrability_residual, positivity_matrix, transversality_check, vertical_margin,
};

const ZERO_SECTION_TIMES: [C; 3] = [C::new(0.5, 0.0), C::new(0.0, 1.0), C::new(0.3, 0.8)];

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let flow = opts.flow;
    let at_i = ComplexTime::new(I);
    for (label, geo) in default_geometries() {
        let mut rng = stream(opts.seed, &format!("frames/{label}"));
        let n = geo.dim();
        let zero: Vec<PhasePoint> = (0..opts.count(20)).map(|_| zero_section_point(&mut rng, n, 1.5)).collect();
        let tube: Vec<PhasePoint> = (0..opts.count(100)).map(|_| tube_point(&mut rng, &geo, 1.5, 2.0)).collect();

        checks.push(CheckResult::below(
            format!("zero_section_linearization[{label}]"),
            Some(3),
            sample_max(&zero, |z| {
                let mut worst = 0.0_f64;
                for t in ZERO_SECTION_TIMES {
                    let jac = flow_complex(&geo, z, &ComplexTime::new(t), &flow)?;
                    let exact = zero_section_linearization_metric(&geo.inv_metric(&z.x), &geo.beta(&z.x), t);
                    worst = worst.max(max_abs(&(jac.jacobian()? - exact)));
                }
                Ok(worst)
            }),
            1e-9,
        ));
        checks.push(CheckResult::below(
            format!("zero_section_frame_span[{label}]"),
            Some(3),
            sample_max(&zero, |z| {
                let mut worst = 0.0_f64;
                for t in ZERO_SECTION_TIMES {
                    let frame = frame_at(&geo, z, &ComplexTime::new(t), &flow)?;
                    let exact = zero_section_linearization_metric(&geo.inv_metric(&z.x), &geo.beta(&z.x), t);
                    worst = worst.max(subspace_distance(&frame.raw, &exact.columns(n, n).into_owned())?);
                }
                Ok(worst)
            }),
            1e-9,
        ));

        let frames: Vec<_> = {
            use rayon::prelude::*;
            tube.par_iter().map(|z| frame_at(&geo, z, &at_i, &flow)).collect()
        };
        checks.push(CheckResult::below(
            format!("lagrangian[{label}]"),
            Some(4),
            sample_max(&frames, |f| Ok(f.as_ref().map_err(Clone::clone)?.lagrangian_residual())),
            1e-8,
        ));
        checks.push(CheckResult::above(
            format!("transversality[{label}]"),
            Some(4),
            sample_min(&frames, |f| Ok(transversality_check(f.as_ref().map_err(Clone::clone)?))),
            1e-6,
        ));
        checks.push(CheckResult::above(
            format!("positivity_min_eigenvalue[{label}]"),
            Some(4),
            sample_min(&frames, |f| Ok(assemble_j(f.as_ref().map_err(Clone::clone)?)?.min_positivity())),
            0.0,
        ));
        checks.push(CheckResult::below(
            format!("complex_structure_square[{label}]"),
            None,
            sample_max(&frames, |f| Ok(assemble_j(f.as_ref().map_err(Clone::clone)?)?.square_residual())),
            1e-8,
        ));
        checks.push(CheckResult::below(
            format!("complex_structure_compatible[{label}]"),
            None,
            sample_max(&frames, |f| {
                let f = f.as_ref().map_err(Clone::clone)?;
                Ok(assemble_j(f)?.compatibility_residual(&real_part(&f.omega)))
            }),
            1e-8,
        ));
        checks.push(CheckResult::above(
            format!("kahler_metric_min_eigenvalue[{label}]"),
            None,
            sample_min(&frames, |f| {
                let f = f.as_ref().map_err(Clone::clone)?;
                Ok(assemble_j(f)?.metric_min_eigenvalue(&real_part(&f.omega)))
            }),
            0.0,
        ));
        checks.push(CheckResult::above(
            format!("zero_section_totally_real[{label}]"),
            Some(6),
            sample_min(&zero, |z| Ok(vertical_margin(&frame_at(&geo, z, &at_i, &flow)?))),
            1e-6,
        ));
        checks.push(CheckResult::above(
            format!("vertical_margin_on_tube[{label}]"),
            Some(6),
            sample_min(&frames, |f| Ok(vertical_margin(f.as_ref().map_err(Clone::clone)?))),
            1e-6,
        ));

        let stencil = &tube[..opts.count(20).min(tube.len())];
        for t in [I, C::new(0.3, 0.8)] {
            checks.push(CheckResult::below(
                format!("integrability[{label},t={}]", crate::flow::format_complex(t)),
                Some(5),
                sample_max(stencil, |z| integrability_residual(&geo, z, &ComplexTime::new(t), opts.step, &flow)),
                1e-4,
            ));
        }

        checks.push(
            CheckResult::below(
                format!("real_time_transversality[{label}]"),
                None,
                sample_max(&tube[..opts.count(10).min(tube.len())], |z| {
                    Ok(transversality_check(&frame_at(&geo, z, &ComplexTime::real(0.5), &flow)?))
                }),
                1e-8,
            )
            .with_note("τ = 0: the frame is real, P = P̄, so transversality vanishes by construction")
            .degenerate(),
        );
    }

    // Positivity form at zero-section points where g = 1.
    let unit_metric = [
        ("flat[B=0.5]", planar(0.5, 1.0), vec![0.3, -0.7]),
        ("flat[B=1]", planar(1.0, 1.0), vec![-1.1, 0.4]),
        ("sphere[r=0.5,B=1]", sphere(0.5, 1.0), vec![0.0, 0.0]),
    ];
    checks.push(CheckResult::below(
        "zero_section_positivity_form",
        Some(4),
        sample_max(&unit_metric, |(_, geo, x)| {
            let z = PhasePoint::real(x, &[0.0, 0.0]);
            let mut worst = 0.0_f64;
            for t in [I, C::new(0.3, 0.8), C::new(-0.2, 0.5)] {
                let f = frame_at(geo, &z, &ComplexTime::new(t), &flow)?;
                let h = positivity_matrix(&f.raw, &f.omega);
                worst = worst.max(max_abs(&(h - zero_section_positivity(&geo.beta(&z.x), t.im))));
            }
            Ok(worst)
        }),
        1e-8,
    ));
    checks
}

//! Potential identities and holomorphy of extensions.

use rand::Rng;

use super::{planar, sample_max, sphere, CheckResult, VerifyOptions, FLAT_CASES};
use crate::flow::ComplexTime;
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::kahler::{antiholomorphic_frame, dbar_residual, extension_dbar_residual, kde_residual, potential_f};
use crate::linalg::{C, I};
use crate::sampling::{stream, tube_point};

type TestFn = fn(&[C]) -> C;

const EXTENSION_FUNCTIONS: [(&str, TestFn); 4] =
    [("x1", |x| x[0]), ("x2", |x| x[1]), ("x1^2", |x| x[0] * x[0]), ("x1*x2", |x| x[0] * x[1])];

fn points(opts: &VerifyOptions, label: &str, geo: &ChartedGeometry, nominal: usize) -> Vec<(PhasePoint, f64)> {
    let mut rng = stream(opts.seed, &format!("kahler/{label}"));
    (0..opts.count(nominal)).map(|_| (tube_point(&mut rng, geo, 1.2, 1.5), rng.random_range(-1.0..1.0))).collect()
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let flow = opts.flow;
    let h = opts.step;
    let flat: Vec<(String, ChartedGeometry)> =
        FLAT_CASES.iter().map(|&(b, m)| (format!("flat[B={b},m={m}]"), planar(b, m))).collect();
    let spheres =
        [("sphere[r=1,B=1]".to_string(), sphere(1.0, 1.0)), ("sphere[r=1.3,B=0.7]".to_string(), sphere(1.3, 0.7))];

    // KDE: 50 points over the flat cases, 20 over the spheres.
    for (family, geos, nominal, dbar_tol) in [("flat", &flat[..], 50_usize, 1e-6), ("sphere", &spheres[..], 20, 1e-5)] {
        let samples: Vec<(usize, PhasePoint, f64)> = geos
            .iter()
            .enumerate()
            .flat_map(|(k, (label, geo))| {
                let per = nominal.div_ceil(geos.len());
                points(opts, label, geo, per).into_iter().map(move |(z, s)| (k, z, s))
            })
            .collect();
        checks.push(CheckResult::below(
            format!("kde[{family}]"),
            Some(7),
            sample_max(&samples, |(k, z, s)| kde_residual(&geos[*k].1, z, *s, h, &flow)),
            1e-6,
        ));
        checks.push(CheckResult::below(
            format!("dbar_f_minus_i_is_theta_a[{family}]"),
            Some(7),
            sample_max(&samples, |(k, z, _)| {
                let geo = &geos[*k].1;
                dbar_residual(geo, z, &antiholomorphic_frame(geo, z, &flow)?, h, &flow)
            }),
            dbar_tol,
        ));
        checks.push(CheckResult::below(
            format!("f_reality[{family}]"),
            None,
            sample_max(&samples, |(k, z, _)| {
                let geo = &geos[*k].1;
                let fp = potential_f(geo, z, &ComplexTime::new(I), &flow)?;
                let fm = potential_f(geo, z, &ComplexTime::new(-I), &flow)?;
                Ok((fp - fm.conj()).norm())
            }),
            1e-10,
        ));
        let ext = &samples[..opts.count(12).min(samples.len())];
        for (name, f) in EXTENSION_FUNCTIONS {
            checks.push(CheckResult::below(
                format!("extension_holomorphic[{family},{name}]"),
                Some(8),
                sample_max(ext, |(k, z, _)| extension_dbar_residual(&geos[*k].1, &f, z, h, &flow)),
                1e-6,
            ));
        }
    }
    checks
}

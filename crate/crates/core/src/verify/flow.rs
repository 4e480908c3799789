//! Properties of the complex-time flow that hold on any geometry.

use rand::Rng;

use super::flat_oracle::disk_time;
use super::{default_geometries, sample_max, CheckResult, VerifyOptions};
use crate::diff::richardson;
use crate::flow::{flow_complex, hamiltonian_field, path_discrepancy, ComplexTime};
use crate::geometry::PhasePoint;
use crate::linalg::{c, max_abs, symplectic_matrix, CVector, C, I};
use crate::sampling::{stream, tube_point};

struct Sample {
    z: PhasePoint,
    s: C,
    t: C,
    real: f64,
}

pub(super) fn run(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let flow = opts.flow;
    let plain = flow.without_jacobian();
    for (label, geo) in default_geometries() {
        let mut rng = stream(opts.seed, &format!("flow/{label}"));
        let samples: Vec<Sample> = (0..opts.count(40))
            .map(|_| Sample {
                z: tube_point(&mut rng, &geo, 1.5, 2.0),
                s: disk_time(&mut rng, 0.6),
                t: disk_time(&mut rng, 0.6),
                real: rng.random_range(-1.2..1.2),
            })
            .collect();
        let at = |z: &PhasePoint, t: C| flow_complex(&geo, z, &ComplexTime::new(t), &plain).map(|s| s.z);

        checks.push(CheckResult::below(
            format!("group_law[{label}]"),
            None,
            sample_max(&samples, |s| Ok(at(&at(&s.z, s.t)?, s.s)?.distance(&at(&s.z, s.s + s.t)?))),
            1e-9,
        ));
        checks.push(CheckResult::below(
            format!("inverse_consistency[{label}]"),
            None,
            sample_max(&samples, |s| {
                let t = (s.s + s.t) * 0.9;
                Ok(at(&at(&s.z, t)?, -t)?.distance(&s.z))
            }),
            1e-9,
        ));
        checks.push(CheckResult::below(
            format!("energy_conservation[{label}]"),
            None,
            sample_max(&samples, |s| {
                let e0 = geo.energy(&s.z);
                let mut worst = (geo.energy(&at(&s.z, C::from(s.real))?) - e0).norm();
                worst = worst.max((geo.energy(&at(&s.z, s.s + s.t)?) - e0).norm());
                Ok(worst)
            }),
            1e-9,
        ));
        checks.push(CheckResult::below(
            format!("symplectomorphism[{label}]"),
            None,
            sample_max(&samples, |s| {
                let omega0 = symplectic_matrix(&geo.beta(&s.z.x));
                let mut worst = 0.0_f64;
                for end in [
                    flow_complex(&geo, &s.z, &ComplexTime::real(s.real), &flow)?,
                    flow_complex(&geo, &s.z, &ComplexTime::new(s.s + s.t), &flow)?,
                ] {
                    let j = end.jacobian()?;
                    let pulled = j.transpose() * symplectic_matrix(&geo.beta(&end.z.x)) * j;
                    worst = worst.max(max_abs(&(pulled - &omega0)));
                }
                Ok(worst)
            }),
            1e-8,
        ));
        checks.push(CheckResult::below(
            format!("hamiltonian_vector_field[{label}]"),
            None,
            sample_max(&samples, |s| {
                // ω^β(X_E, ·) = dE, i.e. Ω X_E = −∇E
                let x = CVector::from_vec(hamiltonian_field(&geo, &s.z)?);
                let omega_x = symplectic_matrix(&geo.beta(&s.z.x)) * x;
                let mut worst = 0.0_f64;
                for k in 0..2 * geo.dim() {
                    let de: C = richardson(|h| Ok(geo.energy(&s.z.displaced(k, c(h)))), opts.step)?;
                    worst = worst.max((omega_x[k] + de).norm());
                }
                Ok(worst)
            }),
            1e-8,
        ));
        let paths = &samples[..opts.count(20).min(samples.len())];
        checks.push(CheckResult::below(
            format!("path_independence[{label}]"),
            Some(8),
            sample_max(paths, |s| {
                let direct = ComplexTime::new(I);
                let a = path_discrepancy(&geo, &s.z, &direct, &ComplexTime::via(&[c(0.8)], I), &plain)?;
                let b = path_discrepancy(&geo, &s.z, &direct, &ComplexTime::via(&[C::new(-0.6, 0.4)], I), &plain)?;
                Ok(a.max(b))
            }),
            1e-9,
        ));
    }
    checks
}

//! Fiber inversion `ν(x, p) = (x, −p)` as an antiholomorphic map between the
//! `β` and `−β` structures.

use serde::Serialize;

use crate::error::Result;
use crate::flow::{flow_complex, ComplexTime, FlowOptions};
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::linalg::{conj, subspace_distance, CMatrix, C};
use crate::structure::frame_at;

/// `ν_* = diag(1, −1)` applied to the rows of a frame.
pub fn nu_push(frame: &CMatrix) -> CMatrix {
    let n = frame.nrows() / 2;
    let mut out = frame.clone();
    out.rows_mut(n, n).iter_mut().for_each(|v| *v = -*v);
    out
}

/// `max |ν Φ^{−β}_σ ν z − Φ^β_{−σ} z|`; the `−β` geometry is derived from `geo`.
pub fn check_flow_reversal(geo: &ChartedGeometry, z: &PhasePoint, sigma: f64, opts: &FlowOptions) -> Result<f64> {
    let minus = geo.negated_field();
    // Real times through the analytic chart, so trajectories may leave the chart box.
    let opts = FlowOptions { disk_radius: f64::INFINITY, ..opts.without_jacobian() };
    let lhs = flow_complex(&minus, &z.fiber_inverted(), &ComplexTime::real(sigma), &opts)?.z.fiber_inverted();
    let rhs = flow_complex(geo, z, &ComplexTime::real(-sigma), &opts)?.z;
    Ok(lhs.distance(&rhs))
}

/// Largest principal angle between `ν_* P^β_z(t)` and `conj P^{−β}_{νz}(−t̄)`;
/// for `t = i` the second span is `conj P^{−β}_{νz}(i)`.
pub fn check_frame_intertwine(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    opts: &FlowOptions,
) -> Result<f64> {
    let minus = geo.negated_field();
    let plus = frame_at(geo, z, t, opts)?;
    let reflected = ComplexTime::from_vertices(&t.vertices().iter().map(|s| -s.conj()).collect::<Vec<C>>())?;
    let other = frame_at(&minus, &z.fiber_inverted(), &reflected, opts)?;
    subspace_distance(&nu_push(&plus.columns), &conj(&other.columns))
}

/// Remark form at `t = σ + iτ`: `(Φ^{−β}_{2σ})_* ν_* P^β_z(t)` against
/// `conj P^{−β}_w(t)` with `w = Φ^{−β}_{2σ}(νz)`.
pub fn check_frame_intertwine_shifted(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    opts: &FlowOptions,
) -> Result<f64> {
    let minus = geo.negated_field();
    let sigma = t.target().re;
    let plus = frame_at(geo, z, t, opts)?;
    let shift_opts = FlowOptions { jacobian: true, disk_radius: f64::INFINITY, ..*opts };
    let shift = flow_complex(&minus, &z.fiber_inverted(), &ComplexTime::real(2.0 * sigma), &shift_opts)?;
    let pushed = shift.jacobian()? * nu_push(&plus.columns);
    let other = frame_at(&minus, &shift.z, t, opts)?;
    subspace_distance(&pushed, &conj(&other.columns))
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwineReport {
    pub base: Vec<f64>,
    pub flow_residual: f64,
    pub subspace_distance: f64,
    /// Distance between `ν_*ν_* F` and `F`.
    pub involution_distance: f64,
}

/// Flow reversal at real time `sigma` plus the frame check at `t = i`.
pub fn intertwine_report(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    sigma: f64,
    opts: &FlowOptions,
) -> Result<IntertwineReport> {
    let t = ComplexTime::new(C::new(0.0, 1.0));
    let frame = frame_at(geo, z, &t, opts)?;
    Ok(IntertwineReport {
        base: z.real_coords(),
        flow_residual: check_flow_reversal(geo, z, sigma, opts)?,
        subspace_distance: check_frame_intertwine(geo, z, &t, opts)?,
        involution_distance: subspace_distance(&nu_push(&nu_push(&frame.columns)), &frame.columns)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_flat_magnetic, make_sphere_magnetic};
    use nalgebra::DMatrix;

    #[test]
    fn flow_reversal_flat_and_sphere() {
        let opts = FlowOptions::default();
        let z = PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]);
        let flat = make_flat_magnetic(2, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]), 1.0).unwrap();
        assert!(check_flow_reversal(&flat, &z, 0.7, &opts).unwrap() < 1e-9);
        let zero = make_flat_magnetic(2, DMatrix::zeros(2, 2), 1.0).unwrap();
        assert!(check_flow_reversal(&zero, &z, 0.7, &opts).unwrap() < 1e-10);
        let sphere = make_sphere_magnetic(1.0, 0.8).unwrap();
        let z = PhasePoint::real(&[0.3, -0.2], &[0.6, 0.4]);
        assert!(check_flow_reversal(&sphere, &z, 0.5, &opts).unwrap() < 1e-8);
    }

    #[test]
    fn frames_intertwine() {
        let opts = FlowOptions::default();
        let sphere = make_sphere_magnetic(1.0, 0.8).unwrap();
        let z = PhasePoint::real(&[0.3, -0.2], &[0.6, 0.4]);
        let report = intertwine_report(&sphere, &z, 0.5, &opts).unwrap();
        assert!(report.subspace_distance < 1e-7, "{report:?}");
        assert!(report.involution_distance < 1e-10);
        let t = ComplexTime::new(C::new(0.3, 0.8));
        assert!(check_frame_intertwine_shifted(&sphere, &z, &t, &opts).unwrap() < 1e-6);
        assert!(check_frame_intertwine(&sphere, &z, &t, &opts).unwrap() < 1e-6);
    }
}

//! Custom geometries selectable with `kind = custom` and `name = ...`.

use std::sync::Arc;

use magtube::config::GeometryRegistry;
use magtube::geometry::CustomGeometry;
use magtube::linalg::{c, CMatrix, CVector, C};

/// Constant unit field on the plane, declared analytic only on the polydisc
/// `|x_j| < 1.5`. Complex trajectories with large momentum leave that disc,
/// so tube sweeps on it show continuation failures growing with `|p|`.
fn small_disk() -> CustomGeometry {
    CustomGeometry::new(
        "small-disk",
        2,
        |_: &[C]| CMatrix::identity(2, 2),
        |_: &[C]| vec![CMatrix::zeros(2, 2); 2],
        |_: &[C]| CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]),
        |x: &[C]| CVector::from_column_slice(&[-x[1] * 0.5, x[0] * 0.5]),
        1.0,
        1.5,
    )
    .expect("valid built-in custom geometry")
}

pub fn builtin() -> GeometryRegistry {
    let mut registry = GeometryRegistry::default();
    registry.register("small-disk", Arc::new(small_disk()));
    registry
}

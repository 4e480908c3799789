//! Fixtures shared by the benchmarks.

use magtube::geometry::{make_flat_magnetic, make_sphere_magnetic, ChartedGeometry, PhasePoint};
use magtube::sampling::{stream, tube_point};

pub fn planar() -> ChartedGeometry {
    make_flat_magnetic(2, nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]), 1.0).expect("valid field")
}

pub fn sphere() -> ChartedGeometry {
    make_sphere_magnetic(1.0, 1.0).expect("valid sphere")
}

/// Seeded tube points with `|p| < 1`.
pub fn points(geo: &ChartedGeometry, count: usize) -> Vec<PhasePoint> {
    let mut rng = stream(1, "bench");
    (0..count).map(|_| tube_point(&mut rng, geo, 1.0, 1.0)).collect()
}

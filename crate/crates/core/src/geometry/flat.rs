use nalgebra::DMatrix;

use super::{ChartData, ChartedGeometry};
use crate::error::{Error, Result};
use crate::linalg::{c, from_real, CMatrix, CVector, C};

/// Default half-width of the flat chart box; the chart itself is global.
const FLAT_CHART_RADIUS: f64 = 1e6;

/// Constant field `B` on `ℝⁿ` with energy `E = |p|²/(2mη)`.
#[derive(Clone, Debug)]
pub struct FlatMagnetic {
    field: DMatrix<f64>,
    mass_freq: f64,
    chart_radius: f64,
}

impl FlatMagnetic {
    pub fn field(&self) -> &DMatrix<f64> {
        &self.field
    }

    pub fn mass_freq(&self) -> f64 {
        self.mass_freq
    }

    /// `B̃ = B₁₂/(mη)` for the planar case.
    pub fn reduced_field(&self) -> f64 {
        self.field[(0, 1)] / self.mass_freq
    }

    pub fn with_chart_radius(mut self, rho: f64) -> Self {
        self.chart_radius = rho;
        self
    }
}

/// Flat geometry with `g^{jk} = δ^{jk}/(mη)`, constant `β = B` and the linear
/// potential `A_j = ½ B_{kj} x^k`.
pub fn make_flat_magnetic(dim: usize, field: DMatrix<f64>, mass_freq: f64) -> Result<ChartedGeometry> {
    Ok(ChartedGeometry::new(FlatMagnetic::new(dim, field, mass_freq)?))
}

impl FlatMagnetic {
    pub fn new(dim: usize, field: DMatrix<f64>, mass_freq: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if field.nrows() != dim || field.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "field matrix is {}×{}, expected {dim}×{dim}",
                field.nrows(),
                field.ncols()
            )));
        }
        if !(mass_freq > 0.0 && mass_freq.is_finite()) {
            return Err(Error::InvalidInput(format!("mass_freq must be positive, got {mass_freq}")));
        }
        let scale = field.amax().max(1.0);
        let asym = (&field + field.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidInput(format!("field matrix is not antisymmetric (|B + Bᵀ| = {asym:e})")));
        }
        Ok(Self { field, mass_freq, chart_radius: FLAT_CHART_RADIUS })
    }

    /// Planar field `β = B dx₁∧dx₂`.
    pub fn planar(b: f64, mass_freq: f64) -> Result<Self> {
        Self::new(2, DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]), mass_freq)
    }
}

impl ChartData for FlatMagnetic {
    fn name(&self) -> &str {
        "flat"
    }

    fn dim(&self) -> usize {
        self.field.nrows()
    }

    fn inv_metric(&self, _x: &[C]) -> CMatrix {
        let n = self.dim();
        CMatrix::identity(n, n) * c(1.0 / self.mass_freq)
    }

    fn inv_metric_deriv(&self, _x: &[C]) -> Vec<CMatrix> {
        let n = self.dim();
        vec![CMatrix::zeros(n, n); n]
    }

    fn inv_metric_second_deriv(&self, _x: &[C]) -> Option<Vec<Vec<CMatrix>>> {
        let n = self.dim();
        Some(vec![vec![CMatrix::zeros(n, n); n]; n])
    }

    fn beta(&self, _x: &[C]) -> CMatrix {
        from_real(&self.field)
    }

    fn beta_deriv(&self, _x: &[C]) -> Option<Vec<CMatrix>> {
        let n = self.dim();
        Some(vec![CMatrix::zeros(n, n); n])
    }

    fn potential(&self, x: &[C]) -> CVector {
        let n = self.dim();
        CVector::from_fn(n, |j, _| (0..n).map(|k| x[k] * self.field[(k, j)]).sum::<C>() * 0.5)
    }

    fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    fn validity_radius(&self) -> f64 {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PhasePoint;

    fn planar(b: f64, m: f64) -> ChartedGeometry {
        make_flat_magnetic(2, DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]), m).unwrap()
    }

    #[test]
    fn unit_momentum_has_half_energy() {
        let geo = planar(1.0, 1.0);
        let e = geo.energy(&PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]));
        assert_eq!(e, c(0.5));
    }

    #[test]
    fn reduced_field_divides_by_mass_freq() {
        let flat = FlatMagnetic::planar(2.0, 0.5).unwrap();
        assert_eq!(flat.reduced_field(), 4.0);
    }

    #[test]
    fn potential_matches_planar_gauge() {
        // A = ½B(x₁dx₂ − x₂dx₁)
        let geo = planar(3.0, 1.0);
        let a = geo.potential(&[c(0.4), c(-1.0)]);
        assert!((a[0] - c(1.5)).norm() < 1e-15);
        assert!((a[1] - c(0.6)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(make_flat_magnetic(2, bad, 1.0).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(make_flat_magnetic(2, ok.clone(), 0.0).is_err());
        assert!(make_flat_magnetic(3, ok, 1.0).is_err());
    }

    #[test]
    fn negated_field_flips_beta_and_potential_only() {
        let geo = planar(1.5, 2.0);
        let neg = geo.negated_field();
        let x = [c(0.3), c(0.7)];
        assert_eq!(neg.beta(&x), -geo.beta(&x));
        assert_eq!(neg.potential(&x), -geo.potential(&x));
        assert_eq!(neg.inv_metric(&x), geo.inv_metric(&x));
    }
}

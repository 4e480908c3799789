//! Analytic chart data `(g, β, A)` on a single coordinate chart.
//!
//! Every evaluator accepts complex coordinates: the complex-time flow needs
//! holomorphic coefficients, so the data must be closed-form analytic
//! expressions that continue off the real chart.

mod custom;
mod flat;
mod sphere;
mod validate;

use std::fmt;
use std::sync::Arc;

use crate::linalg::{c, CMatrix, CVector, C};

pub use custom::CustomGeometry;
pub use flat::{make_flat_magnetic, FlatMagnetic};
pub use sphere::{make_sphere_magnetic, SphereMagnetic};
pub use validate::{validate_geometry, GeometryReport, InvariantResidual, ValidationOptions};

/// Step of the central difference used when a chart does not supply second
/// derivatives of the inverse metric or first derivatives of `β`.
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-5;

/// Evaluators for one chart. Implementors return unsigned data; the field
/// sign is applied by [`ChartedGeometry`].
pub trait ChartData: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// `g^{jk}(x)`.
    fn inv_metric(&self, x: &[C]) -> CMatrix;

    /// `∂g^{jk}/∂x^l`, indexed by `l`.
    fn inv_metric_deriv(&self, x: &[C]) -> Vec<CMatrix>;

    /// `∂²g^{jk}/∂x^l∂x^m`, indexed `[l][m]`. Optional.
    fn inv_metric_second_deriv(&self, _x: &[C]) -> Option<Vec<Vec<CMatrix>>> {
        None
    }

    /// `β_{jk}(x)`.
    fn beta(&self, x: &[C]) -> CMatrix;

    /// `∂β_{jk}/∂x^l`, indexed by `l`. Optional.
    fn beta_deriv(&self, _x: &[C]) -> Option<Vec<CMatrix>> {
        None
    }

    /// Components `A_j(x)` of a local potential with `dA = β`.
    fn potential(&self, x: &[C]) -> CVector;

    /// Half-width `ρ` of the real chart box `(−ρ, ρ)^n`.
    fn chart_radius(&self) -> f64;

    /// Coordinates with modulus above this are outside the analytic domain.
    fn validity_radius(&self) -> f64;

    /// Whether the evaluators are analytic at the complex point `x`.
    fn in_domain(&self, x: &[C]) -> bool {
        let r = self.validity_radius();
        x.iter().all(|v| v.is_finite() && v.norm() < r)
    }
}

/// Immutable, cheaply cloneable handle to chart data plus a field sign.
///
/// The sign multiplies `β` and `A`, so `negated_field` produces the `−β`
/// geometry from the same data.
#[derive(Clone)]
pub struct ChartedGeometry {
    data: Arc<dyn ChartData>,
    field_sign: f64,
}

impl fmt::Debug for ChartedGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedGeometry")
            .field("name", &self.data.name())
            .field("dim", &self.data.dim())
            .field("field_sign", &self.field_sign)
            .finish()
    }
}

impl ChartedGeometry {
    pub fn new(data: impl ChartData + 'static) -> Self {
        Self { data: Arc::new(data), field_sign: 1.0 }
    }

    pub fn from_arc(data: Arc<dyn ChartData>) -> Self {
        Self { data, field_sign: 1.0 }
    }

    pub fn name(&self) -> &str {
        self.data.name()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn field_sign(&self) -> f64 {
        self.field_sign
    }

    /// Same metric, opposite magnetic field and potential.
    pub fn negated_field(&self) -> Self {
        Self { data: Arc::clone(&self.data), field_sign: -self.field_sign }
    }

    pub fn inv_metric(&self, x: &[C]) -> CMatrix {
        self.data.inv_metric(x)
    }

    pub fn inv_metric_deriv(&self, x: &[C]) -> Vec<CMatrix> {
        self.data.inv_metric_deriv(x)
    }

    /// Analytic second derivatives when the chart has them, otherwise central
    /// differences of `inv_metric_deriv`.
    pub fn inv_metric_second_deriv(&self, x: &[C]) -> Vec<Vec<CMatrix>> {
        if let Some(d2) = self.data.inv_metric_second_deriv(x) {
            return d2;
        }
        let n = self.dim();
        let h = SECOND_DERIVATIVE_STEP;
        let mut out = vec![Vec::with_capacity(n); n];
        for m in 0..n {
            let plus = self.data.inv_metric_deriv(&shifted(x, m, h));
            let minus = self.data.inv_metric_deriv(&shifted(x, m, -h));
            for l in 0..n {
                out[l].push((&plus[l] - &minus[l]) * c(0.5 / h));
            }
        }
        out
    }

    pub fn beta(&self, x: &[C]) -> CMatrix {
        self.data.beta(x) * c(self.field_sign)
    }

    pub fn beta_deriv(&self, x: &[C]) -> Vec<CMatrix> {
        let raw = match self.data.beta_deriv(x) {
            Some(d) => d,
            None => {
                let h = SECOND_DERIVATIVE_STEP;
                (0..self.dim())
                    .map(|l| (self.data.beta(&shifted(x, l, h)) - self.data.beta(&shifted(x, l, -h))) * c(0.5 / h))
                    .collect()
            }
        };
        raw.into_iter().map(|m| m * c(self.field_sign)).collect()
    }

    pub fn potential(&self, x: &[C]) -> CVector {
        self.data.potential(x) * c(self.field_sign)
    }

    pub fn chart_radius(&self) -> f64 {
        self.data.chart_radius()
    }

    pub fn validity_radius(&self) -> f64 {
        self.data.validity_radius()
    }

    pub fn in_domain(&self, x: &[C]) -> bool {
        self.data.in_domain(x)
    }

    /// Real coordinates lie in the chart box.
    pub fn in_chart_box(&self, x: &[f64]) -> bool {
        let rho = self.chart_radius();
        x.iter().all(|v| v.abs() < rho)
    }

    /// `g(p, p) = g^{jk}(x) p_j p_k` (complex bilinear).
    pub fn metric_norm_sq(&self, z: &PhasePoint) -> C {
        let g = self.inv_metric(&z.x);
        let p = CVector::from_column_slice(&z.p);
        (p.transpose() * g * &p)[(0, 0)]
    }

    /// `E = ½ g(p, p)`.
    pub fn energy(&self, z: &PhasePoint) -> C {
        self.metric_norm_sq(z) * 0.5
    }
}

pub(crate) fn shifted(x: &[C], k: usize, h: f64) -> Vec<C> {
    let mut y = x.to_vec();
    y[k] += h;
    y
}

/// A point `(x, p)` of the complexified cotangent bundle in a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<C>,
    pub p: Vec<C>,
}

impl PhasePoint {
    pub fn new(x: Vec<C>, p: Vec<C>) -> Self {
        assert_eq!(x.len(), p.len(), "x and p must have equal length");
        Self { x, p }
    }

    pub fn real(x: &[f64], p: &[f64]) -> Self {
        Self::new(x.iter().map(|&v| c(v)).collect(), p.iter().map(|&v| c(v)).collect())
    }

    /// Split a `2n` vector into `(x, p)`.
    pub fn from_slice(z: &[C]) -> Self {
        assert!(z.len().is_multiple_of(2));
        let n = z.len() / 2;
        Self::new(z[..n].to_vec(), z[n..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `(x, p)` flattened as a `2n` vector.
    pub fn to_vec(&self) -> Vec<C> {
        self.x.iter().chain(self.p.iter()).copied().collect()
    }

    pub fn real_coords(&self) -> Vec<f64> {
        self.to_vec().iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.x.iter().chain(self.p.iter()).map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() < tol
    }

    pub fn conj(&self) -> Self {
        Self::new(self.x.iter().map(|v| v.conj()).collect(), self.p.iter().map(|v| v.conj()).collect())
    }

    /// `ν(x, p) = (x, −p)`.
    pub fn fiber_inverted(&self) -> Self {
        Self::new(self.x.clone(), self.p.iter().map(|v| -v).collect())
    }

    /// Max-norm distance in the `2n` coordinates.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `z + h e_k` in the flattened `2n` coordinates.
    pub fn displaced(&self, k: usize, h: C) -> Self {
        let mut z = self.to_vec();
        z[k] += h;
        Self::from_slice(&z)
    }

    /// `z + h v` in the flattened coordinates.
    pub fn displaced_along(&self, v: &[C], h: C) -> Self {
        let z: Vec<C> = self.to_vec().iter().zip(v).map(|(a, b)| a + b * h).collect();
        Self::from_slice(&z)
    }

    /// Tube membership `g(p, p) < R²`, meaningful at real points.
    pub fn in_tube(&self, geo: &ChartedGeometry, radius: f64) -> bool {
        geo.metric_norm_sq(self).re < radius * radius
    }
}

use std::fmt;

use super::ChartData;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C};

type MatrixFn = Box<dyn Fn(&[C]) -> CMatrix + Send + Sync>;
type MatrixListFn = Box<dyn Fn(&[C]) -> Vec<CMatrix> + Send + Sync>;
type VectorFn = Box<dyn Fn(&[C]) -> CVector + Send + Sync>;

/// User-registered chart built from analytic closures.
///
/// The closures must be holomorphic in `x` on the polydisc of the declared
/// validity radius; `validate_geometry` checks this at sample points.
pub struct CustomGeometry {
    name: String,
    dim: usize,
    inv_metric: MatrixFn,
    inv_metric_deriv: MatrixListFn,
    beta: MatrixFn,
    potential: VectorFn,
    chart_radius: f64,
    validity_radius: f64,
}

impl fmt::Debug for CustomGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGeometry")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("chart_radius", &self.chart_radius)
            .field("validity_radius", &self.validity_radius)
            .finish()
    }
}

impl CustomGeometry {
    /// `chart_radius ≤ validity_radius` is required.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        inv_metric: impl Fn(&[C]) -> CMatrix + Send + Sync + 'static,
        inv_metric_deriv: impl Fn(&[C]) -> Vec<CMatrix> + Send + Sync + 'static,
        beta: impl Fn(&[C]) -> CMatrix + Send + Sync + 'static,
        potential: impl Fn(&[C]) -> CVector + Send + Sync + 'static,
        chart_radius: f64,
        validity_radius: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !(chart_radius > 0.0 && chart_radius <= validity_radius) {
            return Err(Error::InvalidInput(format!(
                "need 0 < chart_radius ({chart_radius}) <= validity_radius ({validity_radius})"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            inv_metric: Box::new(inv_metric),
            inv_metric_deriv: Box::new(inv_metric_deriv),
            beta: Box::new(beta),
            potential: Box::new(potential),
            chart_radius,
            validity_radius,
        })
    }
}

impl ChartData for CustomGeometry {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn inv_metric(&self, x: &[C]) -> CMatrix {
        (self.inv_metric)(x)
    }

    fn inv_metric_deriv(&self, x: &[C]) -> Vec<CMatrix> {
        (self.inv_metric_deriv)(x)
    }

    fn beta(&self, x: &[C]) -> CMatrix {
        (self.beta)(x)
    }

    fn potential(&self, x: &[C]) -> CVector {
        (self.potential)(x)
    }

    fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    fn validity_radius(&self) -> f64 {
        self.validity_radius
    }
}

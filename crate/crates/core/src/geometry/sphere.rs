use super::{ChartData, ChartedGeometry};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C};

/// Default half-width of the stereographic chart box. The box `|u_j| < 3`
/// covers the sphere except a cap around the projection pole.
pub const SPHERE_CHART_RADIUS: f64 = 3.0;

/// Coordinates with `|1 + u·u|` below this are treated as the pole at infinity.
const POLE_GUARD: f64 = 1e-8;

const SPHERE_VALIDITY_RADIUS: f64 = 1e4;

/// Round sphere of radius `r` with the invariant field `β = B·dArea`, in
/// stereographic coordinates `u` projected from the north pole.
///
/// With `s = u·u` (complex bilinear):
/// `g^{jk} = (1+s)²/(4r²) δ^{jk}`, `β₁₂ = −4Br²/(1+s)²`, and
/// `A = 2Br²(u₂, −u₁)/(1+s)`. All are rational in `u`, singular only on `s = −1`.
#[derive(Clone, Debug)]
pub struct SphereMagnetic {
    radius: f64,
    field: f64,
    chart_radius: f64,
}

pub fn make_sphere_magnetic(radius: f64, field: f64) -> Result<ChartedGeometry> {
    Ok(ChartedGeometry::new(SphereMagnetic::new(radius, field)?))
}

impl SphereMagnetic {
    pub fn new(radius: f64, field: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
        }
        if !field.is_finite() {
            return Err(Error::InvalidInput("field strength must be finite".into()));
        }
        Ok(Self { radius, field, chart_radius: SPHERE_CHART_RADIUS })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn with_chart_radius(mut self, rho: f64) -> Self {
        self.chart_radius = rho;
        self
    }

    fn one_plus_s(x: &[C]) -> C {
        c(1.0) + x[0] * x[0] + x[1] * x[1]
    }
}

impl ChartData for SphereMagnetic {
    fn name(&self) -> &str {
        "sphere"
    }

    fn dim(&self) -> usize {
        2
    }

    fn inv_metric(&self, x: &[C]) -> CMatrix {
        let w = Self::one_plus_s(x);
        CMatrix::identity(2, 2) * (w * w / (4.0 * self.radius * self.radius))
    }

    fn inv_metric_deriv(&self, x: &[C]) -> Vec<CMatrix> {
        let w = Self::one_plus_s(x);
        let r2 = self.radius * self.radius;
        (0..2).map(|l| CMatrix::identity(2, 2) * (w * x[l] / r2)).collect()
    }

    fn inv_metric_second_deriv(&self, x: &[C]) -> Option<Vec<Vec<CMatrix>>> {
        let w = Self::one_plus_s(x);
        let r2 = self.radius * self.radius;
        Some(
            (0..2)
                .map(|l| {
                    (0..2)
                        .map(|m| {
                            let delta = if l == m { w } else { c(0.0) };
                            CMatrix::identity(2, 2) * ((x[l] * x[m] * 2.0 + delta) / r2)
                        })
                        .collect()
                })
                .collect(),
        )
    }

    fn beta(&self, x: &[C]) -> CMatrix {
        let w = Self::one_plus_s(x);
        let b12 = -4.0 * self.field * self.radius * self.radius / (w * w);
        CMatrix::from_row_slice(2, 2, &[c(0.0), b12, -b12, c(0.0)])
    }

    fn beta_deriv(&self, x: &[C]) -> Option<Vec<CMatrix>> {
        let w = Self::one_plus_s(x);
        let k = 16.0 * self.field * self.radius * self.radius;
        Some(
            (0..2)
                .map(|l| {
                    let d = x[l] * k / (w * w * w);
                    CMatrix::from_row_slice(2, 2, &[c(0.0), d, -d, c(0.0)])
                })
                .collect(),
        )
    }

    fn potential(&self, x: &[C]) -> CVector {
        let w = Self::one_plus_s(x);
        let k = 2.0 * self.field * self.radius * self.radius;
        CVector::from_column_slice(&[x[1] * k / w, -x[0] * k / w])
    }

    fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    fn validity_radius(&self) -> f64 {
        SPHERE_VALIDITY_RADIUS
    }

    fn in_domain(&self, x: &[C]) -> bool {
        x.iter().all(|v| v.is_finite() && v.norm() < SPHERE_VALIDITY_RADIUS) && Self::one_plus_s(x).norm() > POLE_GUARD
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_metric_at_origin() {
        // g_{jk} = 4(1+|u|²)^{-2} δ, so g^{jk}(0) = δ/4.
        let geo = make_sphere_magnetic(1.0, 0.0).unwrap();
        let g = geo.inv_metric(&[c(0.0), c(0.0)]);
        assert!((g[(0, 0)] - c(0.25)).norm() < 1e-15);
        assert_eq!(geo.beta(&[c(0.3), c(0.1)]), CMatrix::zeros(2, 2));
    }

    #[test]
    fn beta_at_origin_is_minus_field_times_area_density() {
        let geo = make_sphere_magnetic(1.0, 1.0).unwrap();
        let b = geo.beta(&[c(0.0), c(0.0)]);
        assert!((b[(0, 1)] - c(-4.0)).norm() < 1e-15);
    }

    #[test]
    fn flux_over_the_sphere_is_four_pi_r_squared_b() {
        // Polar Simpson quadrature of β₁₂ over the plane; the tail beyond ρ_max is added in closed form.
        let (r, b) = (2.0, 0.5);
        let geo = make_sphere_magnetic(r, b).unwrap();
        let rho_max: f64 = 200.0;
        let n = 40_000;
        let h = rho_max / n as f64;
        let f = |rho: f64| geo.beta(&[c(rho), c(0.0)])[(0, 1)].re * rho;
        let mut sum = f(0.0) + f(rho_max);
        for i in 1..n {
            sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum *= h / 3.0;
        let tail = -2.0 * b * r * r / (1.0 + rho_max * rho_max);
        let flux = -2.0 * std::f64::consts::PI * (sum + tail);
        let expected = 4.0 * std::f64::consts::PI * r * r * b;
        assert!((flux - expected).abs() < 1e-6 * expected, "{flux} vs {expected}");
    }

    #[test]
    fn pole_is_outside_domain() {
        let geo = make_sphere_magnetic(1.0, 1.0).unwrap();
        assert!(!geo.in_domain(&[C::new(0.0, 1.0), c(0.0)]));
        assert!(geo.in_domain(&[C::new(0.0, 0.9), c(0.0)]));
        assert!(make_sphere_magnetic(0.0, 1.0).is_err());
    }
}

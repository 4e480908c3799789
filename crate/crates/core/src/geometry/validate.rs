use serde::Serialize;

use super::{shifted, ChartedGeometry};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, max_abs, max_imag, CMatrix, C, I};

#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions {
    /// Absolute tolerance, scaled by `max(1, |value|)` for difference checks.
    pub tolerance: f64,
    /// Finite-difference step.
    pub step: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, step: 1e-5 }
    }
}

/// Worst residual of one invariant over all samples.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantResidual {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Sample attaining `max_residual`.
    pub location: Option<Vec<f64>>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub geometry: String,
    pub samples: usize,
    pub residuals: Vec<InvariantResidual>,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResidual> {
        self.residuals.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResidual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    location: Option<Vec<f64>>,
    passed: bool,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, worst: 0.0, location: None, passed: true }
    }

    /// `scaled` is the residual divided by the local magnitude; the raw residual is reported.
    fn record(&mut self, raw: f64, scaled: f64, at: &[f64]) {
        let bad = !(scaled <= self.tolerance);
        if raw > self.worst || (bad && self.passed) || raw.is_nan() {
            self.worst = if raw.is_nan() { f64::NAN } else { raw.max(self.worst) };
            self.location = Some(at.to_vec());
        }
        if bad {
            self.passed = false;
        }
    }

    fn finish(self) -> InvariantResidual {
        InvariantResidual {
            name: self.name,
            max_residual: self.worst,
            tolerance: self.tolerance,
            location: self.location,
            passed: self.passed,
        }
    }
}

fn scale(m: &CMatrix) -> f64 {
    max_abs(m).max(1.0)
}

/// Evaluate every chart invariant at the given real sample points.
///
/// Residuals above tolerance are flagged in the report; an error is returned
/// only for malformed input.
pub fn validate_geometry(
    geo: &ChartedGeometry,
    samples: &[Vec<f64>],
    opts: &ValidationOptions,
) -> Result<GeometryReport> {
    let n = geo.dim();
    let tol = opts.tolerance;
    let h = opts.step;
    let mut symmetric = Tracker::new("metric_symmetric", tol);
    let mut positive = Tracker::new("metric_positive_definite", 0.0);
    let mut antisym = Tracker::new("beta_antisymmetric", tol);
    let mut exterior = Tracker::new("dA_equals_beta", tol);
    let mut deriv = Tracker::new("metric_derivative", tol);
    let mut second = Tracker::new("metric_second_derivative", 1e3 * tol);
    let mut beta_deriv = Tracker::new("beta_derivative", 1e3 * tol);
    let mut reality = Tracker::new("real_on_real", 1e-12);
    let mut analytic = Tracker::new("cauchy_riemann", tol);

    for at in samples {
        if at.len() != n {
            return Err(Error::InvalidInput(format!("sample has {} coordinates, expected {n}", at.len())));
        }
        if !geo.in_chart_box(at) {
            return Err(Error::InvalidInput(format!("sample {at:?} lies outside the chart box")));
        }
        let x: Vec<C> = at.iter().map(|&v| c(v)).collect();
        let g = geo.inv_metric(&x);
        let beta = geo.beta(&x);
        let a = geo.potential(&x);
        let dg = geo.inv_metric_deriv(&x);

        let r = max_abs(&(&g - g.transpose()));
        symmetric.record(r, r / scale(&g), at);

        let lambda = hermitian_eigenvalues(&g)[0];
        let deficit = if lambda > 0.0 { 0.0 } else { -lambda + f64::MIN_POSITIVE };
        positive.record(deficit, deficit, at);

        let r = max_abs(&(&beta + beta.transpose()));
        antisym.record(r, r / scale(&beta), at);

        let mut im = max_imag(&g).max(max_imag(&beta));
        im = im.max(a.iter().map(|v| v.im.abs()).fold(0.0, f64::max));
        im = dg.iter().map(max_imag).fold(im, f64::max);
        reality.record(im, im, at);

        // (dA)_{jk} = ∂_j A_k − ∂_k A_j
        let da: Vec<_> = (0..n)
            .map(|j| (geo.potential(&shifted(&x, j, h)) - geo.potential(&shifted(&x, j, -h))) * c(0.5 / h))
            .collect();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((da[j][k] - da[k][j] - beta[(j, k)]).norm());
            }
        }
        exterior.record(worst, worst / scale(&beta), at);

        let mut worst = 0.0_f64;
        let mut mag = scale(&g);
        for (l, dgl) in dg.iter().enumerate() {
            let fd = (geo.inv_metric(&shifted(&x, l, h)) - geo.inv_metric(&shifted(&x, l, -h))) * c(0.5 / h);
            worst = worst.max(max_abs(&(fd - dgl)));
            mag = mag.max(max_abs(dgl));
        }
        deriv.record(worst, worst / mag, at);

        let d2 = geo.inv_metric_second_deriv(&x);
        let mut worst = 0.0_f64;
        #[allow(clippy::needless_range_loop)]
        for m in 0..n {
            let plus = geo.inv_metric_deriv(&shifted(&x, m, h));
            let minus = geo.inv_metric_deriv(&shifted(&x, m, -h));
            for l in 0..n {
                let fd = (&plus[l] - &minus[l]) * c(0.5 / h);
                worst = worst.max(max_abs(&(fd - &d2[l][m])));
            }
        }
        second.record(worst, worst / mag, at);

        let db = geo.beta_deriv(&x);
        let mut worst = 0.0_f64;
        for (l, dbl) in db.iter().enumerate() {
            let fd = (geo.beta(&shifted(&x, l, h)) - geo.beta(&shifted(&x, l, -h))) * c(0.5 / h);
            worst = worst.max(max_abs(&(fd - dbl)));
        }
        beta_deriv.record(worst, worst / scale(&beta), at);

        let worst = cauchy_riemann(geo, &x, h);
        analytic.record(worst, worst / scale(&g).max(scale(&beta)), at);
    }

    Ok(GeometryReport {
        geometry: geo.name().to_string(),
        samples: samples.len(),
        residuals: [symmetric, positive, antisym, exterior, deriv, second, beta_deriv, reality, analytic]
            .into_iter()
            .map(Tracker::finish)
            .collect(),
    })
}

/// Holomorphic evaluators have equal derivatives along `e_k` and `i e_k`
/// (after dividing by `i`); residual over `g`, `β` and `A`.
fn cauchy_riemann(geo: &ChartedGeometry, x: &[C], h: f64) -> f64 {
    let n = geo.dim();
    let mut worst = 0.0_f64;
    let step = |k: usize, d: C| {
        let mut y = x.to_vec();
        y[k] += d;
        y
    };
    for k in 0..n {
        let (rp, rm) = (step(k, c(h)), step(k, c(-h)));
        let (ip, im) = (step(k, I * h), step(k, -I * h));
        let real_dir = (geo.inv_metric(&rp) - geo.inv_metric(&rm)) * c(0.5 / h);
        let imag_dir = (geo.inv_metric(&ip) - geo.inv_metric(&im)) * (-I * (0.5 / h));
        worst = worst.max(max_abs(&(real_dir - imag_dir)));
        let real_dir = (geo.beta(&rp) - geo.beta(&rm)) * c(0.5 / h);
        let imag_dir = (geo.beta(&ip) - geo.beta(&im)) * (-I * (0.5 / h));
        worst = worst.max(max_abs(&(real_dir - imag_dir)));
        let real_dir = (geo.potential(&rp) - geo.potential(&rm)) * c(0.5 / h);
        let imag_dir = (geo.potential(&ip) - geo.potential(&im)) * (-I * (0.5 / h));
        worst = worst.max((real_dir - imag_dir).iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    worst
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::{make_flat_magnetic, make_sphere_magnetic, ChartData, CustomGeometry, SphereMagnetic};

    fn random_samples(n: usize, count: usize, rho: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..n).map(|_| rng.random_range(-rho..rho)).collect()).collect()
    }

    #[test]
    fn flat_geometry_is_exact() {
        let b = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -0.5, -1.0, 0.0, 2.0, 0.5, -2.0, 0.0]);
        let geo = make_flat_magnetic(3, b, 0.7).unwrap();
        let samples = random_samples(3, 100, 10.0, 1);
        let opts = ValidationOptions { tolerance: 1e-10, ..Default::default() };
        let report = validate_geometry(&geo, &samples, &opts).unwrap();
        assert!(report.passed(), "{report:#?}");
    }

    #[test]
    fn sphere_geometry_passes_near_chart_edge() {
        let geo = make_sphere_magnetic(1.3, 0.8).unwrap();
        let samples: Vec<Vec<f64>> = random_samples(2, 50, 1.0, 2)
            .into_iter()
            .map(|v| v.iter().map(|t| t.signum() * 2.5 + 0.4 * t).collect())
            .collect();
        let report = validate_geometry(&geo, &samples, &ValidationOptions::default()).unwrap();
        assert!(report.passed(), "{report:#?}");
        assert!(report.get("dA_equals_beta").unwrap().max_residual < 1e-7);
    }

    #[test]
    fn corrupted_potential_is_flagged_with_location() {
        let sphere = Arc::new(SphereMagnetic::new(1.0, 1.0).unwrap());
        let (s1, s2, s3, s4) = (sphere.clone(), sphere.clone(), sphere.clone(), sphere);
        let bad = CustomGeometry::new(
            "corrupted",
            2,
            move |x| s1.inv_metric(x),
            move |x| s2.inv_metric_deriv(x),
            move |x| s3.beta(x),
            move |x| s4.potential(x) * c(1.01),
            2.0,
            100.0,
        )
        .unwrap();
        let geo = ChartedGeometry::new(bad);
        let samples = random_samples(2, 10, 1.5, 3);
        let report = validate_geometry(&geo, &samples, &ValidationOptions::default()).unwrap();
        let failed: Vec<_> = report.failures().map(|r| r.name).collect();
        assert_eq!(failed, vec!["dA_equals_beta"]);
        assert!(report.get("dA_equals_beta").unwrap().location.is_some());
    }

    #[test]
    fn non_analytic_evaluator_is_flagged() {
        let geo = ChartedGeometry::new(
            CustomGeometry::new(
                "conjugating",
                1,
                |x| CMatrix::from_element(1, 1, c(1.0) + x[0].conj() * x[0]),
                |x| vec![CMatrix::from_element(1, 1, x[0] * 2.0)],
                |_| CMatrix::zeros(1, 1),
                |_| crate::linalg::CVector::zeros(1),
                1.0,
                10.0,
            )
            .unwrap(),
        );
        let report = validate_geometry(&geo, &[vec![0.5]], &ValidationOptions::default()).unwrap();
        assert!(!report.get("cauchy_riemann").unwrap().passed);
    }

    #[test]
    fn samples_outside_box_are_rejected() {
        let geo = make_sphere_magnetic(1.0, 1.0).unwrap();
        assert!(validate_geometry(&geo, &[vec![5.0, 0.0]], &ValidationOptions::default()).is_err());
    }
}

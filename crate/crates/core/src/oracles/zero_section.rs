use crate::linalg::{c, CMatrix, C};
use crate::phi::{expm, phi1};

/// `(Φ_σ)_*` at a point of the zero-section where `g = 1`:
/// `[[1, σ φ₁(σβ)], [0, exp(σβ)]]`, `φ₁(X) = (e^X − 1)/X`.
pub fn zero_section_linearization(beta: &CMatrix, sigma: C) -> CMatrix {
    let n = beta.nrows();
    zero_section_linearization_metric(&CMatrix::identity(n, n), beta, sigma)
}

/// `(Φ_σ)_*` on the zero-section for a general inverse metric `G`:
/// the exponential of `σ[[0, G], [0, βG]]`, i.e. `[[1, σ G φ₁(σβG)], [0, exp(σβG)]]`.
pub fn zero_section_linearization_metric(inv_metric: &CMatrix, beta: &CMatrix, sigma: C) -> CMatrix {
    let n = beta.nrows();
    let k = beta * inv_metric * sigma;
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).fill_with_identity();
    m.view_mut((0, n), (n, n)).copy_from(&(inv_metric * phi1(&k) * sigma));
    m.view_mut((n, n), (n, n)).copy_from(&expm(&k));
    m
}

/// Columns `[σ φ₁(σβ); exp(σβ)]` spanning `P_{(x,0)}(σ)` when `g = 1`.
pub fn zero_section_frame(beta: &CMatrix, sigma: C) -> CMatrix {
    let n = beta.nrows();
    let m = zero_section_linearization(beta, sigma);
    m.view((0, n), (2 * n, n)).into_owned()
}

/// `2τ (1 − e^{−2iτβ})/(2iτβ) = 2τ φ₁(−2iτβ)`, the positivity form of the
/// zero-section frame at `σ + iτ` when `g = 1`.
pub fn zero_section_positivity(beta: &CMatrix, tau: f64) -> CMatrix {
    phi1(&(beta * C::new(0.0, -2.0 * tau))) * c(2.0 * tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, I};
    use crate::phi::real_matrix;

    #[test]
    fn zero_field_is_geodesic_shear() {
        let m = zero_section_linearization(&CMatrix::zeros(2, 2), C::new(0.3, 0.8));
        let mut expected = CMatrix::identity(4, 4);
        expected[(0, 2)] = C::new(0.3, 0.8);
        expected[(1, 3)] = C::new(0.3, 0.8);
        assert!(max_abs(&(m - expected)) < 1e-15);
    }

    #[test]
    fn planar_exponential_at_time_i() {
        let b = 0.9;
        let beta = real_matrix(2, 2, &[0.0, b, -b, 0.0]);
        let m = zero_section_linearization(&beta, I);
        let e = m.view((2, 2), (2, 2)).into_owned();
        let expected =
            CMatrix::identity(2, 2) * c(b.cosh()) + real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]) * (I * b.sinh());
        assert!(max_abs(&(e - expected)) < 1e-14);
    }

    #[test]
    fn matches_exponential_of_generator() {
        let g = real_matrix(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let beta = real_matrix(2, 2, &[0.0, 1.4, -1.4, 0.0]);
        let sigma = C::new(0.3, 0.8);
        let mut gen = CMatrix::zeros(4, 4);
        gen.view_mut((0, 2), (2, 2)).copy_from(&g);
        gen.view_mut((2, 2), (2, 2)).copy_from(&(&beta * &g));
        let direct = expm(&(gen * sigma));
        assert!(max_abs(&(direct - zero_section_linearization_metric(&g, &beta, sigma))) < 1e-13);
    }
}

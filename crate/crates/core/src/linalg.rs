//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C = Complex64;
pub type CMatrix = DMatrix<C>;
pub type CVector = DVector<C>;

pub const I: C = C::new(0.0, 1.0);

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Matrix of `ω^β = dx^j∧dp_j − ½β_jk dx^j∧dx^k`, i.e. `[[−β, 1], [−1, 0]]`,
/// so that `ω^β(X, Y) = Xᵀ Ω Y`.
pub fn symplectic_matrix(beta: &CMatrix) -> CMatrix {
    let n = beta.nrows();
    let mut omega = CMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            omega[(j, k)] = -beta[(j, k)];
        }
        omega[(j, n + j)] = c(1.0);
        omega[(n + j, j)] = c(-1.0);
    }
    omega
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_slice(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_imag(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Column-wise modified Gram–Schmidt in the Hermitian inner product, with one
/// re-orthogonalization pass.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let mut q = m.clone();
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    for j in 0..q.ncols() {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let qk = q.column(k).clone_owned();
                let mut col = q.column_mut(j);
                col.axpy(-proj, &qk, c(1.0));
            }
        }
        let norm = q.column(j).norm();
        if norm <= 1e-13 * scale {
            return Err(Error::IllConditioned(format!("column {j} is linearly dependent on its predecessors")));
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(q)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

pub fn smallest_singular_value(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Largest principal angle between the column spans of `a` and `b`.
///
/// Computed from the sine, `‖(1 − QₐQₐ*) Q_b‖₂`, which stays accurate for
/// nearly coincident subspaces where `acos` of the cosines loses half the digits.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let qa = orthonormalize_columns(a)?;
    let qb = orthonormalize_columns(b)?;
    if qa.ncols() != qb.ncols() {
        return Err(Error::InvalidInput("subspaces of different dimension".into()));
    }
    let residual = &qb - &qa * (qa.adjoint() * &qb);
    let sine = singular_values(&residual).last().copied().unwrap_or(0.0);
    Ok(sine.min(1.0).asin())
}

/// Norm of the component of `v` orthogonal to the span of the orthonormal columns of `q`.
pub fn residual_from_span(q: &CMatrix, v: &CVector) -> f64 {
    let proj = q * (q.adjoint() * v);
    (v - proj).norm()
}

/// Sorted real eigenvalues of the Hermitian part of `h`.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let herm = (h + h.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn vector_from_slice(v: &[C]) -> CVector {
    CVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_produces_orthonormal_columns() {
        let m = CMatrix::from_row_slice(
            3,
            2,
            &[C::new(1.0, 1.0), c(2.0), C::new(0.0, -1.0), c(1.0), c(0.5), C::new(0.3, 0.2)],
        );
        let q = orthonormalize_columns(&m).unwrap();
        let gram = q.adjoint() * &q;
        assert!(max_abs(&(gram - identity(2))) < 1e-14);
        assert!(subspace_distance(&m, &q).unwrap() < 1e-14);
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        assert!(orthonormalize_columns(&m).is_err());
    }

    #[test]
    fn principal_angle_of_coordinate_lines() {
        let a = CMatrix::from_row_slice(2, 1, &[c(1.0), c(0.0)]);
        let theta: f64 = 0.3;
        let b = CMatrix::from_row_slice(2, 1, &[c(theta.cos()), c(theta.sin())]);
        assert!((subspace_distance(&a, &b).unwrap() - theta).abs() < 1e-14);
    }

    #[test]
    fn symplectic_matrix_layout() {
        let beta = CMatrix::from_row_slice(2, 2, &[c(0.0), c(2.0), c(-2.0), c(0.0)]);
        let om = symplectic_matrix(&beta);
        assert_eq!(om[(0, 1)], c(-2.0));
        assert_eq!(om[(0, 2)], c(1.0));
        assert_eq!(om[(3, 1)], c(-1.0));
        assert_eq!(om[(2, 3)], c(0.0));
    }
}

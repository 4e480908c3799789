//! Entire functions with removable singularities, evaluated by series inside
//! a small switch radius and by the closed form outside it.

use nalgebra::DMatrix;

use crate::linalg::{c, CMatrix, C};

/// Below this modulus of the argument the power series is used.
pub const SWITCH_RADIUS: f64 = 1e-3;

/// `sin(w)/w`.
pub fn sinc(w: C) -> C {
    if w.norm() < SWITCH_RADIUS {
        let w2 = w * w;
        c(1.0) - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// `(1 − cos w)/w²`.
pub fn versc(w: C) -> C {
    if w.norm() < SWITCH_RADIUS {
        let w2 = w * w;
        c(0.5) - w2 / 24.0 + w2 * w2 / 720.0
    } else {
        (c(1.0) - w.cos()) / (w * w)
    }
}

/// `sinh(w)/w`.
pub fn sinhc(w: C) -> C {
    if w.norm() < SWITCH_RADIUS {
        let w2 = w * w;
        c(1.0) + w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sinh() / w
    }
}

/// `(cosh w − 1)/w²`.
pub fn coshm1_sq(w: C) -> C {
    if w.norm() < SWITCH_RADIUS {
        let w2 = w * w;
        c(0.5) + w2 / 24.0 + w2 * w2 / 720.0
    } else {
        (w.cosh() - c(1.0)) / (w * w)
    }
}

/// `sin(√q)/√q` as an entire function of `q = w²` (branch-free).
pub fn sinc_of_square(q: C) -> C {
    if q.norm() < SWITCH_RADIUS * SWITCH_RADIUS {
        c(1.0) - q / 6.0 + q * q / 120.0
    } else {
        sinc(q.sqrt())
    }
}

/// `(1 − cos √q)/q` as an entire function of `q = w²`.
pub fn versc_of_square(q: C) -> C {
    if q.norm() < SWITCH_RADIUS * SWITCH_RADIUS {
        c(0.5) - q / 24.0 + q * q / 720.0
    } else {
        versc(q.sqrt())
    }
}

/// Matrix exponential.
pub fn expm(x: &CMatrix) -> CMatrix {
    x.clone().exp()
}

/// `φ₁(X) = (e^X − 1)/X = Σ_{k≥0} X^k/(k+1)!`, well defined for singular `X`.
///
/// Small arguments use the series; otherwise the top-right block of
/// `exp([[X, 1], [0, 0]])` is returned, which needs no inverse of `X`.
pub fn phi1(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let norm = x.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    if norm < SWITCH_RADIUS {
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..8 {
            term = &term * x / c((k + 1) as f64);
            sum += &term;
        }
        return sum;
    }
    let mut aug = CMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(x);
    aug.view_mut((0, n), (n, n)).copy_from(&CMatrix::identity(n, n));
    let e = expm(&aug);
    e.view((0, n), (n, n)).into_owned()
}

/// Real-valued convenience for building matrices in tests and oracles.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, data).map(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn scalar_functions_are_continuous_across_switch() {
        for f in [sinc, versc, sinhc, coshm1_sq] {
            let a = f(C::new(0.999e-3, 0.0));
            let b = f(C::new(1.001e-3, 0.0));
            assert!((a - b).norm() < 1e-9);
        }
        assert!((sinc(c(0.0)) - c(1.0)).norm() == 0.0);
        assert!((coshm1_sq(c(0.0)) - c(0.5)).norm() == 0.0);
    }

    #[test]
    fn phi1_of_zero_is_identity_and_matches_inverse_formula() {
        let z = CMatrix::zeros(3, 3);
        assert!(max_abs(&(phi1(&z) - CMatrix::identity(3, 3))) == 0.0);

        let x = real_matrix(2, 2, &[0.0, 0.7, -0.7, 0.0]) * C::new(0.3, 0.8);
        let inv = x.clone().try_inverse().unwrap();
        let direct = inv * (expm(&x) - CMatrix::identity(2, 2));
        assert!(max_abs(&(phi1(&x) - direct)) < 1e-13);
    }

    #[test]
    fn phi1_handles_singular_antisymmetric_matrices() {
        // 3×3 antisymmetric matrices are always singular.
        let x = real_matrix(3, 3, &[0.0, 0.4, -0.2, -0.4, 0.0, 0.9, 0.2, -0.9, 0.0]);
        let p = phi1(&x);
        // X φ₁(X) = e^X − 1 holds regardless of invertibility.
        assert!(max_abs(&(&x * &p - (expm(&x) - CMatrix::identity(3, 3)))) < 1e-13);
    }
}

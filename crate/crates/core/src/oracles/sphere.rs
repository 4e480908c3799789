use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::PhasePoint;
use crate::linalg::{c, CMatrix, C, I};
use crate::phi::{coshm1_sq, sinc_of_square, sinhc, versc_of_square};

pub type V3 = Vector3<C>;

/// `(x, p) ∈ TS²_ℂ ⊂ ℂ³ × ℂ³` on the sphere of radius `r` with field `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereState {
    pub x: V3,
    pub p: V3,
    pub r: f64,
    pub b: f64,
}

/// Complex-bilinear dot product.
fn dot(a: &V3, b: &V3) -> C {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SphereState {
    pub fn new(x: V3, p: V3, r: f64, b: f64) -> Self {
        Self { x, p, r, b }
    }

    pub fn real(x: [f64; 3], p: [f64; 3], r: f64, b: f64) -> Self {
        Self::new(V3::from_fn(|i, _| c(x[i])), V3::from_fn(|i, _| c(p[i])), r, b)
    }

    /// `max(|x·x − r²|, |x·p|)`.
    pub fn constraint_residual(&self) -> f64 {
        (dot(&self.x, &self.x) - c(self.r * self.r)).norm().max(dot(&self.x, &self.p).norm())
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let res = self.constraint_residual();
        if res > tol {
            return Err(Error::InvalidInput(format!("state violates x·x = r², x·p = 0 by {res:e}")));
        }
        Ok(())
    }

    pub fn distance(&self, other: &SphereState) -> f64 {
        (self.x - other.x).amax_norm().max((self.p - other.p).amax_norm())
    }
}

trait AmaxNorm {
    fn amax_norm(&self) -> f64;
}

impl AmaxNorm for V3 {
    fn amax_norm(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `J = x × p − rB x`.
pub fn sphere_moment_map(state: &SphereState) -> V3 {
    state.x.cross(&state.p) - state.x * c(state.r * state.b)
}

/// `exp[(σ/r²) J × ·]` applied to `x` and `p`, by Rodrigues' formula with the
/// angle entering only through `θ² = (σ/r²)² J·J`.
pub fn sphere_flow_oracle(state: &SphereState, sigma: C) -> SphereState {
    let omega = sphere_moment_map(state) * (sigma / (state.r * state.r));
    let theta2 = dot(&omega, &omega);
    let (s1, s2) = (sinc_of_square(theta2), versc_of_square(theta2));
    let rotate = |v: &V3| {
        let wv = omega.cross(v);
        v + wv * s1 + omega.cross(&wv) * s2
    };
    SphereState::new(rotate(&state.x), rotate(&state.p), state.r, state.b)
}

/// `a = cosh L·x + i(sinh L/L)·p + ((cosh L − 1)/L²)·B·J/r`, `L = √(p² + r²B²)/r`.
///
/// The `J` term carries `+`: with `−`, `a(x, 0) = (2 cosh B − 1)x`, off the complex sphere.
pub fn sphere_embedding_map(state: &SphereState) -> V3 {
    let r = state.r;
    let l2 = (dot(&state.p, &state.p) + c(r * r * state.b * state.b)) / (r * r);
    let l = l2.sqrt();
    let j = sphere_moment_map(state);
    let ch_m1 = coshm1_sq(l);
    state.x * (c(1.0) + l2 * ch_m1) + state.p * (I * sinhc(l)) + j * (ch_m1 * (state.b / r))
}

/// `|Im a| = (sinh L/L)|p|` at a real state with `|p| = p`.
pub fn im_a_modulus(p: f64, r: f64, b: f64) -> f64 {
    let l = (p * p + r * r * b * b).sqrt() / r;
    sinhc(c(l)).re * p
}

/// The displayed alternative `(sinh(p² + r²B²)/(p² + r²B²))·p`, kept for reporting.
pub fn ima_display(p: f64, r: f64, b: f64) -> f64 {
    let q = p * p + r * r * b * b;
    sinhc(c(q)).re * p
}

/// Stereographic embedding `u ↦ r(2u, u·u − 1)/(1 + u·u)` from the north pole.
pub fn stereographic(u: &[C], r: f64) -> V3 {
    let s = u[0] * u[0] + u[1] * u[1];
    let w = c(1.0) + s;
    V3::new(u[0] * 2.0 * r / w, u[1] * 2.0 * r / w, (s - 1.0) * r / w)
}

/// `u = (a₁, a₂)/(r − a₃)`.
pub fn stereographic_inverse(a: &V3, r: f64) -> Result<[C; 2]> {
    let d = c(r) - a[2];
    if d.norm() < 1e-12 * r {
        return Err(Error::InvalidInput("point is the projection pole".into()));
    }
    Ok([a[0] / d, a[1] / d])
}

/// `∂X/∂u`, a 3×2 matrix.
fn stereographic_jacobian(u: &[C], r: f64) -> CMatrix {
    let s = u[0] * u[0] + u[1] * u[1];
    let w = c(1.0) + s;
    let w2 = w * w;
    let mut m = CMatrix::zeros(3, 2);
    for j in 0..2 {
        for a in 0..2 {
            let delta = if a == j { w * 2.0 } else { c(0.0) };
            m[(a, j)] = (delta - u[a] * u[j] * 4.0) * r / w2;
        }
        m[(2, j)] = u[j] * 4.0 * r / w2;
    }
    m
}

/// Chart point `(u, p_u)` to `(X, P)` with `P = DX g⁻¹ p_u` the velocity.
pub fn chart_to_embedding(z: &PhasePoint, r: f64, b: f64) -> SphereState {
    let u = &z.x;
    let s = u[0] * u[0] + u[1] * u[1];
    let w = c(1.0) + s;
    let ginv = w * w / (4.0 * r * r);
    let dx = stereographic_jacobian(u, r);
    let pv = nalgebra::DVector::from_column_slice(&z.p) * ginv;
    let p = &dx * pv;
    SphereState::new(stereographic(u, r), V3::new(p[0], p[1], p[2]), r, b)
}

/// Inverse of [`chart_to_embedding`]: `p_u = DXᵀ P`.
pub fn embedding_to_chart(state: &SphereState) -> Result<PhasePoint> {
    let u = stereographic_inverse(&state.x, state.r)?;
    let dx = stereographic_jacobian(&u, state.r);
    let p = dx.transpose() * nalgebra::DVector::from_column_slice(state.p.as_slice());
    Ok(PhasePoint::new(u.to_vec(), vec![p[0], p[1]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, r: f64, b: f64) -> SphereState {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let nx = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let x = x.map(|v| v * r / nx);
        let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let k = (q[0] * x[0] + q[1] * x[1] + q[2] * x[2]) / (r * r);
        let p = std::array::from_fn(|i| q[i] - k * x[i]);
        SphereState::real(x, p, r, b)
    }

    #[test]
    fn moment_map_examples() {
        let (r, b, p) = (1.5, 0.4, 0.7);
        let s = SphereState::real([r, 0.0, 0.0], [0.0, p, 0.0], r, b);
        let j = sphere_moment_map(&s);
        assert!((j - V3::new(c(-r * r * b), c(0.0), c(r * p))).amax_norm() < 1e-15);
        let j2 = dot(&j, &j);
        assert!((j2 - c(r * r * p * p + r.powi(4) * b * b)).norm() < 1e-14);
    }

    #[test]
    fn embedding_map_is_time_i_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_state(&mut rng, 1.3, 0.8);
            let a = sphere_embedding_map(&s);
            let flowed = sphere_flow_oracle(&s, I);
            assert!((a - flowed.x).amax_norm() < 1e-12);
            assert!((dot(&a, &a) - c(1.69)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_momentum_fixes_base_point() {
        let s = SphereState::real([0.0, 0.6, 0.8], [0.0; 3], 1.0, 1.7);
        assert!((sphere_embedding_map(&s) - s.x).amax_norm() < 1e-15);
    }

    #[test]
    fn flow_conserves_constraints_at_complex_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = random_state(&mut rng, 0.9, -1.1);
        let t = sphere_flow_oracle(&s, C::new(0.4, 1.1));
        assert!(t.constraint_residual() < 1e-12);
        let j0 = sphere_moment_map(&s);
        assert!((sphere_moment_map(&t) - j0).amax_norm() < 1e-12);
    }

    #[test]
    fn chart_round_trip() {
        let z = PhasePoint::new(vec![C::new(0.3, 0.2), C::new(-1.1, 0.05)], vec![C::new(0.5, -0.3), C::new(0.2, 0.1)]);
        let s = chart_to_embedding(&z, 1.7, 0.3);
        assert!(s.constraint_residual() < 1e-13);
        assert!(embedding_to_chart(&s).unwrap().distance(&z) < 1e-13);
    }

    #[test]
    fn im_a_is_monotone_and_display_differs() {
        let mut last = -1.0;
        for k in 0..100 {
            let v = im_a_modulus(k as f64 * 0.05, 1.0, 1.0);
            assert!(v > last);
            last = v;
        }
        assert!((ima_display(1.0, 1.0, 1.0) - im_a_modulus(1.0, 1.0, 1.0)).abs() > 0.1);
    }
}

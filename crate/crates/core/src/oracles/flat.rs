use crate::error::{Error, Result};
use crate::geometry::PhasePoint;
use crate::linalg::{c, CMatrix, C, I};
use crate::phi::{coshm1_sq, sinc, sinhc, versc};

/// Constant planar field `β = B dx₁∧dx₂` with `E = |p|²/(2mη)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatParams {
    pub field: f64,
    pub mass_freq: f64,
}

impl FlatParams {
    pub fn new(field: f64, mass_freq: f64) -> Result<Self> {
        if !(mass_freq > 0.0) {
            return Err(Error::InvalidInput(format!("mass_freq must be positive, got {mass_freq}")));
        }
        Ok(Self { field, mass_freq })
    }

    /// `B̃ = B/(mη)`.
    pub fn reduced(&self) -> f64 {
        self.field / self.mass_freq
    }
}

fn check_planar(z: &PhasePoint) -> Result<()> {
    if z.dim() != 2 {
        return Err(Error::InvalidInput("the flat oracle is planar".into()));
    }
    Ok(())
}

/// `Φ_σ` for complex `σ`, with `w = σB̃`:
/// `x₁ + (σ/mη)(p₁ sinc w + p₂ w versc w)`, `x₂ + (σ/mη)(p₂ sinc w − p₁ w versc w)`,
/// `p ↦ (p₁ cos w + p₂ sin w, −p₁ sin w + p₂ cos w)`.
pub fn flat_flow_oracle(params: FlatParams, z: &PhasePoint, sigma: C) -> Result<PhasePoint> {
    check_planar(z)?;
    let w = sigma * params.reduced();
    let s = sigma / params.mass_freq;
    let (sc, vw) = (sinc(w), w * versc(w));
    let (x1, x2, p1, p2) = (z.x[0], z.x[1], z.p[0], z.p[1]);
    Ok(PhasePoint::new(
        vec![x1 + s * (p1 * sc + p2 * vw), x2 + s * (p2 * sc - p1 * vw)],
        vec![p1 * w.cos() + p2 * w.sin(), -p1 * w.sin() + p2 * w.cos()],
    ))
}

/// Tangent map of `Φ_σ` (independent of the point).
pub fn flat_pushforward(params: FlatParams, sigma: C) -> CMatrix {
    let w = sigma * params.reduced();
    let s = sigma / params.mass_freq;
    let (a, b) = (s * sinc(w), s * w * versc(w));
    let (cw, sw) = (w.cos(), w.sin());
    let o = c(0.0);
    let one = c(1.0);
    CMatrix::from_row_slice(4, 4, &[one, o, a, b, o, one, -b, a, o, o, cw, sw, o, o, -sw, cw])
}

/// `(z₁, z₂) = π∘Φ_i`:
/// `z₁ = x₁ + i(sinh B̃/B)p₁ − ((cosh B̃ − 1)/B)p₂`, `z₂ = x₂ + i(sinh B̃/B)p₂ + ((cosh B̃ − 1)/B)p₁`.
pub fn flat_complex_coordinates(params: FlatParams, x: &[f64], p: &[f64]) -> (C, C) {
    let bt = c(params.reduced());
    let m = params.mass_freq;
    let sh = sinhc(bt) / m;
    let ch = bt * coshm1_sq(bt) / m;
    (c(x[0]) + I * sh * p[0] - ch * p[1], c(x[1]) + I * sh * p[1] + ch * p[0])
}

/// `f_σ = −(sin σB̃/2)(x₂p₁ − x₁p₂) − ((cos σB̃ − 1)/2)(x₁p₁ + x₂p₂) + (sin σB̃/(2B))|p|²`.
pub fn flat_f_sigma(params: FlatParams, z: &PhasePoint, sigma: C) -> Result<C> {
    check_planar(z)?;
    let w = sigma * params.reduced();
    let (x1, x2, p1, p2) = (z.x[0], z.x[1], z.p[0], z.p[1]);
    // sin(σB̃)/B = (σ/mη) sinc(σB̃)
    let sin_over_b = sigma / params.mass_freq * sinc(w);
    Ok(-w.sin() * 0.5 * (x2 * p1 - x1 * p2)
        + w * w * versc(w) * 0.5 * (x1 * p1 + x2 * p2)
        + sin_over_b * 0.5 * (p1 * p1 + p2 * p2))
}

/// `2i f_{−i}` in terms of `z₁ = x + iy`, `z₂ = u + iv`:
/// `−B(uy − vx) + B coth B̃ (v² + y²) − iB tanh(B̃/2)(uv + xy)`.
pub fn flat_two_i_f_minus_i(params: FlatParams, z1: C, z2: C) -> C {
    let b = params.field;
    let bt = params.reduced();
    let (x, y, u, v) = (z1.re, z1.im, z2.re, z2.im);
    let coth_term = coth_times(b, bt) * (v * v + y * y);
    C::new(-b * (u * y - v * x) + coth_term, -b * (0.5 * bt).tanh() * (u * v + x * y))
}

/// `κ₂ = −B(uy − vx) + B coth B̃ (v² + y²)`.
pub fn flat_kappa2(params: FlatParams, z1: C, z2: C) -> f64 {
    flat_two_i_f_minus_i(params, z1, z2).re
}

/// `B coth(B/mη)` with its limit `mη` at `B = 0`.
fn coth_times(b: f64, bt: f64) -> f64 {
    if bt.abs() < 1e-8 {
        b / bt
    } else {
        b / bt.tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> FlatParams {
        FlatParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn imaginary_time_example() {
        let z = flat_flow_oracle(unit(), &PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]), I).unwrap();
        let sh = 1f64.sinh();
        let ch = 1f64.cosh();
        let expected = PhasePoint::new(vec![I * sh, c(ch - 1.0)], vec![c(ch), -I * sh]);
        assert!(z.distance(&expected) < 1e-15);
    }

    #[test]
    fn full_larmor_period_returns() {
        let params = FlatParams::new(1.5, 0.6).unwrap();
        let z0 = PhasePoint::real(&[0.3, -0.2], &[0.7, 1.1]);
        let z = flat_flow_oracle(params, &z0, c(2.0 * std::f64::consts::PI / params.reduced())).unwrap();
        assert!(z.distance(&z0) < 1e-14);
    }

    #[test]
    fn zero_field_is_straight_line() {
        let params = FlatParams::new(0.0, 2.0).unwrap();
        let z0 = PhasePoint::real(&[0.3, -0.2], &[0.7, 1.1]);
        let sigma = C::new(0.4, 0.9);
        let z = flat_flow_oracle(params, &z0, sigma).unwrap();
        assert!((z.x[0] - (c(0.3) + sigma * 0.35)).norm() < 1e-15);
        assert!((z.x[1] - (c(-0.2) + sigma * 0.55)).norm() < 1e-15);
    }

    #[test]
    fn coordinates_are_time_i_base_point() {
        let params = FlatParams::new(2.0, 0.8).unwrap();
        let (x, p) = ([0.4, -1.0], [0.3, 0.9]);
        let z = flat_flow_oracle(params, &PhasePoint::real(&x, &p), I).unwrap();
        let (z1, z2) = flat_complex_coordinates(params, &x, &p);
        assert!((z.x[0] - z1).norm() < 1e-14 && (z.x[1] - z2).norm() < 1e-14);
    }

    #[test]
    fn pushforward_columns_at_time_i() {
        let m = flat_pushforward(unit(), I);
        let (sh, ch) = (1f64.sinh(), 1f64.cosh());
        let col1 = [I * sh, c(ch - 1.0), c(ch), -I * sh];
        let col2 = [c(1.0 - ch), I * sh, I * sh, c(ch)];
        for r in 0..4 {
            assert!((m[(r, 2)] - col1[r]).norm() < 1e-15);
            assert!((m[(r, 3)] - col2[r]).norm() < 1e-15);
        }
    }

    #[test]
    fn two_i_f_minus_i_matches_f_sigma() {
        let params = FlatParams::new(1.3, 0.7).unwrap();
        let (x, p) = ([0.2, -0.5], [0.8, 0.4]);
        let f = flat_f_sigma(params, &PhasePoint::real(&x, &p), -I).unwrap();
        let (z1, z2) = flat_complex_coordinates(params, &x, &p);
        assert!((I * f * 2.0 - flat_two_i_f_minus_i(params, z1, z2)).norm() < 1e-13);
    }
}

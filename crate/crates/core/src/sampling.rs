//! Seeded random sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::oracles::SphereState;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a named purpose, so adding samples to one check
/// does not shift another.
pub fn stream(seed: u64, label: &str) -> SampleRng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Uniform point in `(−w, w)^n`.
pub fn box_point(rng: &mut SampleRng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half_width..half_width)).collect()
}

/// Real tube point: `x` uniform in `(−w, w)^n`, `p` in a uniformly random
/// direction with metric length `g(p,p)^{1/2}` uniform in `[0, radius)`.
pub fn tube_point(rng: &mut SampleRng, geo: &ChartedGeometry, half_width: f64, radius: f64) -> PhasePoint {
    let n = geo.dim();
    let x = box_point(rng, n, half_width);
    let dir: Vec<f64> = loop {
        let d = box_point(rng, n, 1.0);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            break d.iter().map(|v| v / norm).collect();
        }
    };
    let unit = PhasePoint::real(&x, &dir);
    let len = geo.metric_norm_sq(&unit).re.sqrt();
    let target = rng.random_range(0.0..radius);
    let p: Vec<f64> = dir.iter().map(|v| v * target / len).collect();
    PhasePoint::real(&x, &p)
}

/// Real point of the zero-section.
pub fn zero_section_point(rng: &mut SampleRng, n: usize, half_width: f64) -> PhasePoint {
    PhasePoint::real(&box_point(rng, n, half_width), &vec![0.0; n])
}

/// Uniform `x` on the sphere of radius `r`, tangent `p` with `|p| < p_max`.
pub fn sphere_state(rng: &mut SampleRng, r: f64, b: f64, p_max: f64) -> SphereState {
    let x: [f64; 3] = loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            break v.map(|t| t * r / n);
        }
    };
    let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let k = (q[0] * x[0] + q[1] * x[1] + q[2] * x[2]) / (r * r);
    let t: [f64; 3] = std::array::from_fn(|i| q[i] - k * x[i]);
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt().max(1e-300);
    let len = rng.random_range(0.0..p_max);
    SphereState::real(x, t.map(|v| v * len / tn), r, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere_magnetic;

    #[test]
    fn tube_points_respect_radius_and_are_reproducible() {
        let geo = make_sphere_magnetic(1.0, 1.0).unwrap();
        let a: Vec<_> = {
            let mut r = rng(7);
            (0..50).map(|_| tube_point(&mut r, &geo, 1.5, 2.0)).collect()
        };
        let mut r = rng(7);
        for z in &a {
            assert!(z.in_tube(&geo, 2.0));
            assert_eq!(*z, tube_point(&mut r, &geo, 1.5, 2.0));
        }
    }

    #[test]
    fn sphere_states_satisfy_constraints() {
        let mut r = stream(3, "sphere");
        for _ in 0..20 {
            assert!(sphere_state(&mut r, 1.7, 0.4, 2.0).constraint_residual() < 1e-13);
        }
    }
}

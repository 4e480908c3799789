//! Dormand–Prince 5(4) for complex-valued systems on the unit parameter interval.
//!
//! The integrator advances `dy/dλ = f(λ, y)` from `λ = 0` to `λ = 1`. Accepted
//! step sizes are recorded so the same mesh can be replayed without error
//! control; a replayed solution is a smooth function of `y(0)`, which keeps
//! finite differences across nearby initial data free of step-selection noise.

use crate::error::{Error, Result};
use crate::linalg::C;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Smallest admissible step in `λ`.
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-13, max_steps: 200_000, min_step: 1e-14 }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub y: Vec<C>,
    /// Accepted step sizes, summing to 1.
    pub steps: Vec<f64>,
    pub rejected: usize,
}

fn combine(out: &mut [C], y: &[C], h: f64, terms: &[(f64, &[C])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o = y[i] + acc * h;
    }
}

struct Stages {
    k: [Vec<C>; 7],
    tmp: Vec<C>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![C::new(0.0, 0.0); n]), tmp: vec![C::new(0.0, 0.0); n] }
    }
}

/// One Dormand–Prince step from `(t, y)` with `k[0] = f(t, y)` already filled.
/// Leaves the fifth-order solution in `y_new` and `f(t+h, y_new)` in `k[6]`.
fn step<F>(f: &mut F, t: f64, y: &[C], h: f64, st: &mut Stages, y_new: &mut [C]) -> Result<()>
where
    F: FnMut(f64, &[C]) -> Result<Vec<C>>,
{
    let [k1, k2, k3, k4, k5, k6, k7] = &mut st.k;
    combine(&mut st.tmp, y, h, &[(A21, k1)]);
    *k2 = f(t + C2 * h, &st.tmp)?;
    combine(&mut st.tmp, y, h, &[(A31, k1), (A32, k2)]);
    *k3 = f(t + C3 * h, &st.tmp)?;
    combine(&mut st.tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
    *k4 = f(t + C4 * h, &st.tmp)?;
    combine(&mut st.tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    *k5 = f(t + C5 * h, &st.tmp)?;
    combine(&mut st.tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
    *k6 = f(t + h, &st.tmp)?;
    combine(y_new, y, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
    *k7 = f(t + h, y_new)?;
    Ok(())
}

fn error_norm(st: &Stages, y: &[C], y_new: &[C], h: f64, opts: &OdeOptions) -> f64 {
    let [k1, _, k3, k4, k5, k6, k7] = &st.k;
    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
        sum += (e.norm() / scale).powi(2);
    }
    (sum / y.len().max(1) as f64).sqrt()
}

fn initial_step(y: &[C], f0: &[C], opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for (yi, fi) in y.iter().zip(f0) {
        let scale = opts.abs_tol + opts.rel_tol * yi.norm();
        d0 += (yi.norm() / scale).powi(2);
        d1 += (fi.norm() / scale).powi(2);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * (d0 / d1).sqrt() };
    h.clamp(1e-8, 0.1)
}

/// Adaptive integration over `λ ∈ [0, 1]`.
///
/// `accept` runs after each accepted step and may abort the integration.
/// Right-hand-side failures during a trial step shrink the step; they are
/// returned only once the step falls below `min_step`.
pub fn integrate<F, A>(mut f: F, y0: &[C], opts: &OdeOptions, mut accept: A) -> Result<OdeSolution>
where
    F: FnMut(f64, &[C]) -> Result<Vec<C>>,
    A: FnMut(f64, &[C]) -> Result<()>,
{
    let n = y0.len();
    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![C::new(0.0, 0.0); n];
    st.k[0] = f(0.0, &y)?;
    let mut h = initial_step(&y, &st.k[0], opts);
    let mut t = 0.0;
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut count = 0;
    while t < 1.0 {
        if count >= opts.max_steps {
            return Err(Error::MaxSteps(opts.max_steps));
        }
        count += 1;
        let last = t + h >= 1.0 - 1e-15;
        if last {
            h = 1.0 - t;
        }
        if let Err(e) = step(&mut f, t, &y, h, &mut st, &mut y_new) {
            rejected += 1;
            h *= 0.25;
            if h < opts.min_step {
                return Err(e);
            }
            continue;
        }
        let err = error_norm(&st, &y, &y_new, h, opts);
        if err <= 1.0 && err.is_finite() {
            t = if last { 1.0 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            st.k.swap(0, 6);
            steps.push(h);
            accept(t, &y)?;
            let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
            h *= factor;
        } else {
            rejected += 1;
            let factor = if err.is_finite() { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0) } else { MIN_FACTOR };
            h *= factor;
        }
        if h < opts.min_step && t < 1.0 {
            return Err(Error::StepUnderflow { time: C::new(t, 0.0), step: h });
        }
    }
    Ok(OdeSolution { y, steps, rejected })
}

/// Fixed-mesh Dormand–Prince integration with the given step sizes.
pub fn replay<F, A>(mut f: F, y0: &[C], steps: &[f64], mut accept: A) -> Result<OdeSolution>
where
    F: FnMut(f64, &[C]) -> Result<Vec<C>>,
    A: FnMut(f64, &[C]) -> Result<()>,
{
    let n = y0.len();
    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![C::new(0.0, 0.0); n];
    st.k[0] = f(0.0, &y)?;
    let mut t = 0.0;
    for &h in steps {
        step(&mut f, t, &y, h, &mut st, &mut y_new)?;
        t += h;
        std::mem::swap(&mut y, &mut y_new);
        st.k.swap(0, 6);
        accept(t, &y)?;
    }
    Ok(OdeSolution { y, steps: steps.to_vec(), rejected: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, I};

    #[test]
    fn exponential_at_complex_rate() {
        let rate = C::new(-0.4, 2.0);
        let sol = integrate(|_, y| Ok(vec![y[0] * rate]), &[c(1.0)], &OdeOptions::default(), |_, _| Ok(())).unwrap();
        assert!((sol.y[0] - rate.exp()).norm() < 1e-11);
        assert!((sol.steps.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_oscillator_at_imaginary_time() {
        // y'' = −ω² y along s = iλ: cos(iω) = cosh ω.
        let omega = 1.3;
        let f = |_: f64, y: &[C]| Ok(vec![y[1] * I, -y[0] * (omega * omega) * I]);
        let sol = integrate(f, &[c(1.0), c(0.0)], &OdeOptions::default(), |_, _| Ok(())).unwrap();
        assert!((sol.y[0] - c(omega.cosh())).norm() < 1e-10);
    }

    #[test]
    fn replay_reproduces_adaptive_result() {
        let f = |t: f64, y: &[C]| Ok(vec![y[0] * C::new(t, 1.0)]);
        let opts = OdeOptions::default();
        let sol = integrate(f, &[c(0.5)], &opts, |_, _| Ok(())).unwrap();
        let again = replay(f, &[c(0.5)], &sol.steps, |_, _| Ok(())).unwrap();
        assert_eq!(sol.y, again.y);
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        // y' = 3y², y(0) = 1 blows up at λ = 1/3.
        let f = |_: f64, y: &[C]| {
            if y[0].norm() > 1e8 {
                return Err(Error::LeftTube { time: c(0.0), reason: "overflow".into() });
            }
            Ok(vec![y[0] * y[0] * 3.0])
        };
        assert!(integrate(f, &[c(1.0)], &OdeOptions::default(), |_, _| Ok(())).is_err());
    }
}

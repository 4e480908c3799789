//! The functions `f_σ`, Kähler potentials and holomorphic sections.
//!
//! `f_t(z) = t·E(z) − q`, where `q = ∫ A(ẋ) ds` is accumulated along the
//! path `0 → −t` starting at `z`. Derivatives of `f` and of holomorphic
//! extensions are central differences with one Richardson level, evaluated
//! on the step mesh recorded at the centre point.

use serde::Serialize;

use crate::diff::{richardson, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::flow::{flow_complex_meshed, hamiltonian_field, ComplexTime, FlowMesh, FlowOptions};
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::linalg::{c, CMatrix, C, I};
use crate::oracles::{flat_complex_coordinates, FlatParams};
use crate::structure::frame_at;

/// `f_t(z)`.
pub fn potential_f(geo: &ChartedGeometry, z: &PhasePoint, t: &ComplexTime, opts: &FlowOptions) -> Result<C> {
    potential_f_meshed(geo, z, t, opts, None).map(|(f, _)| f)
}

pub fn potential_f_meshed(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    opts: &FlowOptions,
    mesh: Option<&FlowMesh>,
) -> Result<(C, FlowMesh)> {
    let opts = opts.without_jacobian();
    let (state, mesh) = flow_complex_meshed(geo, z, &t.negated(), &opts, mesh)?;
    Ok((t.target() * geo.energy(z) - state.quad, mesh))
}

/// `θ^A(V) = (p_j + A_j(x)) V^{x_j}` for a tangent vector `V` in `(x, p)` coordinates.
pub fn theta_a(geo: &ChartedGeometry, z: &PhasePoint, v: &[C]) -> C {
    let a = geo.potential(&z.x);
    (0..geo.dim()).map(|j| (z.p[j] + a[j]) * v[j]).sum()
}

/// Real partial derivatives of a scalar evaluated with mesh replay.
fn gradient<F>(z: &PhasePoint, h: f64, mut eval: F) -> Result<Vec<C>>
where
    F: FnMut(&PhasePoint, Option<&FlowMesh>) -> Result<(C, FlowMesh)>,
{
    let (_, mesh) = eval(z, None)?;
    (0..2 * z.dim()).map(|k| richardson(|d| eval(&z.displaced(k, c(d)), Some(&mesh)).map(|(v, _)| v), h)).collect()
}

/// `∇f_t` in the real coordinates `(x, p)`.
pub fn potential_gradient(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    h: f64,
    opts: &FlowOptions,
) -> Result<Vec<C>> {
    gradient(z, h, |w, m| potential_f_meshed(geo, w, t, opts, m))
}

/// `|∂f_σ/∂σ + X_E(f_σ) − (E + A(π_*X_E))|` at real `σ`.
pub fn kde_residual(geo: &ChartedGeometry, z: &PhasePoint, sigma: f64, h: f64, opts: &FlowOptions) -> Result<f64> {
    let opts = FlowOptions { disk_radius: f64::INFINITY, ..*opts };
    // Paths to −σ' share the λ-mesh of a reference path of nonzero length.
    let reference = if sigma == 0.0 { h } else { sigma };
    let (_, mesh) = potential_f_meshed(geo, z, &ComplexTime::real(reference), &opts, None)?;
    let f = |w: &PhasePoint, s: f64| potential_f_meshed(geo, w, &ComplexTime::real(s), &opts, Some(&mesh)).map(|r| r.0);
    let df_dsigma: C = richardson(|d| f(z, sigma + d), h)?;
    let field = hamiltonian_field(geo, z)?;
    let mut directional = c(0.0);
    for (k, xk) in field.iter().enumerate() {
        if *xk != c(0.0) {
            let dk: C = richardson(|d| f(&z.displaced(k, c(d)), sigma), h)?;
            directional += dk * xk;
        }
    }
    let n = geo.dim();
    let source = geo.energy(z) + geo.potential(&z.x).iter().zip(&field[..n]).map(|(a, v)| a * v).sum::<C>();
    Ok((df_dsigma + directional - source).norm())
}

/// `max_Z̄ |Z̄(f_{−i}) − θ^A(Z̄)|` over the given `(0,1)` columns (frame at `t = −i`).
pub fn dbar_residual(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    frame_conj: &CMatrix,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    let grad = potential_gradient(geo, z, &ComplexTime::new(-I), h, opts)?;
    Ok(max_column_residual(frame_conj, &grad, |col| theta_a(geo, z, col)))
}

fn max_column_residual(columns: &CMatrix, grad: &[C], mut target: impl FnMut(&[C]) -> C) -> f64 {
    let mut worst = 0.0_f64;
    for col in columns.column_iter() {
        let v: Vec<C> = col.iter().copied().collect();
        let d: C = v.iter().zip(grad).map(|(a, b)| a * b).sum();
        worst = worst.max((d - target(&v)).norm());
    }
    worst
}

/// The orthonormal `(0,1)` frame at `z`, i.e. the frame at `t = −i`.
pub fn antiholomorphic_frame(geo: &ChartedGeometry, z: &PhasePoint, opts: &FlowOptions) -> Result<CMatrix> {
    Ok(frame_at(geo, z, &ComplexTime::new(-I), opts)?.columns)
}

/// Coefficient of `tanh(B̃/2)(x² − y² + u² − v²)` in `κ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TanhCoefficient {
    /// `B/2`, making `2i f_{−i} + g` real for `g = (B/2) tanh(B̃/2)(z₁² + z₂²)`.
    HalfB,
    /// `B`.
    FullB,
}

impl TanhCoefficient {
    pub fn value(self, b: f64) -> f64 {
        match self {
            TanhCoefficient::HalfB => 0.5 * b,
            TanhCoefficient::FullB => b,
        }
    }
}

/// `κ₁ = −B(uy − vx) + B coth B̃ (v² + y²) + c·tanh(B̃/2)(x² − y² + u² − v²)`
/// with `z₁ = x + iy`, `z₂ = u + iv`, and `c = B/2`.
pub fn kappa1_flat(b: f64, mass_freq: f64, z1: C, z2: C) -> f64 {
    kappa1_flat_with(TanhCoefficient::HalfB, b, mass_freq, z1, z2)
}

pub fn kappa1_flat_with(coef: TanhCoefficient, b: f64, mass_freq: f64, z1: C, z2: C) -> f64 {
    let params = FlatParams { field: b, mass_freq };
    let bt = params.reduced();
    let (x, y, u, v) = (z1.re, z1.im, z2.re, z2.im);
    crate::oracles::flat_kappa2(params, z1, z2) + coef.value(b) * (0.5 * bt).tanh() * (x * x - y * y + u * u - v * v)
}

/// The holomorphic correction `g` with `κ₁ = 2i f_{−i} + g`.
pub fn kappa1_correction(coef: TanhCoefficient, b: f64, mass_freq: f64, z1: C, z2: C) -> C {
    (z1 * z1 + z2 * z2) * coef.value(b) * (0.5 * b / mass_freq).tanh()
}

/// `|½ dκ(J e_k) − θ^A(e_k)|` maximized over basis vectors, for `κ(x, p) = kappa(z₁, z₂)`
/// on the flat plane; `J` is the engine's complex structure at `t = i`.
pub fn adaptedness_residual(
    geo: &ChartedGeometry,
    params: FlatParams,
    z: &PhasePoint,
    kappa: impl Fn(C, C) -> f64,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    if geo.dim() != 2 || !z.is_real(1e-12) {
        return Err(Error::InvalidInput("adaptedness check needs a real point of the plane".into()));
    }
    let frame = frame_at(geo, z, &ComplexTime::new(I), opts)?;
    let j = crate::structure::assemble_j(&frame)?.j;
    let xp = z.real_coords();
    let eval = |w: &[f64]| {
        let (z1, z2) = flat_complex_coordinates(params, &w[..2], &w[2..]);
        kappa(z1, z2)
    };
    let mut grad = [0.0; 4];
    for (k, g) in grad.iter_mut().enumerate() {
        let d: C = richardson(
            |d| {
                let mut w = xp.clone();
                w[k] += d;
                Ok(c(eval(&w)))
            },
            h,
        )?;
        *g = d.re;
    }
    let mut worst = 0.0_f64;
    for k in 0..4 {
        let jx: Vec<f64> = (0..4).map(|r| j[(r, k)]).collect();
        let dk: f64 = 0.5 * grad.iter().zip(&jx).map(|(a, b)| a * b).sum::<f64>();
        let mut e = vec![c(0.0); 4];
        e[k] = c(1.0);
        worst = worst.max((c(dk) - theta_a(geo, z, &e)).norm());
    }
    Ok(worst)
}

/// Outcome of testing both `κ₁` coefficients against `Im ∂̄κ₁ = θ^A`.
#[derive(Clone, Debug, Serialize)]
pub struct Kappa1Resolution {
    pub chosen: Option<TanhCoefficient>,
    pub residual_half_b: f64,
    pub residual_full_b: f64,
    pub tolerance: f64,
}

impl Kappa1Resolution {
    pub fn note(&self) -> String {
        match self.chosen {
            Some(TanhCoefficient::HalfB) => format!(
                "tanh coefficient resolved to B/2 (residual {:.2e}); coefficient B fails (residual {:.2e})",
                self.residual_half_b, self.residual_full_b
            ),
            Some(TanhCoefficient::FullB) => format!(
                "tanh coefficient resolved to B (residual {:.2e}); coefficient B/2 fails (residual {:.2e})",
                self.residual_full_b, self.residual_half_b
            ),
            None => format!(
                "neither tanh coefficient passes: B/2 residual {:.2e}, B residual {:.2e}",
                self.residual_half_b, self.residual_full_b
            ),
        }
    }
}

/// Evaluate both candidate coefficients on the sample points and keep the one that passes.
pub fn resolve_kappa1_coefficient(
    geo: &ChartedGeometry,
    params: FlatParams,
    samples: &[PhasePoint],
    tolerance: f64,
    opts: &FlowOptions,
) -> Result<Kappa1Resolution> {
    let mut worst = [0.0_f64; 2];
    for z in samples {
        for (slot, coef) in [TanhCoefficient::HalfB, TanhCoefficient::FullB].into_iter().enumerate() {
            let kappa = |z1, z2| kappa1_flat_with(coef, params.field, params.mass_freq, z1, z2);
            let r = adaptedness_residual(geo, params, z, kappa, DEFAULT_STEP, opts)?;
            worst[slot] = worst[slot].max(r);
        }
    }
    let chosen = match (worst[0] < tolerance, worst[1] < tolerance) {
        (true, false) => Some(TanhCoefficient::HalfB),
        (false, true) => Some(TanhCoefficient::FullB),
        (true, true) => Some(if worst[0] <= worst[1] { TanhCoefficient::HalfB } else { TanhCoefficient::FullB }),
        (false, false) => None,
    };
    let res = Kappa1Resolution { chosen, residual_half_b: worst[0], residual_full_b: worst[1], tolerance };
    log::info!("{}", res.note());
    Ok(res)
}

/// `κ₂ = Re(2i f_{−i}) = i(f_{−i} − f_{i})`.
pub fn kappa2(geo: &ChartedGeometry, z: &PhasePoint, opts: &FlowOptions) -> Result<f64> {
    Ok((I * potential_f(geo, z, &ComplexTime::new(-I), opts)? * 2.0).re)
}

/// `max |W − Ω^β|` where `W` is `i∂∂̄κ₂` written in `(x, p)` coordinates: the
/// Hessian of `κ₂` is taken by central differences in `(x, p)`, moved to the
/// real coordinates of `(z₁, z₂)` and contracted into a 2-form.
pub fn ddbar_residual(
    geo: &ChartedGeometry,
    params: FlatParams,
    z: &PhasePoint,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    let opts = opts.without_jacobian();
    let t = ComplexTime::new(-I);
    let (_, mesh) = potential_f_meshed(geo, z, &t, &opts, None)?;
    let k2 =
        |w: &PhasePoint| -> Result<f64> { Ok((I * potential_f_meshed(geo, w, &t, &opts, Some(&mesh))?.0 * 2.0).re) };
    let mut hxp = nalgebra::Matrix4::<f64>::zeros();
    for a in 0..4 {
        for b in a..4 {
            let at = |sa: f64, sb: f64| k2(&z.displaced(a, c(sa * h)).displaced(b, c(sb * h)));
            let v = (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h);
            hxp[(a, b)] = v;
            hxp[(b, a)] = v;
        }
    }
    // ζ = M (x, p) with ζ = (Re z₁, Im z₁, Re z₂, Im z₂)
    let mut m = nalgebra::Matrix4::<f64>::zeros();
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let (z1, z2) = flat_complex_coordinates(params, &e[..2], &e[2..]);
        let (o1, o2) = flat_complex_coordinates(params, &[0.0, 0.0], &[0.0, 0.0]);
        let (d1, d2) = (z1 - o1, z2 - o2);
        m.set_column(k, &nalgebra::Vector4::new(d1.re, d1.im, d2.re, d2.im));
    }
    let m_inv = m.try_inverse().ok_or_else(|| Error::IllConditioned("coordinate map is singular".into()))?;
    let hz = m_inv.transpose() * hxp * m_inv;
    // κ_{j k̄} = ¼[(∂_{x_j} − i∂_{y_j})(∂_{x_k} + i∂_{y_k})]κ
    let mut levi = nalgebra::Matrix2::<C>::zeros();
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            levi[(j, k)] = C::new(hz[(xj, xk)] + hz[(yj, yk)], hz[(xj, yk)] - hz[(yj, xk)]) * 0.25;
        }
    }
    // dz_j(X) for X = e_a
    let dz = |a: usize| [C::new(m[(0, a)], m[(1, a)]), C::new(m[(2, a)], m[(3, a)])];
    let omega = geo.beta(&z.x);
    let omega = crate::linalg::symplectic_matrix(&omega);
    let mut worst = 0.0_f64;
    for a in 0..4 {
        for b in 0..4 {
            let (xa, xb) = (dz(a), dz(b));
            let mut w = c(0.0);
            for j in 0..2 {
                for k in 0..2 {
                    w += levi[(j, k)] * (xa[j] * xb[k].conj() - xb[j] * xa[k].conj());
                }
            }
            worst = worst.max((I * w - omega[(a, b)]).norm());
        }
    }
    Ok(worst)
}

/// `f_ℂ(z) = f(π(Φ_i(z)))` for an analytic `f` on the chart.
pub fn holomorphic_extension(
    geo: &ChartedGeometry,
    f: &dyn Fn(&[C]) -> C,
    z: &PhasePoint,
    opts: &FlowOptions,
) -> Result<C> {
    extension_meshed(geo, f, z, opts, None).map(|(v, _)| v)
}

fn extension_meshed(
    geo: &ChartedGeometry,
    f: &dyn Fn(&[C]) -> C,
    z: &PhasePoint,
    opts: &FlowOptions,
    mesh: Option<&FlowMesh>,
) -> Result<(C, FlowMesh)> {
    let (s, m) = flow_complex_meshed(geo, z, &ComplexTime::new(I), &opts.without_jacobian(), mesh)?;
    if !geo.in_domain(&s.z.x) {
        return Err(Error::LeftTube { time: I, reason: "extension evaluated outside the analytic domain".into() });
    }
    Ok((f(&s.z.x), m))
}

/// `max_Z̄ |Z̄(f_ℂ)|` over the orthonormal `(0,1)` frame.
pub fn extension_dbar_residual(
    geo: &ChartedGeometry,
    f: &dyn Fn(&[C]) -> C,
    z: &PhasePoint,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    let grad = gradient(z, h, |w, m| extension_meshed(geo, f, w, opts, m))?;
    let frame = antiholomorphic_frame(geo, z, opts)?;
    Ok(max_column_residual(&frame, &grad, |_| c(0.0)))
}

/// `exp(−ik f_{−i}(z))`.
pub fn section_weight(geo: &ChartedGeometry, z: &PhasePoint, k: u32, opts: &FlowOptions) -> Result<C> {
    if k == 0 {
        return Err(Error::InvalidInput("section level k must be positive".into()));
    }
    let f = potential_f(geo, z, &ComplexTime::new(-I), opts)?;
    Ok((-I * f * k as f64).exp())
}

/// `e^{−kκ₂}` from the closed form, i.e. `|s|²` for the flat section of level `k`.
pub fn flat_weight_squared(params: FlatParams, x: &[f64], p: &[f64], k: u32) -> f64 {
    let (z1, z2) = flat_complex_coordinates(params, x, p);
    (-(k as f64) * crate::oracles::flat_kappa2(params, z1, z2)).exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialSample {
    pub base: Vec<f64>,
    pub f_minus_i: [f64; 2],
    pub f_plus_i: [f64; 2],
    pub kappa2: f64,
    pub kde_residual: f64,
    pub dbar_residual: f64,
    /// `|exp(−i f_{−i})|`.
    pub weight_modulus: f64,
}

/// All potential data at one real point; the KDE residual is taken at `kde_sigma`.
pub fn potential_sample(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    kde_sigma: f64,
    h: f64,
    opts: &FlowOptions,
) -> Result<PotentialSample> {
    let fm = potential_f(geo, z, &ComplexTime::new(-I), opts)?;
    let fp = potential_f(geo, z, &ComplexTime::new(I), opts)?;
    let frame = antiholomorphic_frame(geo, z, opts)?;
    Ok(PotentialSample {
        base: z.real_coords(),
        f_minus_i: [fm.re, fm.im],
        f_plus_i: [fp.re, fp.im],
        kappa2: (I * fm * 2.0).re,
        kde_residual: kde_residual(geo, z, kde_sigma, h, opts)?,
        dbar_residual: dbar_residual(geo, z, &frame, h, opts)?,
        weight_modulus: (-I * fm).exp().norm(),
    })
}

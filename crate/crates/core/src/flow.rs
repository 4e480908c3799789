//! The twisted Hamiltonian flow of `E = ½ g(p,p)` in real and complex time.
//!
//! A complex-time path is a polyline from `0`. On each segment
//! `s = s_a + λ(s_b − s_a)`, `λ ∈ [0, 1]`, and the state obeys
//! `dz/dλ = (s_b − s_a) X_E(z)`. Alongside the point the integrator carries the
//! tangent map `Φ_*` and the quadrature `q = ∫ A(ẋ) ds`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::linalg::{c, CMatrix, CVector, C};
use crate::ode::{self, OdeOptions};

/// Default radius `1 + ε` of the admissible time disk.
pub const DEFAULT_DISK_RADIUS: f64 = 1.25;

/// Blow-up threshold on momentum components.
const MOMENTUM_LIMIT: f64 = 1e8;

/// Waypoint factors `w` tried when a straight path `0 → t` is replaced by
/// `0 → w t → t`, alternating sides of the straight segment.
const DETOURS: [C; 4] = [C::new(0.5, 0.5), C::new(0.5, -0.5), C::new(0.5, 0.25), C::new(0.5, -0.25)];

/// Relative endpoint disagreement between detours on opposite sides that
/// signals a branch point rather than a pole between them.
const DETOUR_AGREEMENT: f64 = 1e-6;

/// A complex time `σ + iτ` reached along a polyline starting at `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTime {
    /// Vertices, starting at `0` and ending at the target.
    path: Vec<C>,
}

impl ComplexTime {
    /// Straight segment `0 → target`.
    pub fn new(target: C) -> Self {
        Self { path: vec![c(0.0), target] }
    }

    pub fn real(sigma: f64) -> Self {
        Self::new(c(sigma))
    }

    /// Polyline `0 → waypoints… → target`.
    pub fn via(waypoints: &[C], target: C) -> Self {
        let mut path = Vec::with_capacity(waypoints.len() + 2);
        path.push(c(0.0));
        path.extend_from_slice(waypoints);
        path.push(target);
        Self { path }
    }

    /// Vertices including the leading `0`; a leading `0` is added if missing.
    pub fn from_vertices(vertices: &[C]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("empty time path".into()));
        }
        let mut path = Vec::with_capacity(vertices.len() + 1);
        if vertices[0] != c(0.0) {
            path.push(c(0.0));
        }
        path.extend_from_slice(vertices);
        if path.len() == 1 {
            path.push(c(0.0));
        }
        Ok(Self { path })
    }

    pub fn target(&self) -> C {
        *self.path.last().expect("path is never empty")
    }

    pub fn vertices(&self) -> &[C] {
        &self.path
    }

    /// The path to `−target` obtained by negating every vertex.
    pub fn negated(&self) -> Self {
        Self { path: self.path.iter().map(|s| -s).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { path: self.path.iter().map(|s| s.conj()).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.path.iter().all(|s| s.im == 0.0)
    }

    pub fn max_modulus(&self) -> f64 {
        self.path.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// The disk is convex, so vertices inside imply the whole polyline is inside.
    pub fn check_disk(&self, radius: f64) -> Result<()> {
        let modulus = self.max_modulus();
        if modulus > radius {
            return Err(Error::OutsideDisk { radius, modulus });
        }
        Ok(())
    }
}

impl fmt::Display for ComplexTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.path[1..].iter().map(|s| format_complex(*s)).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for ComplexTime {
    type Err = Error;

    /// Comma-separated complex literals `a+bi`, the last being the target.
    fn from_str(s: &str) -> Result<Self> {
        let vertices = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
        Self::from_vertices(&vertices)
    }
}

pub fn format_complex(z: C) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parse `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (also with `j`, spaces ignored).
pub fn parse_complex(s: &str) -> Result<C> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || Error::InvalidInput(format!("cannot parse complex number `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(c).map_err(|_| bad());
    };
    // Split at the last sign that is not the leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |part: &str| -> Result<f64> {
        match part {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            p => p.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C::new(re, imag(&body[k..])?))
        }
        None => Ok(C::new(0.0, imag(body)?)),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    /// Radius of the admissible time disk for complex targets.
    pub disk_radius: f64,
    /// Transport the tangent map alongside the point.
    pub jacobian: bool,
    /// Complex flows abort when a base coordinate exceeds this multiple of
    /// `max(chart radius, |x(0)|)`; straight paths are then rerouted.
    pub excursion_factor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_steps: 200_000,
            min_step: 1e-14,
            disk_radius: DEFAULT_DISK_RADIUS,
            jacobian: true,
            excursion_factor: 100.0,
        }
    }
}

impl FlowOptions {
    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = false;
        self
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_steps: self.max_steps, min_step: self.min_step }
    }
}

/// Accepted step sizes of every path segment, reusable on nearby data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowMesh {
    pub segments: Vec<Vec<f64>>,
    /// Waypoint factor `w` when a straight path `0 → t` was run as `0 → w t → t`.
    pub detour: Option<C>,
}

impl FlowMesh {
    pub fn steps(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub z: PhasePoint,
    /// `(Φ_s)_*` in the `(x, p)` coordinates; `None` when not transported.
    pub jac: Option<CMatrix>,
    /// `∫ A(d(π∘Φ_s)/ds) ds` along the path.
    pub quad: C,
    pub time: C,
}

impl FlowState {
    pub fn jacobian(&self) -> Result<&CMatrix> {
        self.jac.as_ref().ok_or_else(|| Error::InvalidInput("flow was run without the tangent map".into()))
    }

    /// Column names matching [`FlowState::csv_row`].
    pub fn csv_header(n: usize) -> Vec<String> {
        let mut h = Vec::new();
        for name in ["x", "p"] {
            for j in 1..=n {
                h.push(format!("re_{name}{j}"));
                h.push(format!("im_{name}{j}"));
            }
        }
        h.push("re_q".into());
        h.push("im_q".into());
        for a in 1..=2 * n {
            for b in 1..=2 * n {
                h.push(format!("re_jac{a}_{b}"));
                h.push(format!("im_jac{a}_{b}"));
            }
        }
        h
    }

    /// Re/Im of `x`, `p`, `q`, then the row-major tangent map (empty if absent).
    pub fn csv_row(&self) -> Vec<f64> {
        let mut row = Vec::new();
        for v in self.z.x.iter().chain(&self.z.p).chain(std::iter::once(&self.quad)) {
            row.push(v.re);
            row.push(v.im);
        }
        if let Some(j) = &self.jac {
            for a in 0..j.nrows() {
                for b in 0..j.ncols() {
                    row.push(j[(a, b)].re);
                    row.push(j[(a, b)].im);
                }
            }
        }
        row
    }
}

/// `X_E = (g p, −½ ∂_l g(p,p) + β g p)`.
pub fn hamiltonian_field(geo: &ChartedGeometry, z: &PhasePoint) -> Result<Vec<C>> {
    if !geo.in_domain(&z.x) {
        return Err(Error::LeftTube { time: c(0.0), reason: "base point outside the analytic domain".into() });
    }
    let n = geo.dim();
    let p = CVector::from_column_slice(&z.p);
    let g = geo.inv_metric(&z.x);
    let dg = geo.inv_metric_deriv(&z.x);
    let gp = &g * &p;
    let bgp = geo.beta(&z.x) * &gp;
    let mut out = Vec::with_capacity(2 * n);
    out.extend(gp.iter().copied());
    for l in 0..n {
        out.push(bgp[l] - (p.transpose() * &dg[l] * &p)[(0, 0)] * 0.5);
    }
    Ok(out)
}

/// `DX_E` at `z`, the `2n × 2n` matrix of the variational equation.
pub fn field_jacobian(geo: &ChartedGeometry, z: &PhasePoint) -> CMatrix {
    let n = geo.dim();
    let x = &z.x;
    let p = CVector::from_column_slice(&z.p);
    let g = geo.inv_metric(x);
    let dg = geo.inv_metric_deriv(x);
    let d2g = geo.inv_metric_second_deriv(x);
    let beta = geo.beta(x);
    let dbeta = geo.beta_deriv(x);
    let gp = &g * &p;
    let dgp: Vec<CVector> = dg.iter().map(|d| d * &p).collect();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for mm in 0..n {
        // ∂ẋ/∂x_m = (∂_m g) p
        m.view_mut((0, mm), (n, 1)).copy_from(&dgp[mm]);
        // ∂ṗ/∂x_m
        let col = &dbeta[mm] * &gp + &beta * &dgp[mm];
        for l in 0..n {
            let curv = (p.transpose() * &d2g[l][mm] * &p)[(0, 0)];
            m[(n + l, mm)] = col[l] - curv * 0.5;
        }
    }
    m.view_mut((0, n), (n, n)).copy_from(&g);
    let bg = &beta * &g;
    for l in 0..n {
        for k in 0..n {
            m[(n + l, n + k)] = bg[(l, k)] - dgp[l][k];
        }
    }
    m
}

fn quad_rate(geo: &ChartedGeometry, z: &PhasePoint, xdot: &[C]) -> C {
    geo.potential(&z.x).iter().zip(xdot).map(|(a, v)| a * v).sum()
}

/// State layout: `x, p, q`, then the column-major tangent map when transported.
fn pack(z: &PhasePoint, q: C, jac: Option<&CMatrix>) -> Vec<C> {
    let mut y = z.to_vec();
    y.push(q);
    if let Some(j) = jac {
        y.extend(j.iter().copied());
    }
    y
}

fn unpack(y: &[C], n: usize, jacobian: bool, time: C) -> FlowState {
    let z = PhasePoint::from_slice(&y[..2 * n]);
    let quad = y[2 * n];
    let jac = jacobian.then(|| CMatrix::from_column_slice(2 * n, 2 * n, &y[2 * n + 1..]));
    FlowState { z, jac, quad, time }
}

fn rhs(geo: &ChartedGeometry, n: usize, jacobian: bool, ds: C, y: &[C]) -> Result<Vec<C>> {
    let z = PhasePoint::from_slice(&y[..2 * n]);
    if !geo.in_domain(&z.x) || z.p.iter().any(|v| !v.is_finite() || v.norm() > MOMENTUM_LIMIT) {
        return Err(Error::LeftTube { time: c(0.0), reason: "state left the analytic domain".into() });
    }
    let field = hamiltonian_field(geo, &z)?;
    let mut out: Vec<C> = field.iter().map(|v| v * ds).collect();
    out.push(quad_rate(geo, &z, &field[..n]) * ds);
    if jacobian {
        let jac = CMatrix::from_column_slice(2 * n, 2 * n, &y[2 * n + 1..]);
        let dj = field_jacobian(geo, &z) * jac;
        out.extend(dj.iter().map(|v| v * ds));
    }
    Ok(out)
}

enum Boundary {
    ChartBox,
    /// Stay in the analytic domain with every base coordinate below the bound.
    Domain(f64),
}

fn run(
    geo: &ChartedGeometry,
    z0: &PhasePoint,
    time: &ComplexTime,
    opts: &FlowOptions,
    mesh: Option<&FlowMesh>,
    boundary: Boundary,
) -> Result<(FlowState, FlowMesh)> {
    let n = geo.dim();
    if z0.dim() != n {
        return Err(Error::InvalidInput(format!("phase point has dimension {}, geometry {n}", z0.dim())));
    }
    if let Some(m) = mesh {
        if m.segments.len() != time.vertices().len() - 1 {
            return Err(Error::InvalidInput("mesh does not match the time path".into()));
        }
    }
    let jac0 = opts.jacobian.then(|| CMatrix::identity(2 * n, 2 * n));
    let mut y = pack(z0, c(0.0), jac0.as_ref());
    let mut recorded = FlowMesh::default();
    for (seg, w) in time.vertices().windows(2).enumerate() {
        let (sa, sb) = (w[0], w[1]);
        let ds = sb - sa;
        if ds == c(0.0) {
            recorded.segments.push(Vec::new());
            continue;
        }
        let at = |lambda: f64| sa + ds * lambda;
        let f = |_: f64, y: &[C]| rhs(geo, n, opts.jacobian, ds, y);
        let accept = |lambda: f64, y: &[C]| match boundary {
            Boundary::ChartBox => {
                let x: Vec<f64> = y[..n].iter().map(|v| v.re).collect();
                if geo.in_chart_box(&x) {
                    Ok(())
                } else {
                    Err(Error::ChartExit { time: at(lambda) })
                }
            }
            Boundary::Domain(bound) => {
                let peak = y[..n].iter().map(|v| v.norm()).fold(0.0, f64::max);
                if peak > bound {
                    Err(Error::LeftTube { time: at(lambda), reason: format!("coordinate excursion beyond {bound:e}") })
                } else {
                    Ok(())
                }
            }
        };
        let solved = match mesh {
            Some(m) => ode::replay(f, &y, &m.segments[seg], accept),
            None => ode::integrate(f, &y, &opts.ode(), accept),
        };
        let sol = solved.map_err(|e| match e {
            Error::LeftTube { reason, .. } => {
                Error::LeftTube { time: sa, reason: format!("{reason} (segment from {sa} to {sb})") }
            }
            Error::StepUnderflow { time: t, step } => {
                Error::LeftTube { time: at(t.re), reason: format!("step size underflow ({step:e})") }
            }
            other => other,
        })?;
        y = sol.y;
        recorded.segments.push(sol.steps);
    }
    Ok((unpack(&y, n, opts.jacobian, time.target()), recorded))
}

/// Flow a real point for real time `σ`; the trajectory must stay in the chart box.
pub fn flow_real(geo: &ChartedGeometry, z0: &PhasePoint, sigma: f64, opts: &FlowOptions) -> Result<FlowState> {
    if !z0.is_real(1e-12) {
        return Err(Error::InvalidInput("flow_real needs a real phase point".into()));
    }
    let x: Vec<f64> = z0.x.iter().map(|v| v.re).collect();
    if !geo.in_chart_box(&x) {
        return Err(Error::ChartExit { time: c(0.0) });
    }
    let mut state = run(geo, z0, &ComplexTime::real(sigma), opts, None, Boundary::ChartBox)?.0;
    // Real data evolve in real time; drop round-off imaginary parts.
    state.z = PhasePoint::new(state.z.x.iter().map(|v| c(v.re)).collect(), state.z.p.iter().map(|v| c(v.re)).collect());
    state.quad = c(state.quad.re);
    if let Some(j) = state.jac.as_mut() {
        j.apply(|v| *v = c(v.re));
    }
    Ok(state)
}

/// Continue the flow along a complex-time path inside the admissible disk.
///
/// `z0` may itself be complex (needed to transport frames back from `Φ_{−t}(z)`).
pub fn flow_complex(geo: &ChartedGeometry, z0: &PhasePoint, t: &ComplexTime, opts: &FlowOptions) -> Result<FlowState> {
    flow_complex_meshed(geo, z0, t, opts, None).map(|(s, _)| s)
}

/// As [`flow_complex`], optionally replaying a recorded mesh; returns the mesh used.
pub fn flow_complex_meshed(
    geo: &ChartedGeometry,
    z0: &PhasePoint,
    t: &ComplexTime,
    opts: &FlowOptions,
    mesh: Option<&FlowMesh>,
) -> Result<(FlowState, FlowMesh)> {
    t.check_disk(opts.disk_radius)?;
    if !geo.in_domain(&z0.x) {
        return Err(Error::LeftTube { time: c(0.0), reason: "initial point outside the analytic domain".into() });
    }
    let x0 = z0.x.iter().map(|v| v.norm()).fold(geo.chart_radius(), f64::max);
    let boundary = || Boundary::Domain(opts.excursion_factor * x0);
    let straight = t.vertices().len() == 2;
    if let Some(m) = mesh {
        let path = match m.detour {
            Some(w) if straight => ComplexTime::via(&[t.target() * w], t.target()),
            _ => t.clone(),
        };
        let (state, mut recorded) = run(geo, z0, &path, opts, Some(m), boundary())?;
        recorded.detour = m.detour.filter(|_| straight);
        return Ok((state, recorded));
    }
    match run(geo, z0, t, opts, None, boundary()) {
        Err(e @ (Error::LeftTube { .. } | Error::MaxSteps(_))) if straight && t.target() != c(0.0) => {
            reroute(geo, z0, t.target(), opts, boundary, e)
        }
        other => other,
    }
}

/// Run `0 → w t → t` for detours on both sides of the straight segment.
///
/// The flow is holomorphic in time away from isolated chart singularities, so
/// detours enclosing only poles agree; disagreement means a branch point.
fn reroute(
    geo: &ChartedGeometry,
    z0: &PhasePoint,
    target: C,
    opts: &FlowOptions,
    boundary: impl Fn() -> Boundary,
    original: Error,
) -> Result<(FlowState, FlowMesh)> {
    let mut found: Vec<(C, FlowState, FlowMesh)> = Vec::new();
    for w in DETOURS {
        if found.iter().any(|(v, ..)| v.im.signum() == w.im.signum()) {
            continue;
        }
        match run(geo, z0, &ComplexTime::via(&[target * w], target), opts, None, boundary()) {
            Ok((state, mesh)) => found.push((w, state, mesh)),
            Err(e) => log::debug!("detour via {w} failed: {e}"),
        }
        if found.len() == 2 {
            break;
        }
    }
    if found.len() == 1 {
        log::debug!("only one side of the path to {target} could be continued; detour not cross-checked");
    }
    if found.len() == 2 {
        let d = found[0].1.z.distance(&found[1].1.z);
        let scale = found[0].1.z.to_vec().iter().map(|v| v.norm()).fold(1.0, f64::max);
        if d > DETOUR_AGREEMENT * scale {
            return Err(Error::PathDependence(d));
        }
    }
    let Some((w, state, mut mesh)) = found.into_iter().next() else {
        return Err(original);
    };
    log::debug!("rerouted flow to {target} via {}", target * w);
    mesh.detour = Some(w);
    Ok((state, mesh))
}

/// Max discrepancy between the endpoints of two paths to the same target.
pub fn path_discrepancy(
    geo: &ChartedGeometry,
    z0: &PhasePoint,
    a: &ComplexTime,
    b: &ComplexTime,
    opts: &FlowOptions,
) -> Result<f64> {
    if (a.target() - b.target()).norm() > 0.0 {
        return Err(Error::InvalidInput("paths end at different times".into()));
    }
    let opts = opts.without_jacobian();
    let za = flow_complex(geo, z0, a, &opts)?;
    let zb = flow_complex(geo, z0, b, &opts)?;
    Ok(za.z.distance(&zb.z))
}

/// Guaranteed continuation radius `(1/C) log(A/dist)` for data within `dist`
/// of a point whose majorant constants are `C` and `A`.
pub fn radius_estimate(lipschitz: f64, ball: f64, dist: f64) -> Result<f64> {
    if !(lipschitz > 0.0) || !(ball > 0.0) || !(dist >= 0.0) {
        return Err(Error::InvalidInput(format!("need C > 0, A > 0, dist ≥ 0 (got {lipschitz}, {ball}, {dist})")));
    }
    if dist >= ball {
        log::warn!("distance {dist} is not inside the ball of radius {ball}; no guaranteed radius");
        return Ok(0.0);
    }
    if dist == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((ball / dist).ln() / lipschitz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_flat_magnetic, make_sphere_magnetic};
    use crate::linalg::{max_abs, I};
    use nalgebra::DMatrix;

    fn planar(b: f64, m: f64) -> ChartedGeometry {
        make_flat_magnetic(2, DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]), m).unwrap()
    }

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_complex("1+2i").unwrap(), C::new(1.0, 2.0));
        assert_eq!(parse_complex("0.3-0.8i").unwrap(), C::new(0.3, -0.8));
        assert_eq!(parse_complex("i").unwrap(), I);
        assert_eq!(parse_complex("-i").unwrap(), -I);
        assert_eq!(parse_complex("-2.5").unwrap(), c(-2.5));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), C::new(1e-3, 20.0));
        assert!(parse_complex("abc").is_err());
        let t: ComplexTime = "0.8, i".parse().unwrap();
        assert_eq!(t.vertices(), &[c(0.0), c(0.8), I]);
        assert_eq!(t.to_string().parse::<ComplexTime>().unwrap(), t);
    }

    #[test]
    fn field_matches_planar_example() {
        let geo = planar(1.0, 1.0);
        let f = hamiltonian_field(&geo, &PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0])).unwrap();
        assert_eq!(f, vec![c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let zero = hamiltonian_field(&geo, &PhasePoint::real(&[0.3, 0.2], &[0.0, 0.0])).unwrap();
        assert!(zero.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn quarter_larmor_turn() {
        let geo = planar(1.0, 1.0);
        let s = flow_real(
            &geo,
            &PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]),
            std::f64::consts::FRAC_PI_2,
            &FlowOptions::default(),
        )
        .unwrap();
        let expected = PhasePoint::real(&[1.0, -1.0], &[0.0, -1.0]);
        assert!(s.z.distance(&expected) < 1e-10);
    }

    #[test]
    fn zero_time_is_identity() {
        let geo = make_sphere_magnetic(1.0, 0.7).unwrap();
        let z = PhasePoint::real(&[0.2, -0.4], &[0.5, 0.1]);
        let s = flow_real(&geo, &z, 0.0, &FlowOptions::default()).unwrap();
        assert_eq!(s.z, z);
        assert_eq!(s.quad, c(0.0));
        assert_eq!(s.jac.unwrap(), CMatrix::identity(4, 4));
    }

    #[test]
    fn imaginary_time_base_point() {
        let geo = planar(1.0, 1.0);
        let s = flow_complex(
            &geo,
            &PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]),
            &ComplexTime::new(I),
            &FlowOptions::default(),
        )
        .unwrap();
        assert!((s.z.x[0] - I * 1f64.sinh()).norm() < 1e-10);
        assert!((s.z.x[1] - c(1f64.cosh() - 1.0)).norm() < 1e-10);
    }

    #[test]
    fn field_jacobian_matches_differences() {
        let geo = make_sphere_magnetic(1.2, 0.9).unwrap();
        let z = PhasePoint::new(vec![C::new(0.3, 0.1), C::new(-0.5, 0.05)], vec![C::new(0.7, -0.2), C::new(0.4, 0.3)]);
        let m = field_jacobian(&geo, &z);
        let h = 1e-6;
        for k in 0..4 {
            let fp = hamiltonian_field(&geo, &z.displaced(k, c(h))).unwrap();
            let fm = hamiltonian_field(&geo, &z.displaced(k, c(-h))).unwrap();
            for r in 0..4 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - m[(r, k)]).norm() < 1e-7, "entry ({r},{k}): {fd} vs {}", m[(r, k)]);
            }
        }
    }

    #[test]
    fn chart_exit_is_detected() {
        let geo = make_sphere_magnetic(1.0, 0.0).unwrap();
        // Heading toward the projection pole at u = ∞.
        let err =
            flow_real(&geo, &PhasePoint::real(&[1.0, 0.0], &[3.0, 0.0]), 3.0, &FlowOptions::default()).unwrap_err();
        assert_eq!(err.reason_code(), "CHART_EXIT");
    }

    #[test]
    fn outside_disk_is_rejected() {
        let geo = planar(1.0, 1.0);
        let err = flow_complex(
            &geo,
            &PhasePoint::real(&[0.0, 0.0], &[1.0, 0.0]),
            &ComplexTime::new(C::new(1.0, 1.0)),
            &FlowOptions::default(),
        );
        assert!(matches!(err, Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn mesh_replay_matches_and_is_smooth() {
        let geo = make_sphere_magnetic(1.0, 0.5).unwrap();
        let z = PhasePoint::real(&[0.2, 0.1], &[0.6, -0.3]);
        let t = ComplexTime::new(I);
        let opts = FlowOptions::default();
        let (a, mesh) = flow_complex_meshed(&geo, &z, &t, &opts, None).unwrap();
        let (b, _) = flow_complex_meshed(&geo, &z, &t, &opts, Some(&mesh)).unwrap();
        assert_eq!(a.z, b.z);
        assert!(max_abs(&(a.jac.unwrap() - b.jac.unwrap())) == 0.0);
    }

    #[test]
    fn radius_estimate_cases() {
        assert!((radius_estimate(1.0, 1.0, (-1.2f64).exp()).unwrap() - 1.2).abs() < 1e-14);
        assert_eq!(radius_estimate(2.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(radius_estimate(1.0, 1.0, 0.0).unwrap(), f64::INFINITY);
        assert!(radius_estimate(1.0, 1.0, 1e-300).unwrap() > 600.0);
        assert!(radius_estimate(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn straight_path_past_a_chart_pole_is_rerouted() {
        use crate::oracles::{chart_to_embedding, embedding_to_chart, sphere_flow_oracle};
        let (r, b) = (1.3, 0.7);
        let geo = make_sphere_magnetic(r, b).unwrap();
        // The straight path 0 → i passes within 4e-4 of a pole of the chart solution.
        let z =
            PhasePoint::real(&[-0.6021045099395241, 1.3913212980135077], &[-1.1590482723867441, -0.5012647781438268]);
        let opts = FlowOptions::default().without_jacobian();
        let (s, mesh) = flow_complex_meshed(&geo, &z, &ComplexTime::new(I), &opts, None).unwrap();
        assert!(mesh.detour.is_some());
        let exact = embedding_to_chart(&sphere_flow_oracle(&chart_to_embedding(&z, r, b), I)).unwrap();
        assert!(s.z.distance(&exact) < 1e-9, "{}", s.z.distance(&exact));
        let (replayed, again) = flow_complex_meshed(&geo, &z, &ComplexTime::new(I), &opts, Some(&mesh)).unwrap();
        assert_eq!(again, mesh);
        assert_eq!(replayed.z, s.z);
    }
}

//! Lagrangian frames `P_z(σ+iτ) = (Φ_t)_* V`, the almost complex structure
//! they determine, and the Kähler/integrability checks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{flow_complex_meshed, ComplexTime, FlowMesh, FlowOptions};
use crate::geometry::{ChartedGeometry, PhasePoint};
use crate::linalg::{
    c, conj, hermitian_eigenvalues, hstack, max_abs, max_imag, orthonormalize_columns, real_part, residual_from_span,
    smallest_singular_value, symplectic_matrix, CMatrix, CVector, C, I,
};

/// Below this smallest singular value of `[F, F̄]` the frame is treated as real.
pub const DEFAULT_TRANSVERSALITY_TOL: f64 = 1e-6;

/// Default finite-difference step for bracket computations.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-4;

/// A basis of `P_z(t)` at a real point `z`.
#[derive(Clone, Debug)]
pub struct LagrangianFrame {
    pub base: PhasePoint,
    pub time: C,
    /// `(Φ_t)_*[0; 1]` at `Φ_{−t}(z)`, unnormalized.
    pub raw: CMatrix,
    /// Orthonormal basis of the same span.
    pub columns: CMatrix,
    /// Matrix of `ω^β` at the base point.
    pub omega: CMatrix,
}

/// Step meshes of the two legs `z → Φ_{−t}(z)` and back.
#[derive(Clone, Debug, Default)]
pub struct FrameMesh {
    pub backward: FlowMesh,
    pub forward: FlowMesh,
}

impl LagrangianFrame {
    pub fn dim(&self) -> usize {
        self.raw.ncols()
    }

    /// `Fᵀ Ω F`, zero for a Lagrangian frame.
    pub fn lagrangian_residual(&self) -> f64 {
        max_abs(&(self.columns.transpose() * &self.omega * &self.columns))
    }

    /// Right-multiply by an invertible matrix; the span is unchanged.
    pub fn regauged(&self, m: &CMatrix) -> Result<Self> {
        let raw = &self.raw * m;
        Ok(Self { columns: orthonormalize_columns(&raw)?, raw, ..self.clone() })
    }
}

/// `P_z(t)`: flow `z` to `w = Φ_{−t}(z)` along the negated path, then push the
/// vertical frame at `w` forward along the path.
pub fn frame_at(geo: &ChartedGeometry, z: &PhasePoint, t: &ComplexTime, opts: &FlowOptions) -> Result<LagrangianFrame> {
    frame_at_meshed(geo, z, t, opts, None).map(|(f, _)| f)
}

/// As [`frame_at`], optionally replaying recorded meshes.
pub fn frame_at_meshed(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    opts: &FlowOptions,
    mesh: Option<&FrameMesh>,
) -> Result<(LagrangianFrame, FrameMesh)> {
    let n = geo.dim();
    let back_opts = opts.without_jacobian();
    let fwd_opts = FlowOptions { jacobian: true, ..*opts };
    let (back, backward) = flow_complex_meshed(geo, z, &t.negated(), &back_opts, mesh.map(|m| &m.backward))?;
    let (fwd, forward) = flow_complex_meshed(geo, &back.z, t, &fwd_opts, mesh.map(|m| &m.forward))?;
    let raw = fwd.jacobian()?.columns(n, n).into_owned();
    let columns = orthonormalize_columns(&raw)?;
    let omega = symplectic_matrix(&geo.beta(&z.x));
    Ok((LagrangianFrame { base: z.clone(), time: t.target(), raw, columns, omega }, FrameMesh { backward, forward }))
}

/// Smallest singular value of `[F, F̄]` for the orthonormal frame; zero iff `P ∩ P̄ ≠ 0`.
pub fn transversality_check(frame: &LagrangianFrame) -> f64 {
    smallest_singular_value(&hstack(&frame.columns, &conj(&frame.columns)))
}

/// `H = −i Fᵀ Ω F̄`, Hermitian; `−iω(Z, Z̄) = vᵀ H v̄` for `Z = F v`.
pub fn positivity_matrix(columns: &CMatrix, omega: &CMatrix) -> CMatrix {
    columns.transpose() * omega * conj(columns) * (-I)
}

/// Smallest singular value of the vertical block of the orthonormal frame.
/// Positive iff no nonzero vector of `P` is tangent to the zero-section directions.
pub fn vertical_margin(frame: &LagrangianFrame) -> f64 {
    let n = frame.dim();
    smallest_singular_value(&frame.columns.rows(n, n).into_owned())
}

#[derive(Clone, Debug, Serialize)]
pub struct AcsPointData {
    pub base: Vec<f64>,
    pub time: [f64; 2],
    /// Real `2n × 2n` matrix with `J = +i` on `P` and `−i` on `P̄`.
    #[serde(serialize_with = "serialize_matrix")]
    pub j: DMatrix<f64>,
    /// Eigenvalues of the positivity form on the orthonormal frame, ascending.
    pub positivity_spectrum: Vec<f64>,
    pub transversality: f64,
    /// Largest imaginary part discarded from `S diag(i, −i) S⁻¹`.
    pub imag_residual: f64,
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl AcsPointData {
    pub fn min_positivity(&self) -> f64 {
        self.positivity_spectrum.first().copied().unwrap_or(f64::NAN)
    }

    /// `max |J² + 1|`.
    pub fn square_residual(&self) -> f64 {
        let n = self.j.nrows();
        (&self.j * &self.j + DMatrix::identity(n, n)).amax()
    }

    /// `max |JᵀΩJ − Ω|` for the real form `Ω`.
    pub fn compatibility_residual(&self, omega: &DMatrix<f64>) -> f64 {
        (self.j.transpose() * omega * &self.j - omega).amax()
    }

    /// `min_X ω(X, JX)/|X|²` over real `X`, the smallest eigenvalue of the
    /// symmetric part of `ΩJ`.
    pub fn metric_min_eigenvalue(&self, omega: &DMatrix<f64>) -> f64 {
        let g = omega * &self.j;
        let sym = (&g + g.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `J = Re(S diag(i, −i) S⁻¹)` with `S = [F, F̄]`; fails below the default transversality threshold.
pub fn assemble_j(frame: &LagrangianFrame) -> Result<AcsPointData> {
    assemble_j_with(frame, DEFAULT_TRANSVERSALITY_TOL)
}

pub fn assemble_j_with(frame: &LagrangianFrame, transversality_tol: f64) -> Result<AcsPointData> {
    let n = frame.dim();
    let transversality = transversality_check(frame);
    if !(transversality > transversality_tol) {
        return Err(Error::IllConditioned(format!(
            "P and its conjugate are not transverse (smallest singular value {transversality:e})"
        )));
    }
    let s = hstack(&frame.columns, &conj(&frame.columns));
    let s_inv =
        s.clone().try_inverse().ok_or_else(|| Error::IllConditioned("frame matrix [F, F̄] is singular".into()))?;
    let mut d = CMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        d[(k, k)] = I;
        d[(n + k, n + k)] = -I;
    }
    let jc = &s * d * s_inv;
    let h = positivity_matrix(&frame.columns, &frame.omega);
    Ok(AcsPointData {
        base: frame.base.real_coords(),
        time: [frame.time.re, frame.time.im],
        j: real_part(&jc),
        positivity_spectrum: hermitian_eigenvalues(&h),
        transversality,
        imag_residual: max_imag(&jc),
    })
}

/// Frames at many `(z, t)`; each entry fails independently.
pub fn acs_batch(
    geo: &ChartedGeometry,
    points: &[(PhasePoint, ComplexTime)],
    opts: &FlowOptions,
) -> Vec<Result<AcsPointData>> {
    points.iter().map(|(z, t)| frame_at(geo, z, t, opts).and_then(|f| assemble_j(&f))).collect()
}

/// Max norm of `[F_a, F_b](z)` off `span F(z)`, from central differences of
/// the transported frame on a stencil of real points with step `h`.
///
/// The stencil replays the centre's step meshes, so the frame field is a
/// smooth function of the point.
pub fn integrability_residual(
    geo: &ChartedGeometry,
    z: &PhasePoint,
    t: &ComplexTime,
    h: f64,
    opts: &FlowOptions,
) -> Result<f64> {
    if !z.is_real(1e-12) {
        return Err(Error::InvalidInput("integrability stencil needs a real base point".into()));
    }
    let n = geo.dim();
    let (centre, mesh) = frame_at_meshed(geo, z, t, opts, None)?;
    let f0 = &centre.raw;
    // dF[k] = ∂F/∂z_k (2n × n)
    let mut df = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let plus = frame_at_meshed(geo, &z.displaced(k, c(h)), t, opts, Some(&mesh))?.0.raw;
        let minus = frame_at_meshed(geo, &z.displaced(k, c(-h)), t, opts, Some(&mesh))?.0.raw;
        df.push((plus - minus) * c(0.5 / h));
    }
    // (DY·X) = Σ_k X^k ∂_k Y
    let directional = |col_y: usize, x: &CVector| -> CVector {
        let mut out = CVector::zeros(2 * n);
        for (k, d) in df.iter().enumerate() {
            out += d.column(col_y) * x[k];
        }
        out
    };
    let scale = max_abs(f0).max(1.0);
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let fa = f0.column(a).into_owned();
            let fb = f0.column(b).into_owned();
            let bracket = directional(b, &fa) - directional(a, &fb);
            worst = worst.max(residual_from_span(&centre.columns, &bracket) / scale);
        }
    }
    Ok(worst)
}

//! Magnetic adapted complex structures on tubes in cotangent bundles.
//!
//! The central object is the twisted Hamiltonian flow of the kinetic energy
//! `E = ½ g(p,p)` with respect to `ω^β = ω − π*β`, continued analytically to
//! complex time. Pushing the vertical polarization forward by the time-`i`
//! flow yields the `(1,0)` distribution of a complex structure; the modules
//! below build that structure numerically and check its properties against
//! closed forms on `ℝ²` (constant field) and `S²` (invariant field).
//!
//! - [`geometry`]: chart data `(g, β, A)` with complex-analytic evaluators.
//! - [`flow`]: real and complex-time integration with variational equations.
//! - [`structure`]: Lagrangian frames, the almost complex structure, and
//!   integrability/positivity checks.
//! - [`kahler`]: the functions `f_σ`, Kähler potentials, holomorphic sections
//!   and holomorphic extensions.
//! - [`intertwine`]: the fiber-inversion intertwiner between `β` and `−β`.
//! - [`oracles`]: closed-form references.
//! - [`verify`]: named verification suites producing JSON-serializable reports.

// `!(a > b)` guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diff;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod intertwine;
pub mod kahler;
pub mod linalg;
pub mod ode;
pub mod oracles;
pub mod phi;
pub mod sampling;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use flow::{flow_complex, flow_real, ComplexTime, FlowOptions, FlowState};
pub use geometry::{ChartData, ChartedGeometry, PhasePoint};
pub use linalg::{CMatrix, CVector, C};
pub use structure::{assemble_j, frame_at, AcsPointData, LagrangianFrame};

//! Geodesic completeness analysis for left-invariant Lorentzian metrics on
//! SL2(R) and SL2(C).
//!
//! A left-invariant metric is encoded by the K-symmetric operator `A` with
//! `g(x, y) = K(x, A y)`, where `K` is the Killing form. Geodesics reduce to
//! the Euler field `F(x) = [x, A^{-1} x]` on the Lie algebra, and the crate
//! offers:
//!
//! * [`lie`]: brackets, Killing form, exponential and adjoint action,
//! * [`metric`]: the forms `g` and `g*`, causal characters, the connection,
//! * [`dynamics`]: integration of the Euler field with blow-up detection,
//!   first integrals, idempotents, spiral (GCS) detection and geodesic
//!   reconstruction,
//! * [`cones`]: the null cone of `g*`, the nilpotent cone and their intersection,
//! * [`killing`]: left-invariant Killing fields, the spacelike normal form and
//!   the completeness verdict,
//! * [`scenario`] and [`reproduce`]: batch front-end and the reference checks.

pub mod cones;
pub mod dynamics;
pub mod error;
pub mod killing;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod presets;
pub mod reproduce;
pub mod rng;
pub mod scenario;
mod serde_util;

pub use error::{Error, Result};
pub use lie::{AlgebraKind, AlgebraSpec, AlgebraVec, GroupElement};
pub use metric::{build_metric, MetricOp};

//! Gradient projection with a vanishing Tikhonov term.
//!
//! The iteration
//!
//! ```text
//! x_{n+1} = P_Q(x_n - g_n * grad f(x_n) - g_n * a_n * grad phi(x_n))
//! ```
//!
//! minimizes a smooth convex `f` over a closed convex set `Q`. When the
//! regularizer `phi` is strongly convex and `sum g_n a_n` diverges, the
//! iterates select the minimizer of `phi` over the solution set of `f`; when
//! the sum converges they behave like plain gradient projection and the limit
//! depends on the starting point.
//!
//! Modules:
//! - [`geometry`]: points, convex sets, exact projections.
//! - [`objectives`]: smooth convex objectives and regularizers.
//! - [`schedules`]: step/regularization sequences and their hypothesis checks.
//! - [`solver`]: the instrumented iteration and trace audits.
//! - [`analysis`]: exact oracles for the solution set and selected point,
//!   the regularization path, and numerical checks of the supporting lemmas.
//! - [`cli`]: config-driven experiment harness.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
mod linalg;
pub mod objectives;
pub mod schedules;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{ConvexSet, SetKind, Vector};
pub use linalg::Matrix;
pub use objectives::{ObjectiveKind, Regularizer, SmoothObjective};
pub use schedules::{ConditionReport, Schedule, Verdict};

//! Points and the closed convex sets the iteration projects onto.
//!
//! Every set kind has an exact projection: clamping for boxes, radial scaling
//! for balls, a sort-and-threshold pass for the simplex and a single
//! orthogonal correction for halfspaces and hyperplanes. The projection of `x`
//! is the unique `y` in the set with `<y - x, y - v> <= 0` for every member
//! `v`; the property tests check exactly that inequality.

mod set;
mod vector;

pub use set::{ConvexSet, SetKind};
pub use vector::Vector;

/// Membership tolerance used by solver feasibility checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Slack allowed in the variational inequality, scaled by `1 + |x|^2`.
pub const VARIATIONAL_TOL: f64 = 1e-9;

/// `<y - x, y - v>` for a claimed projection `y` of `x` and a member `v`.
pub fn variational_gap(x: &Vector, y: &Vector, v: &Vector) -> f64 {
    y.sub(x).dot(&y.sub(v))
}

//! Numerical checks of the per-iteration inequalities behind the convergence
//! argument, evaluated on recorded traces.

use crate::error::{Error, Result};
use crate::geometry::Vector;

use super::trace::RunTrace;
use super::ProblemInstance;

/// Slack in the Fejér-type inequality, scaled by `1 + |x_n|^2`.
pub const FEJER_TOL: f64 = 1e-8;

/// Slack in the monotonicity of `Phi_n(x_n)`, scaled by `1 + |Phi_n(x_n)|`.
pub const PHI_MONOTONE_TOL: f64 = 1e-9;

/// A minimizer `x_ref` of `f` over `Q` and the constants the inequality needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FejerReference {
    pub x: Vector,
    /// `phi(x_ref) - inf_Q phi`; zero when no regularizer is in play.
    pub phi_excess: f64,
    pub f_star: f64,
}

impl FejerReference {
    pub fn for_problem(p: &ProblemInstance, x: Vector, f_star: f64) -> Result<Self> {
        let phi_excess = match (p.regularizer(), p.phi_star()) {
            (Some(phi), Some(star)) => phi.value(&x)? - star,
            _ => 0.0,
        };
        Ok(FejerReference { x, phi_excess, f_star })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FejerViolation {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks, for each logged `n` with a logged successor,
///
/// ```text
/// |x_{n+1} - x~|^2 + 2 g_n (Phi_{n+1}(x_{n+1}) - f*) <= |x_n - x~|^2 + delta_n
/// delta_n = 2 g_n a_n (phi(x~) - phi*) + g_n L_n |x_{n+1} - x_n|^2
/// ```
///
/// and returns the indices where it fails by more than
/// `FEJER_TOL * (1 + |x_n|^2)`. The trace must be densely logged.
pub fn fejer_audit(trace: &RunTrace, reference: &FejerReference) -> Result<Vec<FejerViolation>> {
    if !trace.is_dense() {
        return Err(Error::invalid(
            "trace",
            "Fejér audit needs every iteration logged (log_every = 1)",
        ));
    }
    let first = trace
        .records
        .first()
        .ok_or_else(|| Error::MissingReference("empty trace".into()))?;
    Error::check_dim(first.x.dim(), reference.x.dim())?;
    let x_ref = &reference.x;
    let mut violations = Vec::new();
    for pair in trace.records.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let g = cur.gamma;
        let lhs = next.x.sub(x_ref).norm_sq() + 2.0 * g * (next.phi_n - reference.f_star);
        let delta = 2.0 * g * cur.alpha * reference.phi_excess
            + g * cur.lipschitz_n * cur.step_norm * cur.step_norm;
        let rhs = cur.x.sub(x_ref).norm_sq() + delta;
        if lhs > rhs + FEJER_TOL * (1.0 + cur.x.norm_sq()) {
            violations.push(FejerViolation { n: cur.n, lhs, rhs });
        }
    }
    Ok(violations)
}

/// Logged indices `n >= n0` after which `Phi` increased:
/// `Phi_{next}(x_next) > Phi_n(x_n) + PHI_MONOTONE_TOL * (1 + |Phi_n(x_n)|)`.
pub fn phi_monotonicity_violations(trace: &RunTrace) -> Vec<u64> {
    let Some(n0) = trace.n0 else {
        return Vec::new();
    };
    trace
        .records
        .windows(2)
        .filter(|w| w[0].n >= n0)
        .filter(|w| w[1].phi_n > w[0].phi_n + PHI_MONOTONE_TOL * (1.0 + w[0].phi_n.abs()))
        .map(|w| w[0].n)
        .collect()
}

/// Share of `sum |x_{n+1} - x_n|^2` contributed by iterations `n >= from`.
pub fn step_tail_share(trace: &RunTrace, from: u64) -> Result<f64> {
    if !trace.is_dense() {
        return Err(Error::invalid("trace", "step sums need every iteration logged"));
    }
    let (mut total, mut tail) = (0.0, 0.0);
    for r in &trace.records {
        let s = r.step_norm * r.step_norm;
        total += s;
        if r.n >= from {
            tail += s;
        }
    }
    Ok(if total > 0.0 { tail / total } else { 0.0 })
}

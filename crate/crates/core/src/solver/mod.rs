//! The gradient projection iteration, with and without the Tikhonov term.
//!
//! A run is inherently sequential. Instances are immutable, so independent
//! runs (different starts, different schedules) can proceed on separate
//! threads and only share the instance by reference.

mod audit;
mod trace;

use std::time::{Duration, Instant};

pub use audit::{
    fejer_audit, phi_monotonicity_violations, step_tail_share, FejerReference, FejerViolation,
    FEJER_TOL, PHI_MONOTONE_TOL,
};
pub use trace::{FinalState, RunStatus, RunTrace, TraceRecord, CSV_HEADER};

use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, Vector};
use crate::objectives::{Regularizer, SmoothObjective};
use crate::schedules::{nu_at, Schedule, Step};

/// Consecutive small-step checks required before an early stop.
const EARLY_STOP_STREAK: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Plain gradient projection; the schedule's `alpha_n` is ignored.
    Gp,
    /// Gradient projection with the Tikhonov term `gamma_n alpha_n grad phi`.
    Ggp,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    objective: SmoothObjective,
    set: ConvexSet,
    regularizer: Option<Regularizer>,
    schedule: Schedule,
    x0: Vector,
    phi_star: Option<f64>,
}

impl ProblemInstance {
    /// Builds an instance. A start outside the set is projected onto it.
    pub fn new(
        objective: SmoothObjective,
        set: ConvexSet,
        regularizer: Option<Regularizer>,
        schedule: Schedule,
        x0: Vector,
    ) -> Result<Self> {
        Error::check_dim(set.dim(), objective.dim())?;
        Error::check_dim(set.dim(), x0.dim())?;
        let phi_star = match &regularizer {
            Some(phi) => Some(phi.infimum_over(&set)?),
            None => None,
        };
        let x0 = set.project(&x0)?;
        Ok(ProblemInstance {
            objective,
            set,
            regularizer,
            schedule,
            x0,
            phi_star,
        })
    }

    /// Same problem from a different start.
    pub fn with_start(&self, x0: Vector) -> Result<Self> {
        Error::check_dim(self.set.dim(), x0.dim())?;
        let mut p = self.clone();
        p.x0 = self.set.project(&x0)?;
        Ok(p)
    }

    pub fn with_schedule(&self, schedule: Schedule) -> Self {
        let mut p = self.clone();
        p.schedule = schedule;
        p
    }

    pub fn objective(&self) -> &SmoothObjective {
        &self.objective
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn regularizer(&self) -> Option<&Regularizer> {
        self.regularizer.as_ref()
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    /// `inf_Q phi`, when a regularizer is attached.
    pub fn phi_star(&self) -> Option<f64> {
        self.phi_star
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    fn lipschitz_phi(&self) -> f64 {
        self.regularizer.as_ref().map_or(0.0, Regularizer::lipschitz)
    }
}

/// When to stop. The default only caps the iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub max_iterations: u64,
    /// Stop once `|x_{n+1} - x_n| / gamma_n < step_tolerance` on ten consecutive
    /// logged iterations. Zero disables the check; it is also suspended while
    /// `alpha_n > step_tolerance`.
    pub step_tolerance: f64,
    pub wall_clock_limit: Option<Duration>,
}

impl StopRule {
    pub fn iterations(max_iterations: u64) -> Self {
        StopRule {
            max_iterations,
            step_tolerance: 0.0,
            wall_clock_limit: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("stop.max_iterations", "must be at least 1"));
        }
        if !(self.step_tolerance >= 0.0) {
            return Err(Error::invalid("stop.step_tolerance", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogSchedule {
    /// Log `n = 1` and every multiple of the given period.
    Every(u64),
    /// Every iteration below 1000, then every `ceil(n / 1000)`-th.
    Geometric,
}

impl Default for LogSchedule {
    fn default() -> Self {
        LogSchedule::Geometric
    }
}

impl LogSchedule {
    fn should_log(self, n: u64) -> bool {
        match self {
            LogSchedule::Every(k) => n == 1 || n % k.max(1) == 0,
            LogSchedule::Geometric => n < 1000 || n % n.div_ceil(1000) == 0,
        }
    }
}

/// Known optimal value and reference point, supplied by an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub f_star: f64,
    pub point: Vector,
}

/// One update of plain gradient projection: `P_Q(x - gamma_n grad f(x))`.
pub fn gp_step(p: &ProblemInstance, x: &Vector, n: u64) -> Result<Vector> {
    Error::check_dim(p.dim(), x.dim())?;
    let step = p.schedule.step_at(n)?;
    let grad = p.objective.gradient_unchecked(x);
    update(p, x, step.gamma, grad)
}

/// One update of the regularized iteration:
/// `P_Q(x - gamma_n grad f(x) - gamma_n alpha_n grad phi(x))`.
pub fn ggp_step(p: &ProblemInstance, x: &Vector, n: u64) -> Result<Vector> {
    Error::check_dim(p.dim(), x.dim())?;
    let phi = p
        .regularizer
        .as_ref()
        .ok_or_else(|| Error::invalid("regularizer", "required for the regularized iteration"))?;
    let step = p.schedule.step_at(n)?;
    let mut grad = p.objective.gradient_unchecked(x);
    grad.axpy_in_place(step.alpha, &phi.objective().gradient_unchecked(x));
    update(p, x, step.gamma, grad)
}

fn update(p: &ProblemInstance, x: &Vector, gamma: f64, grad: Vector) -> Result<Vector> {
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    let next = p.set.project_unchecked(&x.axpy(-gamma, &grad));
    if !next.is_finite() {
        return Err(Error::NonFinite("iterate".into()));
    }
    Ok(next)
}

/// Runs the iteration from `p.x0()`, labelled `x_1`, for at most
/// `stop.max_iterations` updates.
///
/// Precondition failures (missing regularizer in GGP mode, a tabulated
/// schedule shorter than the iteration cap) are errors. A non-finite value
/// during the run is not: the trace comes back with
/// [`RunStatus::Aborted`] and the last finite iterate.
pub fn run(
    p: &ProblemInstance,
    mode: Mode,
    stop: &StopRule,
    logging: LogSchedule,
    target: Option<&Target>,
) -> Result<RunTrace> {
    stop.validate()?;
    if let LogSchedule::Every(0) = logging {
        return Err(Error::invalid("log_every", "must be at least 1"));
    }
    if mode == Mode::Ggp && p.regularizer.is_none() {
        return Err(Error::invalid("regularizer", "required for the regularized iteration"));
    }
    if let Some(len) = p.schedule.len() {
        if len < stop.max_iterations {
            return Err(Error::invalid(
                "schedule",
                format!("tabulated schedule has {len} terms but {} iterations requested", stop.max_iterations),
            ));
        }
    }
    if let Some(t) = target {
        Error::check_dim(p.dim(), t.point.dim())?;
    }

    let started = Instant::now();
    let l_f = p.objective.lipschitz();
    let l_phi = p.lipschitz_phi();
    let phi = match mode {
        Mode::Ggp => p.regularizer.as_ref(),
        Mode::Gp => None,
    };
    let phi_star = p.phi_star.unwrap_or(0.0);

    let mut x = p.x0.clone();
    let mut records = Vec::new();
    let mut n0 = None;
    let mut streak = 0u32;
    let mut status = RunStatus::MaxIterations;
    let mut n = 1u64;

    while n <= stop.max_iterations {
        let Step { gamma, alpha } = p.schedule.step_at(n)?;
        let alpha = if phi.is_some() { alpha } else { 0.0 };
        let mut grad = p.objective.gradient_unchecked(&x);
        if let Some(phi) = phi {
            grad.axpy_in_place(alpha, &phi.objective().gradient_unchecked(&x));
        }
        let next = match update(p, &x, gamma, grad) {
            Ok(next) => next,
            Err(e) => {
                status = RunStatus::Aborted { n, reason: e.to_string() };
                break;
            }
        };
        let step_norm = next.distance(&x);
        let nu = nu_at(Step { gamma, alpha }, l_f, l_phi);
        if n0.is_none() && nu > 0.0 {
            n0 = Some(n);
        }

        let logged = logging.should_log(n) || n == stop.max_iterations;
        if logged {
            let f_val = p.objective.value_unchecked(&x);
            let phi_val = p.regularizer.as_ref().map(|r| r.objective().value_unchecked(&x));
            let phi_n = f_val + alpha * (phi_val.unwrap_or(phi_star) - phi_star);
            if !f_val.is_finite() || !phi_n.is_finite() {
                status = RunStatus::Aborted { n, reason: "non-finite objective value".into() };
                break;
            }
            records.push(TraceRecord {
                n,
                x: x.clone(),
                gamma,
                alpha,
                f_val,
                phi_val,
                phi_n,
                step_norm,
                f_gap: target.map(|t| f_val - t.f_star),
                dist_to_target: target.map(|t| x.distance(&t.point)),
                lipschitz_n: l_f + alpha * l_phi,
                nu_n: nu,
            });
        }

        x = next;
        n += 1;

        if logged && stop.step_tolerance > 0.0 && alpha <= stop.step_tolerance {
            if step_norm / gamma < stop.step_tolerance {
                streak += 1;
            } else {
                streak = 0;
            }
            if streak >= EARLY_STOP_STREAK {
                status = RunStatus::StepToleranceReached;
                break;
            }
        }
        if let Some(limit) = stop.wall_clock_limit {
            if n % 1024 == 0 && started.elapsed() >= limit {
                status = RunStatus::TimeLimit;
                break;
            }
        }
    }

    let f_val = p.objective.value_unchecked(&x);
    Ok(RunTrace {
        records,
        final_state: FinalState {
            n,
            f_gap: target.map(|t| f_val - t.f_star),
            dist_to_target: target.map(|t| x.distance(&t.point)),
            x,
            f_val,
        },
        status,
        n0,
        phi_star: p.phi_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn half_dist(center: &[f64]) -> SmoothObjective {
        let d = center.len();
        let base = SmoothObjective::quadratic(Matrix::identity(d), Vector::zeros(d), 0.0).unwrap();
        SmoothObjective::translated(base, v(center)).unwrap()
    }

    fn sum_fit() -> SmoothObjective {
        SmoothObjective::least_squares(Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap(), v(&[2.0]))
            .unwrap()
    }

    fn big_box() -> ConvexSet {
        ConvexSet::boxed(v(&[0.0, 0.0]), v(&[10.0, 10.0])).unwrap()
    }

    #[test]
    fn gp_step_examples() {
        let p = ProblemInstance::new(
            half_dist(&[0.0, 0.0]),
            ConvexSet::whole_space(2).unwrap(),
            None,
            Schedule::constant(1.0, 1.0, 0.5).unwrap(),
            v(&[2.0, 0.0]),
        )
        .unwrap();
        assert_eq!(gp_step(&p, &v(&[2.0, 0.0]), 1).unwrap().as_slice(), &[0.0, 0.0]);

        let p = ProblemInstance::new(
            half_dist(&[0.0, 0.0]),
            ConvexSet::boxed(v(&[1.0, 1.0]), v(&[2.0, 2.0])).unwrap(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[2.0, 2.0]),
        )
        .unwrap();
        assert_eq!(gp_step(&p, &v(&[2.0, 2.0]), 1).unwrap().as_slice(), &[1.0, 1.0]);

        // stationary point of f on Q is a fixed point
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[0.5, 1.5]),
        )
        .unwrap();
        let x = v(&[0.5, 1.5]);
        assert!(gp_step(&p, &x, 3).unwrap().distance(&x) <= 1e-12);
    }

    #[test]
    fn ggp_step_examples() {
        // f = 0, phi = 0.5|x|^2, gamma alpha = 1
        let p = ProblemInstance::new(
            SmoothObjective::zero(2),
            ConvexSet::whole_space(2).unwrap(),
            Some(Regularizer::half_squared_norm(2)),
            Schedule::constant(1.0, 1.0, 0.5).unwrap(),
            v(&[5.0, 5.0]),
        )
        .unwrap();
        assert_eq!(ggp_step(&p, &v(&[5.0, 5.0]), 1).unwrap().as_slice(), &[0.0, 0.0]);

        // (4,0) - 0.5 (2,2) - 0.25 (4,0) = (2,-1) -> clamp -> (2,0)
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            Some(Regularizer::half_squared_norm(2)),
            Schedule::tabulated(vec![0.5], vec![0.5]).unwrap(),
            v(&[4.0, 0.0]),
        )
        .unwrap();
        let unclamped = 4.0 - 0.5 * 2.0 - 0.25 * 4.0;
        assert_eq!(unclamped, 2.0);
        assert_eq!(ggp_step(&p, &v(&[4.0, 0.0]), 1).unwrap().as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn ggp_with_zero_alpha_matches_gp() {
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            Some(Regularizer::half_squared_norm(2)),
            Schedule::tabulated(vec![0.3, 0.3], vec![0.0, 0.0]).unwrap(),
            v(&[7.0, 1.0]),
        )
        .unwrap();
        let x = v(&[7.0, 1.0]);
        assert_eq!(ggp_step(&p, &x, 2).unwrap(), gp_step(&p, &x, 2).unwrap());
    }

    #[test]
    fn ggp_requires_regularizer() {
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[1.0, 1.0]),
        )
        .unwrap();
        assert!(ggp_step(&p, &v(&[1.0, 1.0]), 1).is_err());
        assert!(run(&p, Mode::Ggp, &StopRule::iterations(5), LogSchedule::Every(1), None).is_err());
    }

    #[test]
    fn start_is_projected() {
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[-3.0, 12.0]),
        )
        .unwrap();
        assert_eq!(p.x0().as_slice(), &[0.0, 10.0]);
    }

    #[test]
    fn unique_minimizer_contraction() {
        let p = ProblemInstance::new(
            half_dist(&[1.0, 1.0]),
            ConvexSet::boxed(v(&[0.0, 0.0]), v(&[2.0, 2.0])).unwrap(),
            None,
            Schedule::constant(1.0, 1.0, 0.5).unwrap(),
            v(&[0.0, 2.0]),
        )
        .unwrap();
        let trace = run(&p, Mode::Gp, &StopRule::iterations(100), LogSchedule::Every(1), None).unwrap();
        assert_eq!(trace.records.len(), 100);
        assert!(trace.final_x().distance(&v(&[1.0, 1.0])) <= 1e-10);
        assert_eq!(trace.status, RunStatus::MaxIterations);
        assert!(trace.records.iter().all(|r| r.f_gap.is_none()));
    }

    #[test]
    fn gp_limits_depend_on_start() {
        let base = ProblemInstance::new(
            sum_fit(),
            big_box(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[4.0, 0.0]),
        )
        .unwrap();
        let stop = StopRule::iterations(200);
        let a = run(&base, Mode::Gp, &stop, LogSchedule::Geometric, None).unwrap();
        let b = run(&base.with_start(v(&[0.0, 4.0])).unwrap(), Mode::Gp, &stop, LogSchedule::Geometric, None)
            .unwrap();
        for t in [&a, &b] {
            let x = t.final_x();
            assert!((x[0] + x[1] - 2.0).abs() <= 1e-8);
        }
        assert!(a.final_x().distance(b.final_x()) > 1.0);
    }

    #[test]
    fn early_stop_and_logging() {
        let p = ProblemInstance::new(
            half_dist(&[1.0, 1.0]),
            ConvexSet::whole_space(2).unwrap(),
            None,
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[0.0, 0.0]),
        )
        .unwrap();
        let stop = StopRule {
            max_iterations: 10_000,
            step_tolerance: 1e-8,
            wall_clock_limit: None,
        };
        let t = run(&p, Mode::Gp, &stop, LogSchedule::Every(1), None).unwrap();
        assert_eq!(t.status, RunStatus::StepToleranceReached);
        assert!(t.records.len() < 100);
        let t = run(&p, Mode::Gp, &StopRule::iterations(5000), LogSchedule::Geometric, None).unwrap();
        assert_eq!(t.records.last().unwrap().n, 5000);
        // 999 + about 1000 ln(5)
        assert!(t.records.len() < 2400);
        let t = run(&p, Mode::Gp, &StopRule::iterations(10), LogSchedule::Every(4), None).unwrap();
        let ns: Vec<u64> = t.records.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![1, 4, 8, 10]);
    }

    #[test]
    fn overflow_aborts_with_last_good_iterate() {
        // gamma far above 2/L on an unbounded set diverges geometrically.
        let p = ProblemInstance::new(
            half_dist(&[0.0]),
            ConvexSet::whole_space(1).unwrap(),
            None,
            Schedule::constant(1e6, 1.0, 0.5).unwrap(),
            v(&[1.0]),
        )
        .unwrap();
        let t = run(&p, Mode::Gp, &StopRule::iterations(1000), LogSchedule::Every(1), None).unwrap();
        assert!(t.status.is_aborted());
        assert!(t.final_x().is_finite());
        assert!(t.records.iter().all(|r| r.f_val.is_finite()));
    }

    #[test]
    fn tabulated_schedule_too_short() {
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            None,
            Schedule::tabulated(vec![0.5; 3], vec![0.1; 3]).unwrap(),
            v(&[1.0, 1.0]),
        )
        .unwrap();
        assert!(run(&p, Mode::Gp, &StopRule::iterations(4), LogSchedule::Every(1), None).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = ProblemInstance::new(
            sum_fit(),
            big_box(),
            Some(Regularizer::half_squared_norm(2)),
            Schedule::constant(0.5, 1.0, 0.5).unwrap(),
            v(&[4.0, 0.0]),
        )
        .unwrap();
        let t = run(&p, Mode::Ggp, &StopRule::iterations(3), LogSchedule::Every(1), None).unwrap();
        let csv = t.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[0], "1");
        assert_eq!(fields[7], "");
        assert_eq!(fields[8], "");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.5);
    }
}

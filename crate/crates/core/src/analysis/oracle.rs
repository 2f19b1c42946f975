//! Exact minimizer sets of catalogue problems and the selected point.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::affine::{ball_boundary_minimizer, minimize_on, solve_linear, Affine};
use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, SetKind, Vector};
use crate::linalg::{from_dvector, to_dvector};
use crate::objectives::{Regularizer, SmoothObjective};
use crate::schedules::Schedule;
use crate::solver::{self, LogSchedule, Mode, ProblemInstance, StopRule, Target};

/// Largest dimension handled by active-set enumeration.
pub const MAX_ENUMERATION_DIM: usize = 6;

/// Membership slack for descriptor points.
pub const ORACLE_MEMBERSHIP_TOL: f64 = 1e-9;

/// Relative slack when deciding that a candidate attains `f*`.
const OPTIMALITY_TOL: f64 = 1e-11;

/// Distance below which coordinates snap to integers on integral data.
const SNAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SolutionSet {
    Point(Vector),
    Segment(Vector, Vector),
    Polytope(Vec<Vector>),
    /// Finitely many points of a set that is not described exactly.
    Sampled(Vec<Vector>),
}

impl SolutionSet {
    pub fn points(&self) -> Vec<&Vector> {
        match self {
            SolutionSet::Point(p) => vec![p],
            SolutionSet::Segment(a, b) => vec![a, b],
            SolutionSet::Polytope(v) | SolutionSet::Sampled(v) => v.iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ClosedForm,
    KktEnumeration,
    LongRunNumeric,
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMethod::ClosedForm => "closed_form",
            OracleMethod::KktEnumeration => "kkt_enumeration",
            OracleMethod::LongRunNumeric => "long_run_numeric",
        })
    }
}

/// `S = argmin_Q f`, its value `f*`, and `y* = argmin_S phi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionOracle {
    pub f_star: f64,
    pub solution_set: SolutionSet,
    pub y_star: Vector,
    pub method: OracleMethod,
}

impl SolutionOracle {
    pub fn target(&self) -> Target {
        Target {
            f_star: self.f_star,
            point: self.y_star.clone(),
        }
    }
}

/// Settings of the numerical fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRunOptions {
    pub iterations: u64,
    pub starts: usize,
    pub seed: u64,
    /// `alpha_n = alpha_scale / sqrt(n)`.
    pub alpha_scale: f64,
    /// Largest allowed distance between the final iterates.
    pub agreement_tol: f64,
}

impl Default for LongRunOptions {
    fn default() -> Self {
        LongRunOptions {
            iterations: 10_000_000,
            starts: 3,
            seed: 0,
            alpha_scale: 0.05,
            agreement_tol: 1e-6,
        }
    }
}

/// Quadratic data `0.5 x'Ax - b'x + c` in nalgebra form.
struct Quad {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl Quad {
    fn of(f: &SmoothObjective, role: &str) -> Result<Self> {
        let parts = f
            .quadratic_parts()
            .ok_or_else(|| Error::OracleUnavailable(format!("{role} is not quadratic")))?;
        Ok(Quad {
            a: parts.a.to_dmatrix(),
            b: to_dvector(&parts.b),
            c: parts.c,
        })
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) - self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    /// `self + alpha * other`.
    fn plus(&self, alpha: f64, other: &Quad) -> Quad {
        Quad {
            a: &self.a + &other.a * alpha,
            b: &self.b + &other.b * alpha,
            c: self.c + alpha * other.c,
        }
    }

    fn is_integral(&self) -> bool {
        self.a.iter().chain(self.b.iter()).all(|v| v.fract() == 0.0)
    }
}

/// `{ineq_i x <= ineq_rhs_i} ∩ {eq x = eq_rhs}`.
struct Polyhedron {
    ineq: Vec<(DVector<f64>, f64)>,
    eq: Vec<(DVector<f64>, f64)>,
    dim: usize,
}

impl Polyhedron {
    fn of(q: &ConvexSet) -> Option<Self> {
        let d = q.dim();
        let unit = |i: usize, s: f64| {
            let mut e = DVector::zeros(d);
            e[i] = s;
            e
        };
        let mut ineq = Vec::new();
        let mut eq = Vec::new();
        match q.kind() {
            SetKind::Box { lower, upper } => {
                for i in 0..d {
                    if lower[i] == upper[i] {
                        eq.push((unit(i, 1.0), lower[i]));
                    } else {
                        ineq.push((unit(i, 1.0), upper[i]));
                        ineq.push((unit(i, -1.0), -lower[i]));
                    }
                }
            }
            SetKind::Simplex { scale, .. } => {
                for i in 0..d {
                    ineq.push((unit(i, -1.0), 0.0));
                }
                eq.push((DVector::from_element(d, 1.0), *scale));
            }
            SetKind::Halfspace { normal, offset } => ineq.push((to_dvector(normal), *offset)),
            SetKind::AffineHyperplane { normal, offset } => eq.push((to_dvector(normal), *offset)),
            SetKind::WholeSpace { .. } => {}
            SetKind::Ball { .. } => return None,
        }
        Some(Polyhedron { ineq, eq, dim: d })
    }

    fn is_integral(&self) -> bool {
        self.ineq
            .iter()
            .chain(&self.eq)
            .all(|(row, rhs)| rhs.fract() == 0.0 && row.iter().all(|v| v.fract() == 0.0))
    }

    /// Affine hull of the face where the inequalities in `mask` are active,
    /// intersected with `extra`.
    fn face(&self, mask: u64, extra: &[(DVector<f64>, f64)]) -> Option<Affine> {
        let rows: Vec<&(DVector<f64>, f64)> = self
            .eq
            .iter()
            .chain(extra)
            .chain(
                self.ineq
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, r)| r),
            )
            .collect();
        let mut c = DMatrix::zeros(rows.len(), self.dim);
        let mut rhs = DVector::zeros(rows.len());
        for (k, (row, r)) in rows.iter().enumerate() {
            c.set_row(k, &row.transpose());
            rhs[k] = *r;
        }
        solve_linear(&c, &rhs)
    }

    /// Masks of at most `dim` active inequalities.
    fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        (0u64..1 << self.ineq.len()).filter(move |m| m.count_ones() as usize <= self.dim)
    }
}

fn check_dims(f: &SmoothObjective, q: &ConvexSet, phi: &Regularizer) -> Result<()> {
    Error::check_dim(q.dim(), f.dim())?;
    Error::check_dim(q.dim(), phi.dim())
}

fn feasible(q: &ConvexSet, x: &DVector<f64>) -> bool {
    q.contains_unchecked(&from_dvector(x), ORACLE_MEMBERSHIP_TOL)
}

fn enumeration_guard(poly: &Polyhedron) -> Result<()> {
    if poly.ineq.len() > 1 && poly.dim > MAX_ENUMERATION_DIM {
        return Err(Error::OracleUnavailable(format!(
            "active-set enumeration is limited to dimension {MAX_ENUMERATION_DIM}, got {}",
            poly.dim
        )));
    }
    Ok(())
}

/// Computes `f*`, an exact description of `S = argmin_Q f`, and the point of
/// `S` minimizing `phi`.
///
/// Quadratic and least-squares objectives with quadratic regularizers are
/// handled exactly on every polyhedral set kind (active-set enumeration,
/// dimension at most six when more than one inequality is present) and on
/// balls. Anything else is [`Error::OracleUnavailable`].
pub fn solve_oracle(f: &SmoothObjective, q: &ConvexSet, phi: &Regularizer) -> Result<SolutionOracle> {
    check_dims(f, q, phi)?;
    let fq = Quad::of(f, "objective")?;
    let pq = Quad::of(phi.objective(), "regularizer")?;
    let mut oracle = match Polyhedron::of(q) {
        Some(poly) => polyhedral_oracle(&fq, &pq, q, &poly)?,
        None => ball_oracle(&fq, phi, q)?,
    };
    if fq.is_integral() && pq.is_integral() && set_is_integral(q) {
        snap(&mut oracle);
    }
    Ok(oracle)
}

fn set_is_integral(q: &ConvexSet) -> bool {
    match q.kind() {
        SetKind::Ball { center, radius } => radius.fract() == 0.0 && center.iter().all(|v| v.fract() == 0.0),
        _ => Polyhedron::of(q).is_some_and(|p| p.is_integral()),
    }
}

/// [`solve_oracle`], falling back to [`long_run_numeric`] when no exact
/// method applies.
pub fn solve_oracle_or_numeric(
    f: &SmoothObjective,
    q: &ConvexSet,
    phi: &Regularizer,
    options: &LongRunOptions,
) -> Result<SolutionOracle> {
    match solve_oracle(f, q, phi) {
        Err(Error::OracleUnavailable(_)) => long_run_numeric(f, q, phi, options),
        other => other,
    }
}

/// Distance from `x` to `S = argmin_Q f`.
pub fn distance_to_solution_set(f: &SmoothObjective, q: &ConvexSet, x: &Vector) -> Result<f64> {
    let oracle = solve_oracle(f, q, &Regularizer::half_squared_distance(x.clone()))?;
    Ok(oracle.y_star.distance(x))
}

fn polyhedral_oracle(fq: &Quad, pq: &Quad, q: &ConvexSet, poly: &Polyhedron) -> Result<SolutionOracle> {
    enumeration_guard(poly)?;
    // Candidates: for each face, the phi-best minimizer of f on its affine hull.
    let mut candidates: Vec<(DVector<f64>, f64, f64)> = Vec::new();
    for mask in poly.masks() {
        let Some(face) = poly.face(mask, &[]) else { continue };
        let Some(minimizers) = minimize_on(&face, &fq.a, &fq.b) else { continue };
        let Some(c) = minimize_on(&minimizers, &pq.a, &pq.b).map(|m| m.point) else { continue };
        if feasible(q, &c) {
            candidates.push((c.clone(), fq.value(&c), pq.value(&c)));
        }
    }
    let f_star = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    if !f_star.is_finite() {
        return Err(Error::OracleUnavailable("objective has no minimizer on the set".into()));
    }
    let level = f_star + OPTIMALITY_TOL * (1.0 + f_star.abs());
    let y = candidates
        .iter()
        .filter(|c| c.1 <= level)
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .map(|c| c.0.clone())
        .expect("the minimizing candidate attains the level");

    let g = fq.gradient(&y);
    let ay = &fq.a * &y;
    // S = Q ∩ {A x = A y*} ∩ {<grad f(y*), x> = <grad f(y*), y*>}
    let mut extra: Vec<(DVector<f64>, f64)> = (0..poly.dim)
        .map(|i| (fq.a.row(i).transpose(), ay[i]))
        .collect();
    let g_norm = g.norm();
    if g_norm > 1e-9 * (1.0 + ay.norm() + fq.b.norm()) {
        let unit = &g / g_norm;
        let rhs = unit.dot(&y);
        extra.push((unit, rhs));
    }
    let hull = poly.face(0, &extra).expect("y* lies on the hull");
    let method = if poly.ineq.is_empty() {
        OracleMethod::ClosedForm
    } else {
        OracleMethod::KktEnumeration
    };
    let solution_set = if hull.dim() == 0 {
        SolutionSet::Point(from_dvector(&y))
    } else if q.is_bounded() {
        describe_polytope(poly, q, &extra, &y)
    } else {
        sample_flat(q, &hull, &y)
    };
    Ok(SolutionOracle {
        f_star: fq.value(&y),
        solution_set,
        y_star: from_dvector(&y),
        method,
    })
}

fn describe_polytope(
    poly: &Polyhedron,
    q: &ConvexSet,
    extra: &[(DVector<f64>, f64)],
    y: &DVector<f64>,
) -> SolutionSet {
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    for mask in poly.masks() {
        let Some(face) = poly.face(mask, extra) else { continue };
        if face.dim() != 0 || !feasible(q, &face.point) {
            continue;
        }
        if vertices.iter().all(|v| (v - &face.point).norm() > 1e-9) {
            vertices.push(face.point);
        }
    }
    vertices.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    match vertices.len() {
        0 => SolutionSet::Point(from_dvector(y)),
        1 => SolutionSet::Point(from_dvector(&vertices[0])),
        2 => SolutionSet::Segment(from_dvector(&vertices[0]), from_dvector(&vertices[1])),
        _ => SolutionSet::Polytope(vertices.iter().map(from_dvector).collect()),
    }
}

/// `y` plus points one unit along each direction of the hull, kept when
/// they stay in `q`.
fn sample_flat(q: &ConvexSet, hull: &Affine, y: &DVector<f64>) -> SolutionSet {
    let mut points = vec![from_dvector(y)];
    for j in 0..hull.dim() {
        for s in [1.0, -1.0] {
            let p = y + hull.basis.column(j) * s;
            if feasible(q, &p) {
                points.push(from_dvector(&p));
            }
        }
    }
    SolutionSet::Sampled(points)
}

fn ball_oracle(fq: &Quad, phi: &Regularizer, q: &ConvexSet) -> Result<SolutionOracle> {
    let SetKind::Ball { center, radius } = q.kind() else {
        unreachable!("polyhedral sets are handled elsewhere")
    };
    let d = q.dim();
    let center = to_dvector(center);
    let inside = minimize_on(&Affine::whole(d), &fq.a, &fq.b)
        .map(|m| (m.project(&center), m))
        .filter(|(o, _)| (o - &center).norm() <= radius * (1.0 + 1e-12));
    let Some((o, flat)) = inside else {
        let y = ball_boundary_minimizer(&fq.a, &fq.b, &center, *radius);
        return Ok(SolutionOracle {
            f_star: fq.value(&y),
            solution_set: SolutionSet::Point(from_dvector(&y)),
            y_star: from_dvector(&y),
            method: OracleMethod::ClosedForm,
        });
    };
    // S is the slice of the ball by the flat of unconstrained minimizers:
    // a ball of radius rho around o inside that flat.
    let rho = (radius * radius - (&o - &center).norm_squared()).max(0.0).sqrt();
    let f_star = fq.value(&o);
    if flat.dim() == 0 || rho == 0.0 {
        return Ok(SolutionOracle {
            f_star,
            solution_set: SolutionSet::Point(from_dvector(&o)),
            y_star: from_dvector(&o),
            method: OracleMethod::ClosedForm,
        });
    }
    let (_, phi_center) = phi.isotropic_center().ok_or_else(|| {
        Error::OracleUnavailable("non-isotropic regularizer over a ball slice".into())
    })?;
    let p = flat.project(&to_dvector(&phi_center));
    let off = &p - &o;
    let off_norm = off.norm();
    let y = if off_norm <= rho { p } else { &o + off * (rho / off_norm) };
    let solution_set = if flat.dim() == 1 {
        let u = flat.basis.column(0) * rho;
        SolutionSet::Segment(from_dvector(&(&o - &u)), from_dvector(&(&o + &u)))
    } else {
        let mut pts = vec![from_dvector(&y)];
        for j in 0..flat.dim() {
            for s in [rho, -rho] {
                pts.push(from_dvector(&(&o + flat.basis.column(j) * s)));
            }
        }
        SolutionSet::Sampled(pts)
    };
    Ok(SolutionOracle {
        f_star,
        solution_set,
        y_star: from_dvector(&y),
        method: OracleMethod::ClosedForm,
    })
}

fn snap(oracle: &mut SolutionOracle) {
    let snap_vec = |v: &mut Vector| {
        let snapped: Vec<f64> = v
            .iter()
            .map(|&x| if (x - x.round()).abs() <= SNAP_TOL { x.round() + 0.0 } else { x })
            .collect();
        *v = Vector::from_raw(snapped);
    };
    snap_vec(&mut oracle.y_star);
    match &mut oracle.solution_set {
        SolutionSet::Point(p) => snap_vec(p),
        SolutionSet::Segment(a, b) => {
            snap_vec(a);
            snap_vec(b);
        }
        SolutionSet::Polytope(v) | SolutionSet::Sampled(v) => v.iter_mut().for_each(snap_vec),
    }
    if (oracle.f_star - oracle.f_star.round()).abs() <= SNAP_TOL {
        oracle.f_star = oracle.f_star.round() + 0.0;
    }
}

/// `argmin_Q (f + alpha phi)` for each `alpha`, in order.
pub fn regularization_path(
    f: &SmoothObjective,
    q: &ConvexSet,
    phi: &Regularizer,
    alphas: &[f64],
) -> Result<Vec<Vector>> {
    check_dims(f, q, phi)?;
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::invalid("alphas", format!("must be positive and finite, got {a}")));
    }
    let fq = Quad::of(f, "objective")?;
    let pq = Quad::of(phi.objective(), "regularizer")?;
    let poly = Polyhedron::of(q);
    if let Some(poly) = &poly {
        enumeration_guard(poly)?;
    }
    alphas
        .iter()
        .map(|&alpha| {
            let g = fq.plus(alpha, &pq);
            let y = match &poly {
                Some(poly) => strongly_convex_argmin(&g, q, poly)?,
                None => {
                    let SetKind::Ball { center, radius } = q.kind() else { unreachable!() };
                    let center = to_dvector(center);
                    let free = minimize_on(&Affine::whole(q.dim()), &g.a, &g.b)
                        .expect("strongly convex")
                        .point;
                    if (&free - &center).norm() <= *radius {
                        free
                    } else {
                        ball_boundary_minimizer(&g.a, &g.b, &center, *radius)
                    }
                }
            };
            Ok(from_dvector(&y))
        })
        .collect()
}

fn strongly_convex_argmin(g: &Quad, q: &ConvexSet, poly: &Polyhedron) -> Result<DVector<f64>> {
    poly.masks()
        .filter_map(|mask| poly.face(mask, &[]))
        .filter_map(|face| minimize_on(&face, &g.a, &g.b).map(|m| m.point))
        .filter(|c| feasible(q, c))
        .min_by(|a, b| g.value(a).total_cmp(&g.value(b)))
        .ok_or_else(|| Error::OracleUnavailable("no feasible active set".into()))
}

/// Approximates `y*` by a long regularized run with slowly vanishing
/// `alpha_n` from several starts, and certifies that the final iterates agree.
pub fn long_run_numeric(
    f: &SmoothObjective,
    q: &ConvexSet,
    phi: &Regularizer,
    options: &LongRunOptions,
) -> Result<SolutionOracle> {
    check_dims(f, q, phi)?;
    if options.starts == 0 {
        return Err(Error::invalid("starts", "need at least one start"));
    }
    let gamma = 1.0 / (f.lipschitz() + options.alpha_scale * phi.lipschitz());
    let schedule = Schedule::constant(gamma, options.alpha_scale, 0.5)?;
    let starts = q.support_sample(options.seed, options.starts)?;
    let base = ProblemInstance::new(
        f.clone(),
        q.clone(),
        Some(phi.clone()),
        schedule,
        starts[0].clone(),
    )?;
    let stop = StopRule::iterations(options.iterations);
    let finals: Vec<Result<Vector>> = std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .iter()
            .map(|x0| {
                let (base, stop) = (&base, &stop);
                scope.spawn(move || -> Result<Vector> {
                    let p = base.with_start(x0.clone())?;
                    let t = solver::run(&p, Mode::Ggp, stop, LogSchedule::Every(u64::MAX), None)?;
                    if let solver::RunStatus::Aborted { reason, .. } = t.status {
                        return Err(Error::NonFinite(reason));
                    }
                    Ok(t.final_state.x)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let spread = max_pairwise_distance(&finals);
    if spread > options.agreement_tol {
        return Err(Error::OracleUnavailable(format!(
            "long runs disagree: spread {spread:e} exceeds {:e}",
            options.agreement_tol
        )));
    }
    let y = finals[0].clone();
    Ok(SolutionOracle {
        f_star: f.value(&y)?,
        solution_set: SolutionSet::Sampled(finals),
        y_star: y,
        method: OracleMethod::LongRunNumeric,
    })
}

/// Largest distance between two of the points; zero for fewer than two.
pub fn max_pairwise_distance(points: &[Vector]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.distance(b));
        }
    }
    best
}

//! Smooth convex objectives and strongly convex regularizers.
//!
//! Every objective carries a Lipschitz constant for its gradient and a
//! strong-convexity modulus. Both are global constants, which are in
//! particular valid on any constraint set.

use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, Vector};
use crate::linalg::{power_iteration_max_eigenvalue, Matrix};

/// Relative tolerance of the power iteration behind Lipschitz constants.
pub const LIPSCHITZ_REL_TOL: f64 = 1e-10;

/// Slack added to the descent-lemma upper bound, scaled by `1 + |y - x|^2`.
pub const DESCENT_LEMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    /// `f(x) = 0.5 <Ax, x> - <b, x> + c` with `A` symmetric PSD.
    Quadratic { a: Matrix, b: Vector, c: f64 },
    /// `f(x) = 0.5 |Mx - y|^2`.
    LeastSquares { m: Matrix, y: Vector },
    /// Huber function of the Euclidean norm: `|x|^2 / (2 delta)` inside the
    /// `delta`-ball, `|x| - delta / 2` outside.
    HuberizedNorm { dim: usize, delta: f64 },
    /// `f(x) = base(x - shift)`.
    Translated { base: Box<SmoothObjective>, shift: Vector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothObjective {
    kind: ObjectiveKind,
    dim: usize,
    lipschitz: f64,
    strong_convexity: f64,
}

/// `0.5 <Ax, x> - <b, x> + c`, the expanded form of every quadratic member of
/// the catalogue.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct QuadraticParts {
    pub a: Matrix,
    pub b: Vector,
    pub c: f64,
}

impl SmoothObjective {
    pub fn new(kind: ObjectiveKind) -> Result<Self> {
        let (dim, lipschitz, strong_convexity) = match &kind {
            ObjectiveKind::Quadratic { a, b, c } => {
                if a.rows() != a.cols() {
                    return Err(Error::invalid("objective.a", "must be square"));
                }
                Error::check_dim(a.rows(), b.dim())?;
                if !c.is_finite() {
                    return Err(Error::NonFinite("objective.c".into()));
                }
                if !a.is_symmetric(1e-12) {
                    return Err(Error::invalid("objective.a", "must be symmetric"));
                }
                let (min, max) = a.symmetric_eigen_range();
                let scale = max.abs().max(1.0);
                if min < -1e-10 * scale {
                    return Err(Error::invalid(
                        "objective.a",
                        format!("must be positive semidefinite (smallest eigenvalue {min})"),
                    ));
                }
                let l = power_iteration_max_eigenvalue(a, LIPSCHITZ_REL_TOL).max(0.0);
                (a.rows(), l, strong_modulus(min, max))
            }
            ObjectiveKind::LeastSquares { m, y } => {
                Error::check_dim(m.rows(), y.dim())?;
                let gram = m.gram();
                let (min, max) = gram.symmetric_eigen_range();
                let l = power_iteration_max_eigenvalue(&gram, LIPSCHITZ_REL_TOL).max(0.0);
                (m.cols(), l, strong_modulus(min, max))
            }
            ObjectiveKind::HuberizedNorm { dim, delta } => {
                if *dim == 0 {
                    return Err(Error::invalid("objective.dim", "must be at least 1"));
                }
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(Error::invalid(
                        "objective.delta",
                        format!("must be positive, got {delta}"),
                    ));
                }
                (*dim, 1.0 / delta, 0.0)
            }
            ObjectiveKind::Translated { base, shift } => {
                Error::check_dim(base.dim, shift.dim())?;
                (base.dim, base.lipschitz, base.strong_convexity)
            }
        };
        Ok(SmoothObjective {
            kind,
            dim,
            lipschitz,
            strong_convexity,
        })
    }

    pub fn quadratic(a: Matrix, b: Vector, c: f64) -> Result<Self> {
        Self::new(ObjectiveKind::Quadratic { a, b, c })
    }

    pub fn least_squares(m: Matrix, y: Vector) -> Result<Self> {
        Self::new(ObjectiveKind::LeastSquares { m, y })
    }

    pub fn huberized_norm(dim: usize, delta: f64) -> Result<Self> {
        Self::new(ObjectiveKind::HuberizedNorm { dim, delta })
    }

    pub fn translated(base: SmoothObjective, shift: Vector) -> Result<Self> {
        Self::new(ObjectiveKind::Translated {
            base: Box::new(base),
            shift,
        })
    }

    /// The zero function on `dim` coordinates.
    pub fn zero(dim: usize) -> Self {
        Self::quadratic(Matrix::diagonal(&vec![0.0; dim]), Vector::zeros(dim), 0.0)
            .expect("zero quadratic is valid")
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Global Lipschitz constant of the gradient.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    /// Lipschitz constant of the gradient on `q`. The global constant is
    /// returned; it is valid on every subset.
    pub fn lipschitz_constant(&self, q: &ConvexSet) -> Result<f64> {
        Error::check_dim(self.dim, q.dim())?;
        Ok(self.lipschitz)
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        Error::check_dim(self.dim, x.dim())?;
        Ok(self.value_unchecked(x))
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim, x.dim())?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &Vector) -> f64 {
        match &self.kind {
            ObjectiveKind::Quadratic { a, b, c } => 0.5 * a.mul_vec(x).dot(x) - b.dot(x) + c,
            ObjectiveKind::LeastSquares { m, y } => 0.5 * m.mul_vec(x).sub(y).norm_sq(),
            ObjectiveKind::HuberizedNorm { delta, .. } => {
                let r = x.norm();
                if r <= *delta {
                    r * r / (2.0 * delta)
                } else {
                    r - delta / 2.0
                }
            }
            ObjectiveKind::Translated { base, shift } => base.value_unchecked(&x.sub(shift)),
        }
    }

    pub(crate) fn gradient_unchecked(&self, x: &Vector) -> Vector {
        match &self.kind {
            ObjectiveKind::Quadratic { a, b, .. } => a.mul_vec(x).sub(b),
            ObjectiveKind::LeastSquares { m, y } => m.tr_mul_vec(&m.mul_vec(x).sub(y)),
            ObjectiveKind::HuberizedNorm { delta, .. } => {
                let r = x.norm();
                if r <= *delta {
                    x.scale(1.0 / delta)
                } else {
                    x.scale(1.0 / r)
                }
            }
            ObjectiveKind::Translated { base, shift } => base.gradient_unchecked(&x.sub(shift)),
        }
    }

    /// Expanded quadratic form, when the objective is quadratic.
    pub(crate) fn quadratic_parts(&self) -> Option<QuadraticParts> {
        match &self.kind {
            ObjectiveKind::Quadratic { a, b, c } => Some(QuadraticParts {
                a: a.clone(),
                b: b.clone(),
                c: *c,
            }),
            ObjectiveKind::LeastSquares { m, y } => Some(QuadraticParts {
                a: m.gram(),
                b: m.tr_mul_vec(y),
                c: 0.5 * y.norm_sq(),
            }),
            ObjectiveKind::HuberizedNorm { .. } => None,
            ObjectiveKind::Translated { base, shift } => {
                // base(x - s) = 0.5 x'Ax - (b + As)'x + (c + 0.5 s'As + b's)
                let parts = base.quadratic_parts()?;
                let a_shift = parts.a.mul_vec(shift);
                Some(QuadraticParts {
                    b: parts.b.add(&a_shift),
                    c: parts.c + 0.5 * a_shift.dot(shift) + parts.b.dot(shift),
                    a: parts.a,
                })
            }
        }
    }

    /// Descent lemma: `g(y) <= g(x) + <grad g(x), y - x> + L/2 |y - x|^2`,
    /// up to [`DESCENT_LEMMA_TOL`]. Both points must lie in `q`.
    pub fn descent_lemma_check(&self, q: &ConvexSet, x: &Vector, y: &Vector) -> Result<bool> {
        Error::check_dim(self.dim, q.dim())?;
        for (name, p) in [("x", x), ("y", y)] {
            if !q.contains(p, 1e-9)? {
                return Err(Error::invalid(name, "point lies outside the constraint set"));
            }
        }
        let d = y.sub(x);
        let d_sq = d.norm_sq();
        let bound = self.value_unchecked(x)
            + self.gradient_unchecked(x).dot(&d)
            + 0.5 * self.lipschitz * d_sq
            + DESCENT_LEMMA_TOL * (1.0 + d_sq);
        Ok(self.value_unchecked(y) <= bound)
    }
}

fn strong_modulus(min_eig: f64, max_eig: f64) -> f64 {
    if min_eig > 1e-12 * max_eig.abs().max(1.0) {
        min_eig
    } else {
        0.0
    }
}

/// A strongly convex regularizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    objective: SmoothObjective,
}

impl Regularizer {
    pub fn new(objective: SmoothObjective) -> Result<Self> {
        if objective.strong_convexity() <= 0.0 {
            return Err(Error::invalid(
                "regularizer",
                "must be strongly convex (modulus m > 0)",
            ));
        }
        Ok(Regularizer { objective })
    }

    /// `0.5 |x|^2`
    pub fn half_squared_norm(dim: usize) -> Self {
        Self::half_squared_distance(Vector::zeros(dim))
    }

    /// `0.5 |x - center|^2`
    pub fn half_squared_distance(center: Vector) -> Self {
        let dim = center.dim();
        let base = SmoothObjective::quadratic(Matrix::identity(dim), Vector::zeros(dim), 0.0)
            .expect("identity quadratic is valid");
        let objective = if center.iter().all(|&c| c == 0.0) {
            base
        } else {
            SmoothObjective::translated(base, center).expect("dimensions agree")
        };
        Regularizer { objective }
    }

    pub fn objective(&self) -> &SmoothObjective {
        &self.objective
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn strong_convexity(&self) -> f64 {
        self.objective.strong_convexity()
    }

    pub fn lipschitz(&self) -> f64 {
        self.objective.lipschitz()
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.objective.gradient(x)
    }

    /// If the regularizer is `(m/2)|x - center|^2 + const`, returns `(m, center)`.
    pub(crate) fn isotropic_center(&self) -> Option<(f64, Vector)> {
        let parts = self.objective.quadratic_parts()?;
        let n = parts.a.rows();
        let m = parts.a.get(0, 0);
        let isotropic = (0..n).all(|i| {
            (0..n).all(|j| {
                let expected = if i == j { m } else { 0.0 };
                (parts.a.get(i, j) - expected).abs() <= 1e-14 * m.abs().max(1.0)
            })
        });
        (isotropic && m > 0.0).then(|| (m, parts.b.scale(1.0 / m)))
    }

    /// `inf_Q phi`.
    ///
    /// Exact for isotropic regularizers (the value at the projection of the
    /// center); otherwise computed by projected gradient on `phi` alone,
    /// which converges linearly because `phi` is strongly convex.
    pub fn infimum_over(&self, q: &ConvexSet) -> Result<f64> {
        Error::check_dim(self.dim(), q.dim())?;
        if let Some((_, center)) = self.isotropic_center() {
            return Ok(self.objective.value_unchecked(&q.project_unchecked(&center)));
        }
        let step = 1.0 / self.lipschitz();
        let mut x = q.project_unchecked(&Vector::zeros(self.dim()));
        for _ in 0..1_000_000 {
            let next = q.project_unchecked(&x.axpy(-step, &self.objective.gradient_unchecked(&x)));
            let moved = next.distance(&x);
            x = next;
            if moved <= 1e-15 * (1.0 + x.norm()) {
                break;
            }
        }
        Ok(self.objective.value_unchecked(&x))
    }
}

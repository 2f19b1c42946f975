use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Vector;
use crate::error::{Error, Result};

/// Spread of the sampling cloud used for unbounded sets.
const UNBOUNDED_SAMPLE_SCALE: f64 = 5.0;

/// The supported closed convex sets.
///
/// `Halfspace` is `{x : <normal, x> <= offset}` and `AffineHyperplane` is
/// `{x : <normal, x> = offset}`. `Simplex` is the scaled probability simplex
/// `{x >= 0 : sum(x) = scale}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetKind {
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    Simplex { dim: usize, scale: f64 },
    Halfspace { normal: Vector, offset: f64 },
    AffineHyperplane { normal: Vector, offset: f64 },
    WholeSpace { dim: usize },
}

/// A validated, nonempty, closed convex set with exact Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    kind: SetKind,
}

impl ConvexSet {
    pub fn new(kind: SetKind) -> Result<Self> {
        match &kind {
            SetKind::Box { lower, upper } => {
                Error::check_dim(lower.dim(), upper.dim())?;
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::invalid(
                        "set.lower",
                        format!("lower[{i}] = {} exceeds upper[{i}] = {}", lower[i], upper[i]),
                    ));
                }
            }
            SetKind::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid(
                        "set.radius",
                        format!("must be positive, got {radius}"),
                    ));
                }
            }
            SetKind::Simplex { dim, scale } => {
                if *dim == 0 {
                    return Err(Error::invalid("set.dim", "must be at least 1"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::invalid(
                        "set.scale",
                        format!("must be positive, got {scale}"),
                    ));
                }
            }
            SetKind::Halfspace { normal, offset } | SetKind::AffineHyperplane { normal, offset } => {
                if normal.norm() == 0.0 {
                    return Err(Error::invalid("set.normal", "must be nonzero"));
                }
                if !offset.is_finite() {
                    return Err(Error::NonFinite("set.offset".into()));
                }
            }
            SetKind::WholeSpace { dim } => {
                if *dim == 0 {
                    return Err(Error::invalid("set.dim", "must be at least 1"));
                }
            }
        }
        Ok(ConvexSet { kind })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        Self::new(SetKind::Box { lower, upper })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Self::new(SetKind::Ball { center, radius })
    }

    pub fn simplex(dim: usize, scale: f64) -> Result<Self> {
        Self::new(SetKind::Simplex { dim, scale })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        Self::new(SetKind::Halfspace { normal, offset })
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        Self::new(SetKind::AffineHyperplane { normal, offset })
    }

    pub fn whole_space(dim: usize) -> Result<Self> {
        Self::new(SetKind::WholeSpace { dim })
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Box { lower, .. } => lower.dim(),
            SetKind::Ball { center, .. } => center.dim(),
            SetKind::Simplex { dim, .. } | SetKind::WholeSpace { dim } => *dim,
            SetKind::Halfspace { normal, .. } | SetKind::AffineHyperplane { normal, .. } => {
                normal.dim()
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(
            self.kind,
            SetKind::Box { .. } | SetKind::Ball { .. } | SetKind::Simplex { .. }
        )
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        Error::check_dim(self.dim(), x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite("point to project".into()));
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Vector) -> Vector {
        match &self.kind {
            SetKind::Box { lower, upper } => Vector::from_raw(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
                    .collect(),
            ),
            SetKind::Ball { center, radius } => {
                let offset = x.sub(center);
                let dist = offset.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center.axpy(radius / dist, &offset)
                }
            }
            SetKind::Simplex { scale, .. } => {
                if self.contains_unchecked(x, 0.0) {
                    x.clone()
                } else {
                    project_simplex(x, *scale)
                }
            }
            SetKind::Halfspace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            SetKind::AffineHyperplane { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess == 0.0 {
                    x.clone()
                } else {
                    x.axpy(-excess / normal.norm_sq(), normal)
                }
            }
            SetKind::WholeSpace { .. } => x.clone(),
        }
    }

    /// Whether `x` violates each defining constraint by at most `tol`.
    ///
    /// Halfspace and hyperplane violations are measured as Euclidean distance,
    /// so the tolerance does not depend on the scaling of `normal`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Error::check_dim(self.dim(), x.dim())?;
        if !(tol >= 0.0) {
            return Err(Error::invalid("tol", "must be nonnegative"));
        }
        Ok(self.contains_unchecked(x, tol))
    }

    pub(crate) fn contains_unchecked(&self, x: &Vector, tol: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match &self.kind {
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol),
            SetKind::Ball { center, radius } => x.distance(center) <= radius + tol,
            SetKind::Simplex { scale, .. } => {
                x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - scale).abs() <= tol
            }
            SetKind::Halfspace { normal, offset } => {
                (normal.dot(x) - offset) / normal.norm() <= tol
            }
            SetKind::AffineHyperplane { normal, offset } => {
                (normal.dot(x) - offset).abs() / normal.norm() <= tol
            }
            SetKind::WholeSpace { .. } => true,
        }
    }

    /// Deterministic pseudo-random points of the set, including boundary points.
    pub fn support_sample(&self, seed: u64, count: usize) -> Result<Vec<Vector>> {
        if count == 0 {
            return Err(Error::invalid("count", "must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count).map(|_| self.sample_one(&mut rng)).collect())
    }

    fn sample_one(&self, rng: &mut ChaCha8Rng) -> Vector {
        let dim = self.dim();
        match &self.kind {
            SetKind::Box { lower, upper } => Vector::from_raw(
                (0..dim)
                    .map(|i| match rng.random_range(0..8u8) {
                        0 => lower[i],
                        1 => upper[i],
                        _ => (lower[i] + rng.random::<f64>() * (upper[i] - lower[i]))
                            .clamp(lower[i], upper[i]),
                    })
                    .collect(),
            ),
            SetKind::Ball { center, radius } => {
                let dir = unit_direction(rng, dim);
                let frac = if rng.random_range(0..4u8) == 0 {
                    1.0
                } else {
                    rng.random::<f64>().powf(1.0 / dim as f64)
                };
                center.axpy(radius * frac, &dir)
            }
            SetKind::Simplex { scale, .. } => {
                let mut weights: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
                if rng.random_range(0..3u8) == 0 {
                    let keep = rng.random_range(0..dim);
                    for (i, w) in weights.iter_mut().enumerate() {
                        if i != keep && rng.random::<bool>() {
                            *w = 0.0;
                        }
                    }
                }
                let total: f64 = weights.iter().sum();
                if total <= 0.0 {
                    let mut vertex = vec![0.0; dim];
                    vertex[0] = *scale;
                    return Vector::from_raw(vertex);
                }
                Vector::from_raw(weights.iter().map(|w| scale * w / total).collect())
            }
            SetKind::Halfspace { normal, offset } | SetKind::AffineHyperplane { normal, offset } => {
                let n_norm = normal.norm();
                let unit = normal.scale(1.0 / n_norm);
                let anchor = unit.scale(offset / n_norm);
                let w = gaussian(rng, dim).scale(UNBOUNDED_SAMPLE_SCALE);
                let tangent = w.axpy(-w.dot(&unit), &unit);
                let depth = match &self.kind {
                    SetKind::Halfspace { .. } if rng.random_range(0..4u8) != 0 => {
                        let e: f64 = Exp1.sample(rng);
                        e * UNBOUNDED_SAMPLE_SCALE
                    }
                    _ => 0.0,
                };
                anchor.add(&tangent).axpy(-depth, &unit)
            }
            SetKind::WholeSpace { .. } => gaussian(rng, dim).scale(UNBOUNDED_SAMPLE_SCALE),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::from_raw((0..dim).map(|_| StandardNormal.sample(rng)).collect())
}

fn unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let g = gaussian(rng, dim);
        let n = g.norm();
        if n > 1e-12 {
            return g.scale(1.0 / n);
        }
    }
}

/// Sort-and-threshold projection onto `{x >= 0 : sum(x) = scale}`.
fn project_simplex(x: &Vector, scale: f64) -> Vector {
    let mut sorted = x.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - scale) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Vector::from_raw(x.iter().map(|&v| (v - theta).max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn unit_box() -> ConvexSet {
        ConvexSet::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn box_clamps_componentwise() {
        let y = unit_box().project(&v(&[2.0, -1.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn box_face_points_stay_on_the_face() {
        let y = unit_box().project(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn ball_scales_radially() {
        let ball = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let y = ball.project(&v(&[3.0, 4.0])).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn simplex_symmetric_input() {
        let s = ConvexSet::simplex(2, 1.0).unwrap();
        let y = s.project(&v(&[1.0, 1.0])).unwrap();
        assert_eq!(y.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn simplex_three_dim_drops_negative_coordinate() {
        // Support {1,2}: theta = (0.9 + 0.3 - 1) / 2 = 0.1, and -0.5 <= theta.
        let s = ConvexSet::simplex(3, 1.0).unwrap();
        let y = s.project(&v(&[0.9, 0.3, -0.5])).unwrap();
        let expected = [0.8, 0.2, 0.0];
        for i in 0..3 {
            assert!((y[i] - expected[i]).abs() < 1e-12, "{y:?}");
        }
    }

    #[test]
    fn halfspace_and_hyperplane() {
        let h = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(h.project(&v(&[2.0, 3.0])).unwrap().as_slice(), &[0.0, 3.0]);
        assert_eq!(h.project(&v(&[-2.0, 3.0])).unwrap().as_slice(), &[-2.0, 3.0]);
        let p = ConvexSet::hyperplane(v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!(p.project(&v(&[0.0, 0.0])).unwrap().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn contains_examples() {
        assert!(unit_box().contains(&v(&[0.5, 0.5]), 0.0).unwrap());
        let ball = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        assert!(ball.contains(&v(&[1.0, 1e-13]), 1e-9).unwrap());
        let h = ConvexSet::halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert!(!h.contains(&v(&[0.1, 0.0]), 0.0).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            unit_box().project(&v(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(unit_box().contains(&v(&[1.0]), 0.0).is_err());
        let err = ConvexSet::ball(Vector::zeros(2), -1.0).unwrap_err();
        assert!(err.to_string().contains("set.radius"));
        assert!(ConvexSet::boxed(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConvexSet::halfspace(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(ConvexSet::simplex(2, 0.0).is_err());
    }

    #[test]
    fn samples_are_members_and_deterministic() {
        let sets = [
            unit_box(),
            ConvexSet::simplex(3, 1.0).unwrap(),
            ConvexSet::ball(v(&[1.0, -1.0]), 2.0).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConvexSet::hyperplane(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConvexSet::whole_space(2).unwrap(),
        ];
        for set in &sets {
            let pts = set.support_sample(7, 50).unwrap();
            assert_eq!(pts.len(), 50);
            for p in &pts {
                assert!(set.contains(p, 1e-12).unwrap(), "{set:?} {p:?}");
            }
            assert_eq!(pts, set.support_sample(7, 50).unwrap());
        }
        assert!(unit_box().support_sample(1, 0).is_err());
    }

    #[test]
    fn simplex_samples_sum_to_scale() {
        let s = ConvexSet::simplex(4, 2.5).unwrap();
        for p in s.support_sample(3, 100).unwrap() {
            assert!(p.iter().all(|&c| c >= 0.0));
            assert!((p.iter().sum::<f64>() - 2.5).abs() <= 1e-12);
        }
    }
}

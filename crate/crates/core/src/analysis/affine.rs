//! Affine subspaces and quadratic minimization on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative rank threshold for singular values and eigenvalues.
const RANK_TOL: f64 = 1e-10;

/// `{point + basis * z}`; `basis` has orthonormal columns (possibly none).
#[derive(Debug, Clone)]
pub(crate) struct Affine {
    pub point: DVector<f64>,
    pub basis: DMatrix<f64>,
}

impl Affine {
    pub fn whole(dim: usize) -> Self {
        Affine {
            point: DVector::zeros(dim),
            basis: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection onto the affine set.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let offset = x - &self.point;
        &self.point + &self.basis * (self.basis.transpose() * offset)
    }
}

/// Solution set of `c x = rhs`, or `None` if the system is inconsistent.
pub(crate) fn solve_linear(c: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<Affine> {
    let d = c.ncols();
    if c.nrows() == 0 {
        return Some(Affine::whole(d));
    }
    // Pad to at least d rows so the SVD yields a full right basis.
    let rows = c.nrows().max(d);
    let mut padded = DMatrix::zeros(rows, d);
    padded.view_mut((0, 0), (c.nrows(), d)).copy_from(c);
    let mut rhs_padded = DVector::zeros(rows);
    rhs_padded.rows_mut(0, c.nrows()).copy_from(rhs);

    let svd = padded.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd.singular_values.max();
    let tol = RANK_TOL * sigma_max.max(1.0);

    let mut point = DVector::zeros(d);
    let mut null = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let v = v_t.row(i).transpose();
        if s > tol {
            point += &v * (u.column(i).dot(&rhs_padded) / s);
        } else {
            null.push(v);
        }
    }
    let residual = (c * &point - rhs).norm();
    if residual > 1e-9 * (1.0 + rhs.norm()) {
        return None;
    }
    let basis = if null.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&null)
    };
    Some(Affine { point, basis })
}

/// Minimizers of `0.5 x'Ax - b'x` over `aff`, as an affine set; `None` when the
/// quadratic is unbounded below there.
pub(crate) fn minimize_on(aff: &Affine, a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Affine> {
    let k = aff.dim();
    if k == 0 {
        return Some(aff.clone());
    }
    let n = &aff.basis;
    let h = n.transpose() * a * n;
    let h = (&h + h.transpose()) * 0.5;
    let ap = a * &aff.point;
    let g = n.transpose() * (&ap - b);
    let eig = SymmetricEigen::new(h);
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let tol = RANK_TOL * lam_max.max(a.norm()).max(1e-300);
    let g_tol = 1e-9 * (1.0 + ap.norm() + b.norm());

    let mut z = DVector::zeros(k);
    let mut flat = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let w = eig.eigenvectors.column(i);
        let gw = w.dot(&g);
        if lam > tol {
            z -= w * (gw / lam);
        } else if gw.abs() > g_tol {
            return None;
        } else {
            flat.push(n * w);
        }
    }
    let basis = if flat.is_empty() {
        DMatrix::zeros(aff.point.len(), 0)
    } else {
        DMatrix::from_columns(&flat)
    };
    Some(Affine {
        point: &aff.point + n * z,
        basis,
    })
}

/// Minimizer of `0.5 x'Ax - b'x` over the ball `|x - center| <= radius`,
/// for positive definite `A`, or for semidefinite `A` when no unconstrained
/// minimizer lies in the ball.
///
/// When the constraint binds, `x(mu) = center + (A + mu I)^{-1} (b - A center)`
/// with `|x(mu) - center| = radius`, found by bisection on `mu > 0`.
pub(crate) fn ball_boundary_minimizer(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    center: &DVector<f64>,
    radius: f64,
) -> DVector<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let w = b - a * center;
    let coeffs: Vec<f64> = (0..w.len())
        .map(|i| eig.eigenvectors.column(i).dot(&w))
        .collect();
    let offset_norm = |mu: f64| -> f64 {
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, l)| (c / (l.max(0.0) + mu)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (mut lo, mut hi) = (0.0, w.norm() / radius);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if offset_norm(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = hi;
    let mut x = center.clone();
    for (i, c) in coeffs.iter().enumerate() {
        x += eig.eigenvectors.column(i) * (c / (eig.eigenvalues[i].max(0.0) + mu));
    }
    // Land exactly on the sphere.
    let off = &x - center;
    let norm = off.norm();
    if norm > 0.0 {
        center + off * (radius / norm)
    } else {
        x
    }
}

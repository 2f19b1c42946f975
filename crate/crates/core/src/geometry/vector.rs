use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense point or direction in finite-dimensional real space.
///
/// Construction through [`Vector::new`] rejects empty inputs and non-finite
/// entries. Arithmetic helpers do not re-check finiteness; iteration code calls
/// [`Vector::is_finite`] where overflow is possible.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("vector", "dimension must be at least 1"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector components".into()));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![value; dim])
    }

    /// Skips validation; callers guarantee a non-empty buffer.
    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty());
        Vector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self + factor * other`
    pub fn axpy(&self, factor: f64, other: &Vector) -> Vector {
        self.zip_map(other, |a, b| a + factor * b)
    }

    pub(crate) fn axpy_in_place(&mut self, factor: f64, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Vector::new(vec![]).is_err());
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn basic_arithmetic() {
        let a = Vector::new(vec![3.0, 4.0]).unwrap();
        let b = Vector::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.dot(&b), -1.0);
        assert_eq!(a.axpy(2.0, &b).as_slice(), &[5.0, 2.0]);
        assert_eq!(a.sub(&b).as_slice(), &[2.0, 5.0]);
        assert_eq!(a.distance(&b), (4.0f64 + 25.0).sqrt());
    }

    #[test]
    fn serde_goes_through_validation() {
        let v: Vector = serde_json::from_str("[1.0, 2.0]").unwrap();
        assert_eq!(v.dim(), 2);
        assert!(serde_json::from_str::<Vector>("[]").is_err());
    }
}

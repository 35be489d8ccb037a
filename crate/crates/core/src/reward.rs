use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Per-objective return vector. The length is fixed at construction and
/// every binary operation requires both operands to share it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(components: Vec<f64>) -> Self {
        RewardVector(components)
    }

    pub fn zeros(n: usize) -> Self {
        RewardVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::input(format!(
                "reward vector has {} components, expected {n}",
                self.0.len()
            )))
        }
    }

    /// `self += rate * (target - self)`, the exponential-average step used by
    /// every tabular estimate in this crate.
    pub fn move_toward(&mut self, target: &RewardVector, rate: f64) {
        debug_assert_eq!(self.len(), target.len());
        for (x, t) in self.0.iter_mut().zip(&target.0) {
            *x += rate * (t - *x);
        }
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, other: &RewardVector, scale: f64) {
        debug_assert_eq!(self.len(), other.len());
        for (x, o) in self.0.iter_mut().zip(&other.0) {
            *x += scale * o;
        }
    }
}

impl From<Vec<f64>> for RewardVector {
    fn from(v: Vec<f64>) -> Self {
        RewardVector(v)
    }
}

impl<const N: usize> From<[f64; N]> for RewardVector {
    fn from(v: [f64; N]) -> Self {
        RewardVector(v.to_vec())
    }
}

impl Index<usize> for RewardVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &RewardVector {
    type Output = RewardVector;

    fn add(self, rhs: &RewardVector) -> RewardVector {
        assert_eq!(self.len(), rhs.len(), "reward vector length mismatch");
        RewardVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RewardVector {
    type Output = RewardVector;

    fn sub(self, rhs: &RewardVector) -> RewardVector {
        assert_eq!(self.len(), rhs.len(), "reward vector length mismatch");
        RewardVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &RewardVector {
    type Output = RewardVector;

    fn mul(self, rhs: f64) -> RewardVector {
        RewardVector(self.0.iter().map(|a| a * rhs).collect())
    }
}

impl AddAssign<&RewardVector> for RewardVector {
    fn add_assign(&mut self, rhs: &RewardVector) {
        assert_eq!(self.len(), rhs.len(), "reward vector length mismatch");
        for (x, o) in self.0.iter_mut().zip(&rhs.0) {
            *x += o;
        }
    }
}

impl fmt::Display for RewardVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

//! Class-probability vectors and the softmax that produces them.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::uniform_index;
use crate::scalar::{lit, Scalar};

/// Tolerance on `|sum - 1|` accepted by [`ProbVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-6;

/// A length-C probability distribution over classes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector<T> {
    probs: Vec<T>,
}

impl<T: Scalar> ProbVector<T> {
    /// Validates non-negativity, finiteness and unit sum.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbVector("empty".into()));
        }
        let mut sum = 0.0f64;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < T::zero() {
                return Err(Error::InvalidProbVector(format!("entry {i} = {p}")));
            }
            sum += p.to_f64_lossy();
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbVector(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(num_classes: usize) -> Self {
        assert!(num_classes > 0);
        let p = T::one() / T::from_usize_lossy(num_classes);
        Self {
            probs: vec![p; num_classes],
        }
    }

    pub fn point_mass(num_classes: usize, class: usize) -> Self {
        assert!(class < num_classes);
        let mut probs = vec![T::zero(); num_classes];
        probs[class] = T::one();
        Self { probs }
    }

    /// Numerically stable softmax of `logits`.
    pub fn from_logits(logits: &[T]) -> Self {
        let mut probs = logits.to_vec();
        softmax_in_place(&mut probs);
        Self { probs }
    }

    /// Normalizes non-negative masses. An all-zero mass vector maps to uniform.
    pub fn from_masses(masses: Vec<T>) -> Self {
        let total: T = masses.iter().copied().sum();
        if total <= T::zero() || !total.is_finite() {
            return Self::uniform(masses.len());
        }
        Self {
            probs: masses.into_iter().map(|m| m / total).collect(),
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn into_inner(self) -> Vec<T> {
        self.probs
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, class: usize) -> T {
        self.probs[class]
    }

    pub fn max(&self) -> T {
        self.probs
            .iter()
            .copied()
            .fold(T::neg_infinity(), |a, b| if b > a { b } else { a })
    }

    /// The two largest entries `(p1, p2)` with `p1 >= p2`. Requires `C >= 2`.
    pub fn top_two(&self) -> Result<(T, T)> {
        if self.probs.len() < 2 {
            return Err(Error::invalid("top-two gap needs at least two classes"));
        }
        let (mut p1, mut p2) = (T::neg_infinity(), T::neg_infinity());
        for &p in &self.probs {
            if p > p1 {
                p2 = p1;
                p1 = p;
            } else if p > p2 {
                p2 = p;
            }
        }
        Ok((p1, p2))
    }

    /// All classes attaining the maximum probability, in ascending order.
    pub fn argmax_set(&self) -> Vec<usize> {
        let m = self.max();
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == m)
            .map(|(i, _)| i)
            .collect()
    }

    /// Argmax with exact ties broken uniformly at random.
    pub fn argmax_with<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let ties = self.argmax_set();
        ties[uniform_index(rng, ties.len())]
    }

    pub fn is_valid(&self) -> bool {
        Self::new(self.probs.clone()).is_ok()
    }
}

pub fn softmax_in_place<T: Scalar>(values: &mut [T]) {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    let mut total = T::zero();
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
}

/// Cross-entropy `-ln p_y`, floored to avoid infinities at exact zeros.
pub fn cross_entropy<T: Scalar>(p: &ProbVector<T>, y: usize) -> T {
    let floor = lit::<T>(1e-300).max(T::min_positive_value());
    -p.get(y).max(floor).ln()
}

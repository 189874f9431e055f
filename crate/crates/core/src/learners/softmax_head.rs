use rand::Rng;

use crate::error::{Error, Result};
use crate::pool::Row;
use crate::prob::{cross_entropy, ProbVector};
use crate::rng::EpisodeRng;
use crate::scalar::Scalar;

use super::{check_dim, Differentiable, Learner};

/// Linear softmax classifier over `[x; 1]` trained by per-example SGD on
/// cross-entropy. Used as the trainable head over frozen embeddings.
#[derive(Clone, Debug)]
pub struct SoftmaxHead<T> {
    dim: usize,
    num_classes: usize,
    learning_rate: T,
    /// `num_classes` rows of `dim + 1` weights, bias last.
    weights: Vec<T>,
    initial: Vec<T>,
}

impl<T: Scalar> SoftmaxHead<T> {
    /// Zero-initialized head; its cold output is uniform.
    pub fn new(dim: usize, num_classes: usize, learning_rate: T) -> Self {
        let weights = vec![T::zero(); num_classes * (dim + 1)];
        Self {
            dim,
            num_classes,
            learning_rate,
            initial: weights.clone(),
            weights,
        }
    }

    /// Weights drawn uniformly from `[-scale, scale]`; `scale = 0` is zero init.
    pub fn with_random_init(dim: usize, num_classes: usize, learning_rate: T, scale: T, rng: &mut EpisodeRng) -> Self {
        let mut head = Self::new(dim, num_classes, learning_rate);
        if scale > T::zero() {
            let s = scale.to_f64_lossy();
            for w in head.weights.iter_mut() {
                *w = T::from_f64_lossy(rng.random_range(-s..=s));
            }
            head.initial = head.weights.clone();
        }
        head
    }

    fn logits(&self, x: Row<'_, T>) -> Vec<T> {
        let w = self.dim + 1;
        (0..self.num_classes)
            .map(|c| {
                let row = &self.weights[c * w..(c + 1) * w];
                x.dot(row) + row[self.dim]
            })
            .collect()
    }

    /// One SGD step `w += lr (onehot(y) - p) [x;1]^T`.
    pub fn step(&mut self, x: Row<'_, T>, y: usize) -> Result<()> {
        check_dim(self.dim, x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite("softmax head input".into()));
        }
        if y >= self.num_classes {
            return Err(Error::invalid(format!("class {y} outside [0, {})", self.num_classes)));
        }
        self.apply_step(x, y);
        Ok(())
    }

    fn apply_step(&mut self, x: Row<'_, T>, y: usize) {
        let p = ProbVector::from_logits(&self.logits(x));
        let w = self.dim + 1;
        for c in 0..self.num_classes {
            let target = if c == y { T::one() } else { T::zero() };
            let coeff = self.learning_rate * (target - p.get(c));
            if coeff == T::zero() {
                continue;
            }
            let row = &mut self.weights[c * w..(c + 1) * w];
            x.add_scaled_to(coeff, row);
            row[self.dim] += coeff;
        }
    }
}

impl<T: Scalar> Learner<T> for SoftmaxHead<T> {
    fn name(&self) -> &'static str {
        "softmax_head"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, x: Row<'_, T>) -> ProbVector<T> {
        ProbVector::from_logits(&self.logits(x))
    }

    fn observe(&mut self, x: Row<'_, T>, y: usize) {
        self.apply_step(x, y);
    }

    fn reset(&mut self) {
        self.weights.clone_from(&self.initial);
    }

    fn parameters(&self) -> Vec<T> {
        self.weights.clone()
    }
}

impl<T: Scalar> Differentiable<T> for SoftmaxHead<T> {
    fn set_parameters(&mut self, params: &[T]) -> Result<()> {
        check_dim(self.weights.len(), params.len())?;
        self.weights.copy_from_slice(params);
        Ok(())
    }

    fn loss(&self, x: Row<'_, T>, y: usize) -> T {
        cross_entropy(&self.predict_proba(x), y)
    }

    fn gradient(&self, x: Row<'_, T>, y: usize) -> Vec<T> {
        let p = self.predict_proba(x);
        let w = self.dim + 1;
        let mut grad = vec![T::zero(); self.weights.len()];
        for c in 0..self.num_classes {
            let target = if c == y { T::one() } else { T::zero() };
            let coeff = p.get(c) - target;
            let row = &mut grad[c * w..(c + 1) * w];
            x.add_scaled_to(coeff, row);
            row[self.dim] = coeff;
        }
        grad
    }
}

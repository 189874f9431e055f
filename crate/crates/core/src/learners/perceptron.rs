use crate::error::Result;
use crate::pool::Row;
use crate::prob::ProbVector;
use crate::scalar::Scalar;

use super::{check_dim, Learner};

/// Multiclass Perceptron: one score row per class over `[x; 1]`, with the paired
/// promote/demote update applied only on mistakes.
///
/// For the update rule a tie for the top score counts as a mistake, so training is
/// deterministic and every protocol-level mistake triggers an update.
#[derive(Clone, Debug)]
pub struct Perceptron<T> {
    dim: usize,
    num_classes: usize,
    bias: bool,
    learning_rate: T,
    /// `num_classes` rows of `dim + bias` weights.
    weights: Vec<T>,
    updates: usize,
}

impl<T: Scalar> Perceptron<T> {
    pub fn new(dim: usize, num_classes: usize, learning_rate: T, bias: bool) -> Self {
        let width = dim + usize::from(bias);
        Self {
            dim,
            num_classes,
            bias,
            learning_rate,
            weights: vec![T::zero(); num_classes * width],
            updates: 0,
        }
    }

    fn width(&self) -> usize {
        self.dim + usize::from(self.bias)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Row of class `c`, bias last when enabled.
    pub fn class_weights(&self, c: usize) -> &[T] {
        let w = self.width();
        &self.weights[c * w..(c + 1) * w]
    }

    pub fn set_weights(&mut self, weights: Vec<T>) -> Result<()> {
        check_dim(self.weights.len(), weights.len())?;
        self.weights = weights;
        Ok(())
    }

    /// Number of mistake-driven updates applied so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn scores(&self, x: Row<'_, T>) -> Vec<T> {
        let w = self.width();
        (0..self.num_classes)
            .map(|c| {
                let row = &self.weights[c * w..(c + 1) * w];
                let s = x.dot(row);
                if self.bias {
                    s + row[self.dim]
                } else {
                    s
                }
            })
            .collect()
    }

    /// The class the update rule competes against: `y` itself if it strictly beats
    /// every other class, else the best-scoring other class (lowest index on ties).
    pub fn training_prediction(&self, x: Row<'_, T>, y: usize) -> usize {
        let scores = self.scores(x);
        let mut rival = None;
        for (c, &s) in scores.iter().enumerate() {
            if c != y && rival.is_none_or(|r: usize| s > scores[r]) {
                rival = Some(c);
            }
        }
        match rival {
            Some(r) if scores[r] >= scores[y] => r,
            _ => y,
        }
    }

    /// Applies the mistake-driven rule for a known prediction: on `predicted != y`,
    /// `w_y += lr [x;1]` and `w_predicted -= lr [x;1]`.
    pub fn update_with_prediction(&mut self, x: Row<'_, T>, y: usize, predicted: usize) {
        if predicted == y {
            return;
        }
        let w = self.width();
        let lr = self.learning_rate;
        x.add_scaled_to(lr, &mut self.weights[y * w..(y + 1) * w]);
        x.add_scaled_to(-lr, &mut self.weights[predicted * w..(predicted + 1) * w]);
        if self.bias {
            self.weights[y * w + self.dim] += lr;
            self.weights[predicted * w + self.dim] -= lr;
        }
        self.updates += 1;
    }
}

impl<T: Scalar> Learner<T> for Perceptron<T> {
    fn name(&self) -> &'static str {
        "perceptron"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, x: Row<'_, T>) -> ProbVector<T> {
        ProbVector::from_logits(&self.scores(x))
    }

    fn observe(&mut self, x: Row<'_, T>, y: usize) {
        let predicted = self.training_prediction(x, y);
        self.update_with_prediction(x, y, predicted);
    }

    fn reset(&mut self) {
        self.weights.iter_mut().for_each(|w| *w = T::zero());
        self.updates = 0;
    }

    fn parameters(&self) -> Vec<T> {
        self.weights.clone()
    }
}

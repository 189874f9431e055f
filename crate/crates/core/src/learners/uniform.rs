use crate::pool::Row;
use crate::prob::ProbVector;
use crate::scalar::Scalar;

use super::Learner;

/// Always predicts the uniform distribution, so every prediction is a uniform
/// random guess after tie-breaking. The random-guess reference learner.
#[derive(Clone, Debug)]
pub struct UniformGuesser {
    dim: usize,
    num_classes: usize,
}

impl UniformGuesser {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        Self { dim, num_classes }
    }
}

impl<T: Scalar> Learner<T> for UniformGuesser {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, _x: Row<'_, T>) -> ProbVector<T> {
        ProbVector::uniform(self.num_classes)
    }

    fn observe(&mut self, _x: Row<'_, T>, _y: usize) {}

    fn reset(&mut self) {}

    fn parameters(&self) -> Vec<T> {
        Vec::new()
    }
}

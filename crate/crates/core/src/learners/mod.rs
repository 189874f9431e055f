//! Incremental classifiers driven by the protocol loop.
//!
//! Every learner emits a [`ProbVector`] for any row, including before it has seen a
//! single label (the cold output is uniform for all built-in learners), absorbs
//! labels one at a time through [`Learner::observe`], and can be refit on a set of
//! revealed examples through [`Learner::fit_batch`].

mod knn;
mod mlp;
mod perceptron;
mod softmax_head;
mod uniform;

pub use knn::Knn;
pub use mlp::Mlp;
pub use perceptron::Perceptron;
pub use softmax_head::SoftmaxHead;
pub use uniform::UniformGuesser;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{Pool, Row};
use crate::prob::ProbVector;
use crate::rng::EpisodeRng;
use crate::scalar::Scalar;

pub trait Learner<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn dim(&self) -> usize;

    fn num_classes(&self) -> usize;

    fn predict_proba(&self, x: Row<'_, T>) -> ProbVector<T>;

    /// Absorbs one labeled example.
    fn observe(&mut self, x: Row<'_, T>, y: usize);

    /// Restores the trainable state captured at construction.
    fn reset(&mut self);

    /// Trainable parameters, flattened. Empty for memory-based learners.
    fn parameters(&self) -> Vec<T>;

    /// Refits on `examples` (pool ids). With `reset`, starts from the initial state.
    /// Runs `epochs` passes of [`Learner::observe`], each over a fresh shuffle.
    fn fit_batch(
        &mut self,
        pool: &Pool<T>,
        examples: &[usize],
        epochs: usize,
        reset: bool,
        rng: &mut EpisodeRng,
    ) -> Result<()> {
        if examples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if epochs == 0 {
            return Err(Error::invalid("epochs per batch must be at least 1"));
        }
        if reset {
            self.reset();
        }
        let mut order = examples.to_vec();
        for _ in 0..epochs {
            order.shuffle(rng);
            for &id in &order {
                self.observe(pool.row(id), pool.label(id));
            }
        }
        Ok(())
    }
}

/// Learners trained by gradient descent on cross-entropy, exposing their gradient
/// so it can be checked against finite differences.
pub trait Differentiable<T: Scalar> {
    fn set_parameters(&mut self, params: &[T]) -> Result<()>;

    /// `-ln p_y(x)` at the current parameters.
    fn loss(&self, x: Row<'_, T>, y: usize) -> T;

    /// Gradient of [`Differentiable::loss`] with respect to [`Learner::parameters`].
    fn gradient(&self, x: Row<'_, T>, y: usize) -> Vec<T>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Uniform,
    Perceptron,
    Knn,
    SoftmaxHead,
    Mlp,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::Uniform,
        LearnerKind::Perceptron,
        LearnerKind::Knn,
        LearnerKind::SoftmaxHead,
        LearnerKind::Mlp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerKind::Uniform => "uniform",
            LearnerKind::Perceptron => "perceptron",
            LearnerKind::Knn => "knn",
            LearnerKind::SoftmaxHead => "softmax_head",
            LearnerKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown learner `{s}`")))
    }
}

/// Hyperparameters for building a learner. Fields irrelevant to a kind are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Neighbors for k-NN.
    pub k: usize,
    /// Hidden width for the MLP.
    pub hidden: usize,
    /// Learning rate; `None` picks the per-kind default.
    pub lr: Option<f64>,
    /// Inverse-distance floor for k-NN votes.
    pub epsilon: f64,
    /// Scale of the initial uniform draw for the softmax head (0 = zero init).
    pub init_scale: f64,
    /// Whether the Perceptron appends a constant bias feature.
    pub bias: bool,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        Self {
            kind,
            k: 7,
            hidden: 128,
            lr: None,
            epsilon: 1e-8,
            init_scale: 0.0,
            bias: true,
        }
    }

    pub fn default_lr(kind: LearnerKind) -> f64 {
        match kind {
            LearnerKind::Perceptron => 1.0,
            LearnerKind::SoftmaxHead => 0.1,
            LearnerKind::Mlp => 0.01,
            LearnerKind::Uniform | LearnerKind::Knn => 0.0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr.unwrap_or_else(|| Self::default_lr(self.kind))
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            LearnerKind::Knn if self.k == 0 => Err(Error::invalid("learner.k must be at least 1")),
            LearnerKind::Knn if self.epsilon.is_nan() || self.epsilon <= 0.0 => {
                Err(Error::invalid("learner.epsilon must be positive"))
            }
            LearnerKind::Mlp if self.hidden == 0 => Err(Error::invalid("learner.hidden must be at least 1")),
            LearnerKind::Perceptron | LearnerKind::SoftmaxHead | LearnerKind::Mlp
                if !(self.learning_rate() > 0.0 && self.learning_rate().is_finite()) =>
            {
                Err(Error::invalid("learner.lr must be positive and finite"))
            }
            _ => Ok(()),
        }
    }

    /// Fresh learner for `dim` features and `num_classes` classes; random draws come from `init_rng`.
    pub fn build<T: Scalar>(
        &self,
        dim: usize,
        num_classes: usize,
        init_rng: &mut EpisodeRng,
    ) -> Result<Box<dyn Learner<T>>> {
        self.validate()?;
        if dim == 0 || num_classes == 0 {
            return Err(Error::invalid("learner needs positive dimension and class count"));
        }
        let lr = T::from_f64_lossy(self.learning_rate());
        Ok(match self.kind {
            LearnerKind::Uniform => Box::new(UniformGuesser::new(dim, num_classes)),
            LearnerKind::Perceptron => Box::new(Perceptron::new(dim, num_classes, lr, self.bias)),
            LearnerKind::Knn => Box::new(Knn::new(dim, num_classes, self.k, T::from_f64_lossy(self.epsilon))),
            LearnerKind::SoftmaxHead => Box::new(SoftmaxHead::with_random_init(
                dim,
                num_classes,
                lr,
                T::from_f64_lossy(self.init_scale),
                init_rng,
            )),
            LearnerKind::Mlp => Box::new(Mlp::new(dim, self.hidden, num_classes, lr, init_rng)),
        })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};

    #[test]
    fn every_kind_predicts_uniform_when_cold() {
        let x = [0.3f64, -1.0, 2.0];
        for kind in LearnerKind::ALL {
            let mut rng = SeedStreams::new(0).rng(Stream::LearnerInit);
            let learner = LearnerSpec::new(kind).build::<f64>(3, 4, &mut rng).unwrap();
            let p = learner.predict_proba(Row::Dense(&x));
            assert!(p.is_valid(), "{kind}");
            for &v in p.as_slice() {
                assert!((v - 0.25).abs() < 1e-12, "{kind}: {p:?}");
            }
        }
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for kind in LearnerKind::ALL {
            assert_eq!(kind.as_str().parse::<LearnerKind>().unwrap(), kind);
        }
        assert!("cnn".parse::<LearnerKind>().is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = LearnerSpec::new(LearnerKind::Knn);
        s.k = 0;
        assert!(s.validate().is_err());
        let mut s = LearnerSpec::new(LearnerKind::SoftmaxHead);
        s.lr = Some(-1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn fit_batch_rejects_empty_input() {
        let pool = Pool::from_dense(1, vec![1.0f64], vec![0], 2).unwrap();
        let mut p = Perceptron::<f64>::new(1, 2, 1.0, true);
        let mut rng = SeedStreams::new(0).rng(Stream::LearnerShuffle);
        assert!(matches!(
            p.fit_batch(&pool, &[], 1, false, &mut rng),
            Err(Error::EmptyBatch)
        ));
        assert!(p.fit_batch(&pool, &[0], 0, false, &mut rng).is_err());
    }
}

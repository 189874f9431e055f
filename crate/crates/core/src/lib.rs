//! Guess-and-Learn cold-start benchmark engine.
//!
//! A learner starts with zero labels, repeatedly picks an unlabeled instance from a
//! fixed pool, must predict its class, sees the true label, and updates on a fixed
//! schedule. The benchmark metric is the cumulative number of wrong predictions.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below name
//! the concrete instantiations.

pub mod acquisition;
pub mod data;
pub mod error;
pub mod learners;
pub mod oracle;
pub mod pool;
pub mod prob;
pub mod protocol;
pub mod report;
pub mod rng;
pub mod scalar;

pub use acquisition::Strategy;
pub use error::{Error, Result};
pub use learners::{Learner, LearnerKind, LearnerSpec};
pub use protocol::{
    cumulative_error, run_episode, run_episode_with, Initialization, ResetPolicy, Schedule, StepRecord, Timing,
    TrackConfig, Trajectory, UpdateMode,
};
pub use rng::{SeedStreams, Stream};
pub use scalar::Scalar;

pub type Pool32 = pool::Pool<f32>;
pub type Pool64 = pool::Pool<f64>;
pub type ProbVector32 = prob::ProbVector<f32>;
pub type ProbVector64 = prob::ProbVector<f64>;
pub type Perceptron32 = learners::Perceptron<f32>;
pub type Perceptron64 = learners::Perceptron<f64>;
pub type Knn32 = learners::Knn<f32>;
pub type Knn64 = learners::Knn<f64>;
pub type SoftmaxHead32 = learners::SoftmaxHead<f32>;
pub type SoftmaxHead64 = learners::SoftmaxHead<f64>;
pub type Mlp32 = learners::Mlp<f32>;
pub type Mlp64 = learners::Mlp<f64>;

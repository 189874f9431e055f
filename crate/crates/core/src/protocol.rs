//! The select → predict → reveal → update loop, track semantics, and the analytic
//! reference quantities used to read its error trajectories.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acquisition::{self, Strategy};
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::pool::Pool;
use crate::rng::{SeedStreams, Stream};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initialization {
    Scratch,
    /// Features come from a frozen pretrained extractor; only a new head is trained.
    #[serde(alias = "pretrained")]
    PretrainedFeatures,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Online,
    Batch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetPolicy {
    CarryForward,
    /// Restore the initial trainable parameters before every batch fit.
    ResetEachBatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub mode: UpdateMode,
    /// Batch size: 1 for online, greater than 1 for batch.
    pub k: usize,
}

impl Schedule {
    pub fn online() -> Self {
        Self {
            mode: UpdateMode::Online,
            k: 1,
        }
    }

    pub fn batch(k: usize) -> Self {
        Self {
            mode: UpdateMode::Batch,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            UpdateMode::Online if self.k != 1 => Err(Error::InvalidTrack(format!(
                "online schedule requires K = 1, got {}",
                self.k
            ))),
            UpdateMode::Batch if self.k <= 1 => Err(Error::InvalidTrack(format!(
                "batch schedule requires K > 1, got {}",
                self.k
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrackConfig {
    pub initialization: Initialization,
    pub schedule: Schedule,
    pub reset_policy: ResetPolicy,
    /// Shuffled passes over the labeled history per batch fit.
    pub epochs_per_batch: usize,
}

impl TrackConfig {
    pub fn new(initialization: Initialization, schedule: Schedule, reset_policy: ResetPolicy) -> Self {
        Self {
            initialization,
            schedule,
            reset_policy,
            epochs_per_batch: 1,
        }
    }

    pub fn scratch_online() -> Self {
        Self::new(Initialization::Scratch, Schedule::online(), ResetPolicy::CarryForward)
    }

    pub fn scratch_batch(k: usize) -> Self {
        Self::new(Initialization::Scratch, Schedule::batch(k), ResetPolicy::CarryForward)
    }

    pub fn pretrained_online() -> Self {
        Self::new(
            Initialization::PretrainedFeatures,
            Schedule::online(),
            ResetPolicy::CarryForward,
        )
    }

    pub fn pretrained_batch(k: usize) -> Self {
        Self::new(
            Initialization::PretrainedFeatures,
            Schedule::batch(k),
            ResetPolicy::CarryForward,
        )
    }

    pub fn with_reset(mut self, reset_policy: ResetPolicy) -> Self {
        self.reset_policy = reset_policy;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs_per_batch = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.reset_policy == ResetPolicy::ResetEachBatch && self.schedule.mode == UpdateMode::Online {
            return Err(Error::InvalidTrack("reset-each-batch requires a batch schedule".into()));
        }
        if self.epochs_per_batch == 0 {
            return Err(Error::InvalidTrack("epochs per batch must be at least 1".into()));
        }
        Ok(())
    }

    /// Two-letter track code: SO, SB, PO or PB.
    pub fn code(&self) -> &'static str {
        match (self.initialization, self.schedule.mode) {
            (Initialization::Scratch, UpdateMode::Online) => "SO",
            (Initialization::Scratch, UpdateMode::Batch) => "SB",
            (Initialization::PretrainedFeatures, UpdateMode::Online) => "PO",
            (Initialization::PretrainedFeatures, UpdateMode::Batch) => "PB",
        }
    }
}

/// Compact identifier: `SO`, `SB50`, `PB50-reset`, with `-e3` when epochs > 1.
impl fmt::Display for TrackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())?;
        if self.schedule.mode == UpdateMode::Batch {
            write!(f, "{}", self.schedule.k)?;
        }
        if self.reset_policy == ResetPolicy::ResetEachBatch {
            f.write_str("-reset")?;
        }
        if self.epochs_per_batch > 1 {
            write!(f, "-e{}", self.epochs_per_batch)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub instance_id: usize,
    pub predicted: usize,
    pub truth: usize,
    pub correct: bool,
    /// Mistakes over steps `1..=step`.
    pub cumulative_error: usize,
    /// Wall-clock seconds since episode start, sampled after the step's update.
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub seed: u64,
    pub track: TrackConfig,
    pub strategy: Strategy,
    pub learner: String,
    /// Number of batch fits performed (0 for online tracks).
    pub batch_fits: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_error(&self) -> usize {
        self.records.last().map_or(0, |r| r.cumulative_error)
    }

    /// `E_t` for every step, in order.
    pub fn error_curve(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.cumulative_error).collect()
    }

    /// Checks the per-step accounting invariants.
    pub fn validate(&self) -> Result<()> {
        let mut prev = 0usize;
        let mut seen = vec![false; self.records.len()];
        for (i, r) in self.records.iter().enumerate() {
            let bad = |what: &str| Err(Error::invalid(format!("record {}: {what}", i + 1)));
            if r.step != i + 1 {
                return bad("non-consecutive step index");
            }
            if r.correct != (r.predicted == r.truth) {
                return bad("correct flag disagrees with prediction");
            }
            if r.cumulative_error != prev + usize::from(!r.correct) {
                return bad("cumulative error does not accumulate mistakes");
            }
            match seen.get_mut(r.instance_id) {
                Some(s) if !*s => *s = true,
                _ => return bad("instance repeated or outside the pool"),
            }
            prev = r.cumulative_error;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    #[default]
    Wall,
    /// Record zero elapsed time, making trajectories byte-reproducible.
    Off,
}

/// Runs one full episode with wall-clock timing.
pub fn run_episode<T: Scalar>(
    pool: &Pool<T>,
    learner: &mut dyn Learner<T>,
    strategy: Strategy,
    track: &TrackConfig,
    seed: u64,
) -> Result<Trajectory> {
    run_episode_with(pool, learner, strategy, track, seed, Timing::Wall)
}

/// Runs the protocol until the pool is exhausted.
///
/// Each step selects an unlabeled instance, records the learner's mandatory
/// prediction (argmax, uniform tie-break), reveals the label, and updates:
/// immediately on online tracks, or once `K` labels are pending (or the pool runs
/// out) on batch tracks, refitting on every label revealed so far.
pub fn run_episode_with<T: Scalar>(
    pool: &Pool<T>,
    learner: &mut dyn Learner<T>,
    strategy: Strategy,
    track: &TrackConfig,
    seed: u64,
    timing: Timing,
) -> Result<Trajectory> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    track.validate()?;
    if learner.dim() != pool.dim() {
        return Err(Error::DimensionMismatch {
            expected: learner.dim(),
            found: pool.dim(),
        });
    }
    if learner.num_classes() != pool.num_classes() {
        return Err(Error::ClassCountMismatch {
            expected: learner.num_classes(),
            found: pool.num_classes(),
        });
    }

    let streams = SeedStreams::new(seed);
    let mut acquisition_rng = streams.rng(Stream::Acquisition);
    let mut prediction_rng = streams.rng(Stream::Prediction);
    let mut shuffle_rng = streams.rng(Stream::LearnerShuffle);

    let n = pool.len();
    let mut unlabeled: Vec<usize> = (0..n).collect();
    let mut labeled: Vec<usize> = Vec::with_capacity(n);
    let mut pending = 0usize;
    let mut batch_fits = 0usize;
    let mut cumulative_error = 0usize;
    let mut records = Vec::with_capacity(n);
    let start = Instant::now();

    for step in 1..=n {
        let id = acquisition::select(strategy, &unlabeled, pool, &*learner, &mut acquisition_rng)?;
        let pos = unlabeled
            .binary_search(&id)
            .map_err(|_| Error::invalid(format!("strategy returned labeled instance {id}")))?;
        unlabeled.remove(pos);

        let row = pool.row(id);
        let predicted = learner.predict_proba(row).argmax_with(&mut prediction_rng);
        let truth = pool.label(id);
        let correct = predicted == truth;
        cumulative_error += usize::from(!correct);
        labeled.push(id);

        match track.schedule.mode {
            UpdateMode::Online => learner.observe(row, truth),
            UpdateMode::Batch => {
                pending += 1;
                if pending == track.schedule.k || unlabeled.is_empty() {
                    let reset = track.reset_policy == ResetPolicy::ResetEachBatch;
                    learner.fit_batch(pool, &labeled, track.epochs_per_batch, reset, &mut shuffle_rng)?;
                    pending = 0;
                    batch_fits += 1;
                }
            }
        }

        let elapsed_seconds = match timing {
            Timing::Wall => start.elapsed().as_secs_f64(),
            Timing::Off => 0.0,
        };
        records.push(StepRecord {
            step,
            instance_id: id,
            predicted,
            truth,
            correct,
            cumulative_error,
            elapsed_seconds,
        });
    }

    Ok(Trajectory {
        records,
        seed,
        track: *track,
        strategy,
        learner: learner.name().to_string(),
        batch_fits,
    })
}

/// `E_t`: mistakes over the first `t` steps, folded from the records' correctness flags.
pub fn cumulative_error(trajectory: &Trajectory, t: usize) -> Result<usize> {
    let n = trajectory.len();
    if t == 0 || t > n {
        return Err(Error::StepOutOfRange { t, n });
    }
    Ok(trajectory.records[..t].iter().filter(|r| !r.correct).count())
}

/// Expected final error `N (1 - 1/C)` of uniform guessing over C balanced classes.
pub fn random_baseline_expectation(n: usize, num_classes: usize) -> Result<f64> {
    if num_classes < 2 {
        return Err(Error::invalid("random baseline needs at least two classes"));
    }
    Ok(n as f64 * (1.0 - 1.0 / num_classes as f64))
}

/// Existence floor: at least `C - 1` mistakes in the worst case.
pub fn existence_floor(num_classes: usize) -> usize {
    num_classes.saturating_sub(1)
}

/// Perceptron mistake bound `R² / γ²` for radius `R` and margin `γ`.
pub fn perceptron_mistake_bound<T: Scalar>(radius: T, gamma: T) -> Result<T> {
    if radius.is_nan() || gamma.is_nan() || radius <= T::zero() || gamma <= T::zero() {
        return Err(Error::invalid("mistake bound needs positive radius and margin"));
    }
    Ok((radius * radius) / (gamma * gamma))
}

/// The same bound evaluated at a guaranteed per-step minimum margin `γ_min`.
pub fn margin_aware_bound<T: Scalar>(radius: T, gamma_min: T) -> Result<T> {
    perceptron_mistake_bound(radius, gamma_min)
}

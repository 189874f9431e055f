//! Instance-selection strategies over the unlabeled pool.
//!
//! Scored strategies recompute the learner's probabilities for every unlabeled
//! candidate at every step, take the arg-best score, and break exact ties
//! uniformly with the acquisition stream.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::pool::Pool;
use crate::prob::ProbVector;
use crate::rng::{uniform_index, EpisodeRng};
use crate::scalar::Scalar;

/// Candidate counts at or above this are scored in parallel.
const PARALLEL_SCORING_THRESHOLD: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    /// Easy-first: largest top-class probability.
    Confidence,
    /// Smallest top-class probability.
    LeastConfidence,
    /// Smallest gap between the two most probable classes.
    Margin,
    /// Largest Shannon entropy.
    Entropy,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Random,
        Strategy::Confidence,
        Strategy::LeastConfidence,
        Strategy::Margin,
        Strategy::Entropy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Confidence => "confidence",
            Strategy::LeastConfidence => "least_confidence",
            Strategy::Margin => "margin",
            Strategy::Entropy => "entropy",
        }
    }

    /// Whether higher scores are preferred. `None` for [`Strategy::Random`].
    pub fn maximizes(&self) -> Option<bool> {
        match self {
            Strategy::Random => None,
            Strategy::Confidence | Strategy::Entropy => Some(true),
            Strategy::LeastConfidence | Strategy::Margin => Some(false),
        }
    }

    /// The strategy's score for one probability vector.
    pub fn score<T: Scalar>(&self, p: &ProbVector<T>) -> Result<T> {
        match self {
            Strategy::Random => Err(Error::invalid("random acquisition does not score candidates")),
            Strategy::Confidence => Ok(score_confidence(p)),
            Strategy::LeastConfidence => Ok(score_least_confidence(p)),
            Strategy::Margin => score_margin(p),
            Strategy::Entropy => Ok(score_entropy(p)),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredCandidate<T> {
    pub instance_id: usize,
    pub score: T,
}

pub fn score_confidence<T: Scalar>(p: &ProbVector<T>) -> T {
    p.max()
}

/// Same quantity as [`score_confidence`]; the strategy takes the argmin.
pub fn score_least_confidence<T: Scalar>(p: &ProbVector<T>) -> T {
    p.max()
}

/// `p(1) - p(2)` for the two largest entries.
pub fn score_margin<T: Scalar>(p: &ProbVector<T>) -> Result<T> {
    let (p1, p2) = p.top_two()?;
    Ok(p1 - p2)
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn score_entropy<T: Scalar>(p: &ProbVector<T>) -> T {
    p.as_slice()
        .iter()
        .filter(|&&q| q > T::zero())
        .fold(T::zero(), |acc, &q| acc - q * q.ln())
}

/// Picks the arg-best candidate. Candidates are compared in the given order and
/// exact score ties are resolved uniformly with `rng`.
pub fn select_from_scores<T: Scalar>(
    strategy: Strategy,
    candidates: &[ScoredCandidate<T>],
    rng: &mut EpisodeRng,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::EmptyPool);
    }
    let Some(maximize) = strategy.maximizes() else {
        return Ok(candidates[uniform_index(rng, candidates.len())].instance_id);
    };
    if let Some(bad) = candidates.iter().find(|c| !c.score.is_finite()) {
        return Err(Error::NonFinite(format!("score of instance {}", bad.instance_id)));
    }
    let better = |a: T, b: T| if maximize { a > b } else { a < b };
    let mut best = candidates[0].score;
    let mut ties = vec![candidates[0].instance_id];
    for c in &candidates[1..] {
        if better(c.score, best) {
            best = c.score;
            ties.clear();
            ties.push(c.instance_id);
        } else if c.score == best {
            ties.push(c.instance_id);
        }
    }
    Ok(ties[uniform_index(rng, ties.len())])
}

/// Scores every id in `unlabeled` with the learner's current outputs.
pub fn score_candidates<T: Scalar>(
    strategy: Strategy,
    unlabeled: &[usize],
    pool: &Pool<T>,
    learner: &dyn Learner<T>,
) -> Result<Vec<ScoredCandidate<T>>> {
    let score_one = |&id: &usize| -> Result<ScoredCandidate<T>> {
        let p = learner.predict_proba(pool.row(id));
        Ok(ScoredCandidate {
            instance_id: id,
            score: strategy.score(&p)?,
        })
    };
    if unlabeled.len() >= PARALLEL_SCORING_THRESHOLD {
        unlabeled.par_iter().map(score_one).collect()
    } else {
        unlabeled.iter().map(score_one).collect()
    }
}

/// Chooses the next instance from `unlabeled` (pool ids, in ascending order).
pub fn select<T: Scalar>(
    strategy: Strategy,
    unlabeled: &[usize],
    pool: &Pool<T>,
    learner: &dyn Learner<T>,
    rng: &mut EpisodeRng,
) -> Result<usize> {
    if unlabeled.is_empty() {
        return Err(Error::EmptyPool);
    }
    if strategy == Strategy::Random {
        return Ok(unlabeled[uniform_index(rng, unlabeled.len())]);
    }
    let scored = score_candidates(strategy, unlabeled, pool, learner)?;
    select_from_scores(strategy, &scored, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::UniformGuesser;
    use crate::rng::{SeedStreams, Stream};

    fn pv(v: &[f64]) -> ProbVector<f64> {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn scored(ps: &[ProbVector<f64>], s: Strategy) -> Vec<ScoredCandidate<f64>> {
        ps.iter()
            .enumerate()
            .map(|(i, p)| ScoredCandidate {
                instance_id: i,
                score: s.score(p).unwrap(),
            })
            .collect()
    }

    #[test]
    fn confidence_scores() {
        assert_eq!(score_confidence(&pv(&[1.0, 0.0, 0.0])), 1.0);
        assert!((score_confidence(&ProbVector::<f64>::uniform(10)) - 0.1).abs() < 1e-15);
        assert_eq!(score_confidence(&pv(&[0.5, 0.3, 0.2])), 0.5);
    }

    #[test]
    fn margin_scores() {
        assert_eq!(score_margin(&pv(&[0.5, 0.5, 0.0])).unwrap(), 0.0);
        assert!((score_margin(&pv(&[0.7, 0.2, 0.1])).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(score_margin(&pv(&[1.0, 0.0])).unwrap(), 1.0);
        assert!(score_margin(&pv(&[1.0])).is_err());
    }

    #[test]
    fn entropy_scores() {
        assert_eq!(score_entropy(&pv(&[0.0, 1.0, 0.0])), 0.0);
        assert!((score_entropy(&ProbVector::<f64>::uniform(10)) - 10f64.ln()).abs() < 1e-12);
        assert!((score_entropy(&pv(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn least_confidence_prefers_flatter_vector() {
        let ps = [pv(&[0.9, 0.1]), pv(&[0.6, 0.4])];
        let mut rng = SeedStreams::new(0).rng(Stream::Acquisition);
        let c = scored(&ps, Strategy::LeastConfidence);
        assert_eq!(select_from_scores(Strategy::LeastConfidence, &c, &mut rng).unwrap(), 1);
        let c = scored(&ps, Strategy::Confidence);
        assert_eq!(select_from_scores(Strategy::Confidence, &c, &mut rng).unwrap(), 0);
    }

    #[test]
    fn uniform_vector_beats_any_other_for_least_confidence() {
        let ps = [pv(&[0.4, 0.3, 0.3]), ProbVector::uniform(3), pv(&[0.34, 0.33, 0.33])];
        let mut rng = SeedStreams::new(0).rng(Stream::Acquisition);
        let c = scored(&ps, Strategy::LeastConfidence);
        assert_eq!(select_from_scores(Strategy::LeastConfidence, &c, &mut rng).unwrap(), 1);
    }

    #[test]
    fn singleton_pool_selects_its_member_for_every_strategy() {
        let pool = Pool::from_dense(1, vec![0.5f64], vec![0], 2).unwrap();
        let learner = UniformGuesser::new(1, 2);
        let mut rng = SeedStreams::new(0).rng(Stream::Acquisition);
        for s in Strategy::ALL {
            assert_eq!(select(s, &[0], &pool, &learner, &mut rng).unwrap(), 0);
        }
        assert!(matches!(
            select(Strategy::Entropy, &[], &pool, &learner, &mut rng),
            Err(Error::EmptyPool)
        ));
    }

    #[test]
    fn strategies_round_trip_through_strings() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("bald".parse::<Strategy>().is_err());
    }
}

//! Heuristic oracle floor: the expected cost of mapping C anonymous clusters to C
//! class names when every wrong guess reveals the right name, a Monte Carlo check
//! of that expectation, a cluster-first oracle over a real pool, and the composite
//! reference band.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{Pool, Row};
use crate::rng::{derive_seed, uniform_index, EpisodeRng};
use crate::scalar::Scalar;

/// `H_C = 1 + 1/2 + .. + 1/C`.
pub fn harmonic<T: Scalar>(c: usize) -> T {
    // Summed smallest-first to limit rounding.
    (1..=c)
        .rev()
        .fold(T::zero(), |acc, j| acc + T::one() / T::from_usize_lossy(j))
}

/// Expected mapping mistakes `C - H_C`.
pub fn expected_mapping_errors<T: Scalar>(num_classes: usize) -> Result<T> {
    if num_classes == 0 {
        return Err(Error::invalid("mapping expectation needs C >= 1"));
    }
    Ok(T::from_usize_lossy(num_classes) - harmonic::<T>(num_classes))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingSimulation {
    pub num_classes: usize,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation over trials divided by `sqrt(trials)`.
    pub stderr: f64,
}

const TRIALS_PER_CHUNK: usize = 4096;

/// Mistakes in one mapping pass: clusters arrive in random order, each guess is
/// uniform over the names not yet assigned, and the true name is then consumed.
pub fn mapping_trial(num_classes: usize, rng: &mut EpisodeRng) -> usize {
    let mut order: Vec<usize> = (0..num_classes).collect();
    order.shuffle(rng);
    let mut remaining: Vec<usize> = (0..num_classes).collect();
    let mut errors = 0;
    for truth in order {
        let guess = remaining[uniform_index(rng, remaining.len())];
        if guess != truth {
            errors += 1;
        }
        let pos = remaining
            .iter()
            .position(|&r| r == truth)
            .expect("true name still unassigned");
        remaining.swap_remove(pos);
    }
    errors
}

/// Monte Carlo estimate of the mapping cost. Trials run in fixed-size chunks with
/// per-chunk derived seeds, so the result does not depend on thread count.
pub fn simulate_mapping_with_feedback(num_classes: usize, trials: usize, seed: u64) -> Result<MappingSimulation> {
    if trials == 0 {
        return Err(Error::invalid("simulation needs at least one trial"));
    }
    if num_classes == 0 {
        return Err(Error::invalid("simulation needs C >= 1"));
    }
    let chunks = trials.div_ceil(TRIALS_PER_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = EpisodeRng::seed_from_u64(derive_seed(seed, c as u64));
            let count = TRIALS_PER_CHUNK.min(trials - c * TRIALS_PER_CHUNK);
            (0..count).fold((0.0, 0.0), |(s, ss), _| {
                let e = mapping_trial(num_classes, &mut rng) as f64;
                (s + e, ss + e * e)
            })
        })
        .collect();
    let (sum, sumsq) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let stderr = if trials > 1 {
        let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(MappingSimulation {
        num_classes,
        trials,
        mean,
        stderr,
    })
}

/// Lloyd k-means result plus per-cluster medoids.
#[derive(Clone, Debug)]
pub struct ClusterModel<T> {
    pub k: usize,
    pub centroids: Vec<Vec<T>>,
    pub assignments: Vec<usize>,
    /// Member minimizing summed distance to the other members; `None` for an empty cluster.
    pub medoids: Vec<Option<usize>>,
    /// Sum of squared distances to assigned centroids after each assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

fn assign_all<T: Scalar>(pool: &Pool<T>, centroids: &[Vec<T>]) -> (Vec<usize>, Vec<T>, f64) {
    let best: Vec<(usize, T)> = (0..pool.len())
        .into_par_iter()
        .map(|i| {
            let row = pool.row(i);
            centroids
                .iter()
                .enumerate()
                .map(|(j, c)| (j, row.sq_distance(&Row::Dense(c))))
                .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a })
        })
        .collect();
    let objective = best.iter().map(|b| b.1.to_f64_lossy()).sum();
    let (assign, dists) = best.into_iter().unzip();
    (assign, dists, objective)
}

/// k-means++ seeding: first center uniform, later ones drawn with probability
/// proportional to squared distance from the nearest chosen center.
fn seed_centroids<T: Scalar>(pool: &Pool<T>, k: usize, rng: &mut EpisodeRng) -> Vec<Vec<T>> {
    let mut centroids = vec![pool.row(uniform_index(rng, pool.len())).to_dense()];
    let mut nearest: Vec<f64> = (0..pool.len())
        .map(|i| pool.row(i).sq_distance(&Row::Dense(&centroids[0])).to_f64_lossy())
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = nearest.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            uniform_index(rng, pool.len())
        };
        let c = pool.row(pick).to_dense();
        for (i, n) in nearest.iter_mut().enumerate() {
            *n = n.min(pool.row(i).sq_distance(&Row::Dense(&c)).to_f64_lossy());
        }
        centroids.push(c);
    }
    centroids
}

/// Seeded k-means++ followed by at most `max_iters` Lloyd updates. A cluster left
/// empty by an update is re-seeded at the point farthest from its own centroid.
pub fn kmeans<T: Scalar>(pool: &Pool<T>, k: usize, max_iters: usize, seed: u64) -> Result<ClusterModel<T>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if k == 0 {
        return Err(Error::invalid("k-means needs k >= 1"));
    }
    let mut rng = EpisodeRng::seed_from_u64(derive_seed(seed, 0x4B4D_4541));
    let dim = pool.dim();
    let mut centroids = seed_centroids(pool, k, &mut rng);
    let (mut assignments, mut dists, objective) = assign_all(pool, &centroids);
    let mut history = vec![objective];
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            pool.row(i).add_scaled_to(T::one(), &mut sums[a]);
            counts[a] += 1;
        }
        let mut taken = vec![false; pool.len()];
        for j in 0..k {
            if counts[j] > 0 {
                let n = T::from_usize_lossy(counts[j]);
                centroids[j] = sums[j].iter().map(|&s| s / n).collect();
            } else {
                let far = (0..pool.len())
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                centroids[j] = pool.row(far).to_dense();
            }
        }
        let (next, next_dists, objective) = assign_all(pool, &centroids);
        history.push(objective);
        let converged = next == assignments;
        assignments = next;
        dists = next_dists;
        if converged {
            break;
        }
    }

    let medoids = medoids(pool, &assignments, k);
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        medoids,
        objective_history: history,
        iterations,
    })
}

/// Per-cluster member minimizing summed Euclidean distance to its cluster mates;
/// ties go to the lowest id.
pub fn medoids<T: Scalar>(pool: &Pool<T>, assignments: &[usize], k: usize) -> Vec<Option<usize>> {
    let mut members = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    members
        .iter()
        .map(|m| {
            m.par_iter()
                .map(|&cand| {
                    let row = pool.row(cand);
                    let total: f64 = m
                        .iter()
                        .map(|&o| row.sq_distance(&pool.row(o)).max(T::zero()).sqrt().to_f64_lossy())
                        .sum();
                    (cand, total)
                })
                .reduce_with(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
                .map(|(id, _)| id)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ClusterOracleReport<T> {
    /// Pool instances whose cluster's medoid label differs from their own.
    pub errors: usize,
    pub cluster_labels: Vec<Option<usize>>,
    pub cluster_sizes: Vec<usize>,
    /// Fraction of each cluster sharing its most common true label (1 for empty clusters).
    pub purity: Vec<f64>,
    pub model: ClusterModel<T>,
}

/// Cluster the pool into `k` groups, reveal one medoid label per cluster, and label
/// every member with it.
pub fn cluster_first_oracle<T: Scalar>(
    pool: &Pool<T>,
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<ClusterOracleReport<T>> {
    let model = kmeans(pool, k, max_iters, seed)?;
    let cluster_labels: Vec<Option<usize>> = model.medoids.iter().map(|m| m.map(|id| pool.label(id))).collect();
    let mut sizes = vec![0usize; k];
    let mut label_counts = vec![vec![0usize; pool.num_classes()]; k];
    let mut errors = 0;
    for (i, &a) in model.assignments.iter().enumerate() {
        sizes[a] += 1;
        label_counts[a][pool.label(i)] += 1;
        if cluster_labels[a] != Some(pool.label(i)) {
            errors += 1;
        }
    }
    let purity = sizes
        .iter()
        .zip(&label_counts)
        .map(|(&s, counts)| {
            if s == 0 {
                1.0
            } else {
                *counts.iter().max().unwrap() as f64 / s as f64
            }
        })
        .collect();
    Ok(ClusterOracleReport {
        errors,
        cluster_labels,
        cluster_sizes: sizes,
        purity,
        model,
    })
}

/// Inclusive integer range of residual mistakes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualRange {
    pub low: usize,
    pub high: usize,
}

impl ResidualRange {
    pub fn new(low: usize, high: usize) -> Result<Self> {
        if low > high {
            return Err(Error::invalid(format!("range [{low}, {high}] has low > high")));
        }
        Ok(Self { low, high })
    }
}

/// How the mapping expectation and the overlapping residuals combine into a band.
pub trait BandPolicy {
    fn name(&self) -> &'static str;
    fn compose(&self, e_map: f64, boundary: ResidualRange, noise: ResidualRange) -> (usize, usize);
}

/// Low end: the mapping expectation rounded down. High end: the low end plus the
/// larger residual, less one mistake shared with the final mapping step, and never
/// below the mapping expectation rounded up.
#[derive(Clone, Copy, Debug, Default)]
pub struct OverlapPolicy;

impl BandPolicy for OverlapPolicy {
    fn name(&self) -> &'static str {
        "overlap"
    }

    fn compose(&self, e_map: f64, boundary: ResidualRange, noise: ResidualRange) -> (usize, usize) {
        let floor = e_map.floor() as i64;
        let ceil = e_map.ceil() as i64;
        let residual = boundary.high.max(noise.high) as i64;
        let high = ceil.max(floor + residual - 1);
        (floor as usize, high as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBand {
    pub num_classes: usize,
    pub e_map: f64,
    pub boundary: ResidualRange,
    pub noise: ResidualRange,
    pub band: (usize, usize),
    pub policy: String,
}

pub fn oracle_band(num_classes: usize, boundary: ResidualRange, noise: ResidualRange) -> Result<OracleBand> {
    oracle_band_with(&OverlapPolicy, num_classes, boundary, noise)
}

pub fn oracle_band_with(
    policy: &dyn BandPolicy,
    num_classes: usize,
    boundary: ResidualRange,
    noise: ResidualRange,
) -> Result<OracleBand> {
    let boundary = ResidualRange::new(boundary.low, boundary.high)?;
    let noise = ResidualRange::new(noise.low, noise.high)?;
    let e_map = expected_mapping_errors::<f64>(num_classes)?;
    // Nothing to map and nothing to confuse with a single class.
    let band = if num_classes == 1 {
        (0, 0)
    } else {
        policy.compose(e_map, boundary, noise)
    };
    Ok(OracleBand {
        num_classes,
        e_map,
        boundary,
        noise,
        band,
        policy: policy.name().to_string(),
    })
}

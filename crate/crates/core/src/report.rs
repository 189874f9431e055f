//! Seed aggregation, trajectory/curve files, summaries and cost–performance tables.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{StepRecord, Trajectory};

pub const TRAJECTORY_HEADER: &str = "step,instance_id,predicted,truth,correct,cumulative_error,elapsed_seconds";
pub const AGGREGATE_HEADER: &str = "step,mean_error,stderr,n_seeds";

/// Mean and standard error of `E_t` across seeds, for steps `1..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub learner: String,
    pub strategy: String,
    pub track: String,
    pub seeds: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn n_seeds(&self) -> usize {
        self.seeds.len()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        self.stderr.last().copied().unwrap_or(0.0)
    }
}

/// Mean and standard error (sample sd / sqrt(count)) of integer observations.
/// Computed from exact integer sums, so the result ignores input order.
pub fn mean_and_stderr(values: &[usize]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let sum: u128 = values.iter().map(|&v| v as u128).sum();
    let sumsq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let mean = sum as f64 / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let n128 = n as u128;
    let numer = n128 * sumsq - sum * sum;
    let var = numer as f64 / (n as f64 * (n as f64 - 1.0));
    (mean, (var / n as f64).sqrt())
}

fn same_config(a: &Trajectory, b: &Trajectory) -> bool {
    a.learner == b.learner && a.strategy == b.strategy && a.track == b.track
}

/// Per-step mean and standard error of `E_t` over seeds, truncated at `cutoff`.
pub fn aggregate_across_seeds(trajectories: &[Trajectory], cutoff: usize) -> Result<AggregateCurve> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::invalid("no trajectories to aggregate"))?;
    if let Some(t) = trajectories.iter().find(|t| !same_config(first, t)) {
        return Err(Error::Heterogeneous(format!(
            "{}/{}/{} vs {}/{}/{}",
            first.learner, first.strategy, first.track, t.learner, t.strategy, t.track
        )));
    }
    let shortest = trajectories.iter().map(Trajectory::len).min().unwrap_or(0);
    if cutoff == 0 || cutoff > shortest {
        return Err(Error::StepOutOfRange { t: cutoff, n: shortest });
    }
    let mut mean = Vec::with_capacity(cutoff);
    let mut stderr = Vec::with_capacity(cutoff);
    let mut column = Vec::with_capacity(trajectories.len());
    for step in 0..cutoff {
        column.clear();
        column.extend(trajectories.iter().map(|t| t.records[step].cumulative_error));
        let (m, s) = mean_and_stderr(&column);
        mean.push(m);
        stderr.push(s);
    }
    Ok(AggregateCurve {
        learner: first.learner.clone(),
        strategy: first.strategy.to_string(),
        track: first.track.to_string(),
        seeds: trajectories.iter().map(|t| t.seed).collect(),
        mean,
        stderr,
    })
}

/// Mean elapsed wall-clock seconds at step `cutoff`; `None` when no run carries timing.
pub fn mean_wallclock(trajectories: &[Trajectory], cutoff: usize) -> Option<f64> {
    let times: Vec<f64> = trajectories
        .iter()
        .filter_map(|t| t.records.get(cutoff.checked_sub(1)?))
        .map(|r| r.elapsed_seconds)
        .collect();
    if times.is_empty() || times.len() != trajectories.len() || times.iter().all(|&s| s <= 0.0) {
        return None;
    }
    Some(times.iter().sum::<f64>() / times.len() as f64)
}

pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step, r.instance_id, r.predicted, r.truth, r.correct, r.cumulative_error, r.elapsed_seconds
        );
    }
    out
}

pub fn aggregate_csv(curve: &AggregateCurve) -> String {
    let mut out = String::with_capacity(24 * (curve.len() + 1));
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for (i, (m, s)) in curve.mean.iter().zip(&curve.stderr).enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i + 1, m, s, curve.n_seeds());
    }
    out
}

pub fn emit_trajectory_csv(trajectory: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(&trajectory.records))?;
    Ok(())
}

pub fn emit_aggregate_csv(curve: &AggregateCurve, path: &Path) -> Result<()> {
    std::fs::write(path, aggregate_csv(curve))?;
    Ok(())
}

pub fn parse_trajectory_csv<R: Read>(reader: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRAJECTORY_HEADER {
        return Err(Error::parse("trajectory csv", format!("unexpected header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<StepRecord>> {
    parse_trajectory_csv(std::fs::File::open(path)?)
}

/// One row of the run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub learner: String,
    pub strategy: String,
    pub track: String,
    pub seed_list: Vec<u64>,
    pub n: usize,
    pub mean_final_error: f64,
    pub stderr_final_error: f64,
    pub mean_wallclock_seconds: Option<f64>,
}

impl SummaryEntry {
    pub fn new(curve: &AggregateCurve, wallclock: Option<f64>) -> Self {
        Self {
            learner: curve.learner.clone(),
            strategy: curve.strategy.clone(),
            track: curve.track.clone(),
            seed_list: curve.seeds.clone(),
            n: curve.len(),
            mean_final_error: curve.final_mean(),
            stderr_final_error: curve.final_stderr(),
            mean_wallclock_seconds: wallclock,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPerformancePoint {
    pub learner: String,
    pub strategy: String,
    pub track: String,
    pub n: usize,
    pub mean_final_error: f64,
    pub mean_wallclock_seconds: f64,
}

/// One point per (learner, strategy, track), sorted by track, then mean error.
pub fn cost_performance_table(
    results: &[(AggregateCurve, Option<f64>)],
    cutoff: usize,
) -> Result<Vec<CostPerformancePoint>> {
    let mut points: Vec<CostPerformancePoint> = Vec::with_capacity(results.len());
    for (curve, wall) in results {
        let id = format!("{}/{}/{}", curve.learner, curve.strategy, curve.track);
        if curve.len() < cutoff || cutoff == 0 {
            return Err(Error::StepOutOfRange {
                t: cutoff,
                n: curve.len(),
            });
        }
        let wall = match wall {
            Some(w) if *w > 0.0 && w.is_finite() => *w,
            _ => return Err(Error::MissingTiming(id)),
        };
        if points
            .iter()
            .any(|p| p.learner == curve.learner && p.strategy == curve.strategy && p.track == curve.track)
        {
            return Err(Error::Heterogeneous(format!("duplicate entry for {id}")));
        }
        points.push(CostPerformancePoint {
            learner: curve.learner.clone(),
            strategy: curve.strategy.clone(),
            track: curve.track.clone(),
            n: cutoff,
            mean_final_error: curve.mean[cutoff - 1],
            mean_wallclock_seconds: wall,
        });
    }
    points.sort_by(|a, b| {
        a.track
            .cmp(&b.track)
            .then(a.mean_final_error.total_cmp(&b.mean_final_error))
            .then(a.learner.cmp(&b.learner))
            .then(a.strategy.cmp(&b.strategy))
    });
    Ok(points)
}

pub fn cost_performance_csv(points: &[CostPerformancePoint]) -> String {
    let mut out = String::from("learner,strategy,track,n,mean_final_error,mean_wallclock_seconds\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.learner, p.strategy, p.track, p.n, p.mean_final_error, p.mean_wallclock_seconds
        );
    }
    out
}

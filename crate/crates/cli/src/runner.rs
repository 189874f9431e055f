//! Grid execution: learner × strategy × seed episodes, then aggregation and reports.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gnl_core::report::{
    aggregate_across_seeds, cost_performance_csv, cost_performance_table, emit_aggregate_csv, emit_trajectory_csv,
    mean_wallclock, AggregateCurve, SummaryEntry,
};
use gnl_core::{run_episode_with, LearnerSpec, Scalar, SeedStreams, Strategy, Stream, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Precision, TimingMode};
use crate::dataset::{episode_pool, load_pool};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntry {
    pub learner: String,
    pub strategy: String,
    pub seed: u64,
    pub ok: bool,
    pub error: Option<String>,
    pub file: Option<String>,
    pub steps: Option<usize>,
    pub final_error: Option<usize>,
    pub error_at_cutoff: Option<usize>,
    pub batch_fits: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub track: String,
    pub cutoff: usize,
    pub complete: bool,
    pub failed_episodes: usize,
    pub episodes: Vec<EpisodeEntry>,
    pub aggregates: Vec<String>,
    /// `None` when timing is off or a group is missing, with the reason in `cost_performance_note`.
    pub cost_performance: Option<String>,
    pub cost_performance_note: Option<String>,
}

#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub curves: Vec<(AggregateCurve, Option<f64>)>,
    pub summary: Vec<SummaryEntry>,
    pub manifest: Manifest,
    pub trajectories: Vec<Trajectory>,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.manifest.failed_episodes
    }

    pub fn curve(&self, learner: &str, strategy: Strategy) -> Option<&AggregateCurve> {
        self.curves
            .iter()
            .map(|(c, _)| c)
            .find(|c| c.learner == learner && c.strategy == strategy.as_str())
    }

    /// Trajectories of one (learner, strategy) group, in seed order.
    pub fn group(&self, learner: &str, strategy: Strategy) -> Vec<&Trajectory> {
        self.trajectories
            .iter()
            .filter(|t| t.learner == learner && t.strategy == strategy)
            .collect()
    }
}

pub fn trajectory_file_name(learner: &str, strategy: Strategy, seed: u64) -> String {
    format!("{learner}__{}__seed{seed}.csv", strategy.as_str())
}

pub fn aggregate_file_name(learner: &str, strategy: Strategy) -> String {
    format!("{learner}__{}.csv", strategy.as_str())
}

/// Runs the grid into the config's content-hash directory.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunReport> {
    run_experiment_in(cfg, &cfg.run_dir(), opts)
}

/// Runs the grid into `dir`, which is created if needed.
pub fn run_experiment_in(cfg: &ExperimentConfig, dir: &Path, opts: RunOptions) -> Result<RunReport> {
    match cfg.precision {
        Precision::F32 => run_typed::<f32>(cfg, dir, opts),
        Precision::F64 => run_typed::<f64>(cfg, dir, opts),
    }
}

struct Job<'a> {
    spec: &'a LearnerSpec,
    strategy: Strategy,
    seed: u64,
}

fn run_typed<T: Scalar>(cfg: &ExperimentConfig, dir: &Path, opts: RunOptions) -> Result<RunReport> {
    let full = load_pool::<T>(&cfg.dataset)?;
    let episode_len = cfg.dataset.subset.unwrap_or(full.len());
    if cfg.dataset.subset.is_some_and(|s| s > full.len()) {
        bail!("dataset.subset: {episode_len} exceeds pool size {}", full.len());
    }
    if cfg.cutoff > episode_len {
        bail!("cutoff: {} exceeds episode length {episode_len}", cfg.cutoff);
    }

    let traj_dir = dir.join("trajectories");
    let agg_dir = dir.join("aggregates");
    fs::create_dir_all(&traj_dir).with_context(|| format!("creating {}", traj_dir.display()))?;
    fs::create_dir_all(&agg_dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(cfg)? + "\n")?;

    // Seeds innermost; the order is fixed regardless of scheduling.
    let jobs: Vec<Job> = cfg
        .learners
        .iter()
        .flat_map(|spec| {
            cfg.strategies
                .iter()
                .flat_map(move |&strategy| cfg.seeds.iter().map(move |&seed| Job { spec, strategy, seed }))
        })
        .collect();

    let run_one = |job: &Job| -> Result<Trajectory> {
        let pool = episode_pool(&full, cfg.dataset.subset, job.seed)?;
        let mut init = SeedStreams::new(job.seed).rng(Stream::LearnerInit);
        let mut learner = job.spec.build::<T>(pool.dim(), pool.num_classes(), &mut init)?;
        let traj = run_episode_with(
            &pool,
            learner.as_mut(),
            job.strategy,
            &cfg.track,
            job.seed,
            cfg.timing.into(),
        )?;
        let file = traj_dir.join(trajectory_file_name(job.spec.kind.as_str(), job.strategy, job.seed));
        emit_trajectory_csv(&traj, &file)?;
        Ok(traj)
    };
    let results: Vec<Result<Trajectory>> = if opts.parallel {
        jobs.par_iter().map(run_one).collect()
    } else {
        jobs.iter().map(run_one).collect()
    };

    let mut episodes = Vec::with_capacity(jobs.len());
    let mut trajectories = Vec::new();
    for (job, res) in jobs.iter().zip(results) {
        let learner = job.spec.kind.as_str().to_string();
        let entry = match res {
            Ok(t) => {
                let e = EpisodeEntry {
                    learner,
                    strategy: job.strategy.to_string(),
                    seed: job.seed,
                    ok: true,
                    error: None,
                    file: Some(format!(
                        "trajectories/{}",
                        trajectory_file_name(job.spec.kind.as_str(), job.strategy, job.seed)
                    )),
                    steps: Some(t.len()),
                    final_error: Some(t.final_error()),
                    error_at_cutoff: Some(t.records[cfg.cutoff - 1].cumulative_error),
                    batch_fits: Some(t.batch_fits),
                };
                trajectories.push(t);
                e
            }
            Err(err) => EpisodeEntry {
                learner,
                strategy: job.strategy.to_string(),
                seed: job.seed,
                ok: false,
                error: Some(format!("{err:#}")),
                file: None,
                steps: None,
                final_error: None,
                error_at_cutoff: None,
                batch_fits: None,
            },
        };
        episodes.push(entry);
    }

    let mut curves = Vec::new();
    let mut aggregates = Vec::new();
    let mut summary = Vec::new();
    for spec in &cfg.learners {
        for &strategy in &cfg.strategies {
            let group: Vec<Trajectory> = trajectories
                .iter()
                .filter(|t| t.learner == spec.kind.as_str() && t.strategy == strategy)
                .cloned()
                .collect();
            if group.is_empty() {
                continue;
            }
            let curve = aggregate_across_seeds(&group, cfg.cutoff)?;
            let name = aggregate_file_name(spec.kind.as_str(), strategy);
            emit_aggregate_csv(&curve, &agg_dir.join(&name))?;
            aggregates.push(format!("aggregates/{name}"));
            let wall = match cfg.timing {
                TimingMode::Wall => mean_wallclock(&group, cfg.cutoff),
                TimingMode::Off => None,
            };
            summary.push(SummaryEntry::new(&curve, wall));
            curves.push((curve, wall));
        }
    }
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    let failed = episodes.iter().filter(|e| !e.ok).count();
    let (cost_performance, cost_performance_note) = match cfg.timing {
        TimingMode::Off => (None, Some("timing is off".to_string())),
        TimingMode::Wall => match cost_performance_table(&curves, cfg.cutoff) {
            Ok(points) => {
                fs::write(dir.join("cost_performance.csv"), cost_performance_csv(&points))?;
                (Some("cost_performance.csv".to_string()), None)
            }
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let manifest = Manifest {
        config_hash: cfg.content_hash(),
        track: cfg.track.to_string(),
        cutoff: cfg.cutoff,
        complete: failed == 0,
        failed_episodes: failed,
        episodes,
        aggregates,
        cost_performance,
        cost_performance_note,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;

    Ok(RunReport {
        dir: dir.to_path_buf(),
        curves,
        summary,
        manifest,
        trajectories,
    })
}

//! Batch-size and weight-reset ablations over a batch-mode config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Result};
use gnl_core::protocol::{ResetPolicy, Schedule, UpdateMode};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::runner::{run_experiment_in, RunOptions, RunReport};

#[derive(Clone, Debug, Default)]
pub struct AblationOptions {
    pub ks: Vec<usize>,
    /// Also run every K with the opposite reset policy.
    pub toggle_reset: bool,
    pub run: RunOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub k: usize,
    pub reset_policy: ResetPolicy,
    pub learner: String,
    pub strategy: String,
    pub track: String,
    pub n: usize,
    pub mean_final_error: f64,
    pub stderr_final_error: f64,
}

#[derive(Debug)]
pub struct AblationReport {
    pub dir: PathBuf,
    pub variants: Vec<(usize, ResetPolicy, RunReport)>,
    pub comparison: Vec<ComparisonRow>,
}

fn variant_name(k: usize, reset: ResetPolicy) -> String {
    match reset {
        ResetPolicy::CarryForward => format!("K{k}"),
        ResetPolicy::ResetEachBatch => format!("K{k}-reset"),
    }
}

fn policy_name(p: ResetPolicy) -> &'static str {
    match p {
        ResetPolicy::CarryForward => "carry_forward",
        ResetPolicy::ResetEachBatch => "reset_each_batch",
    }
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("k,reset_policy,learner,strategy,track,n,mean_final_error,stderr_final_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            policy_name(r.reset_policy),
            r.learner,
            r.strategy,
            r.track,
            r.n,
            r.mean_final_error,
            r.stderr_final_error
        );
    }
    out
}

pub fn run_ablation(cfg: &ExperimentConfig, opts: &AblationOptions) -> Result<AblationReport> {
    if cfg.track.schedule.mode != UpdateMode::Batch {
        bail!("track.mode: ablation needs a batch-mode config");
    }
    if opts.ks.is_empty() {
        bail!("ablation needs at least one K");
    }
    let mut seen = BTreeSet::new();
    for &k in &opts.ks {
        if k <= 1 {
            bail!("K = {k} is not a batch size; use track.mode = \"online\" for K = 1");
        }
        if !seen.insert(k) {
            bail!("K = {k} listed twice");
        }
    }

    let mut policies = vec![cfg.track.reset_policy];
    if opts.toggle_reset {
        policies.push(match cfg.track.reset_policy {
            ResetPolicy::CarryForward => ResetPolicy::ResetEachBatch,
            ResetPolicy::ResetEachBatch => ResetPolicy::CarryForward,
        });
    }

    let mut hasher = Sha256::new();
    hasher.update(cfg.content_hash());
    hasher.update(format!("{:?}{}", opts.ks, opts.toggle_reset));
    let tag: String = hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect();
    let dir = cfg.output.join(format!("ablation-{tag}"));
    fs::create_dir_all(&dir)?;

    let mut variants = Vec::new();
    let mut comparison = Vec::new();
    for &k in &opts.ks {
        for &policy in &policies {
            let mut v = cfg.clone();
            v.track.schedule = Schedule::batch(k);
            v.track.reset_policy = policy;
            let report = run_experiment_in(&v, &dir.join(variant_name(k, policy)), opts.run)?;
            for entry in &report.summary {
                comparison.push(ComparisonRow {
                    k,
                    reset_policy: policy,
                    learner: entry.learner.clone(),
                    strategy: entry.strategy.clone(),
                    track: entry.track.clone(),
                    n: entry.n,
                    mean_final_error: entry.mean_final_error,
                    stderr_final_error: entry.stderr_final_error,
                });
            }
            variants.push((k, policy, report));
        }
    }
    fs::write(dir.join("comparison.csv"), comparison_csv(&comparison))?;
    Ok(AblationReport {
        dir,
        variants,
        comparison,
    })
}

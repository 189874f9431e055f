//! Experiment configuration: TOML with dotted keys, validated into a resolved form.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::path::{Path, PathBuf};

use gnl_core::data::DatasetKind;
use gnl_core::protocol::{Initialization, ResetPolicy, Schedule, UpdateMode};
use gnl_core::{LearnerKind, LearnerSpec, Strategy, Timing, TrackConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_CUTOFF: usize = 300;
pub const DEFAULT_BATCH_K: usize = 50;

/// A configuration problem tied to the dotted key that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingMode {
    #[default]
    Wall,
    Off,
}

impl From<TimingMode> for Timing {
    fn from(t: TimingMode) -> Self {
        match t {
            TimingMode::Wall => Timing::Wall,
            TimingMode::Off => Timing::Off,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Blobs,
    Margin,
    UniformLabels,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub generator: Generator,
    pub n: usize,
    pub dim: usize,
    #[serde(default)]
    pub classes: Option<usize>,
    #[serde(default)]
    pub separation: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub name: DatasetKind,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Draw this many instances per seed instead of using the whole pool.
    #[serde(default)]
    pub subset: Option<usize>,
    #[serde(default)]
    pub hash_dim: Option<usize>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub name: OneOrMany<LearnerKind>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub init_scale: Option<f64>,
    #[serde(default)]
    pub bias: Option<bool>,
    #[serde(default)]
    pub epochs_per_batch: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackSection {
    #[serde(default)]
    pub init: Option<Initialization>,
    #[serde(default)]
    pub mode: Option<UpdateMode>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub reset: Option<ResetPolicy>,
}

/// The file as written, before defaults and cross-field checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dataset: DatasetSection,
    pub learner: LearnerSection,
    #[serde(default, alias = "strategy")]
    pub strategies: Option<OneOrMany<Strategy>>,
    #[serde(default)]
    pub track: TrackSection,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub precision: Option<Precision>,
    #[serde(default)]
    pub timing: Option<TimingMode>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Fully resolved experiment: every default filled in and every invariant checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub learners: Vec<LearnerSpec>,
    pub strategies: Vec<Strategy>,
    pub track: TrackConfig,
    pub seeds: Vec<u64>,
    pub cutoff: usize,
    pub precision: Precision,
    pub timing: TimingMode,
    /// Base directory; runs land in a content-hash subdirectory beneath it.
    #[serde(skip)]
    pub output: PathBuf,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub cutoff: Option<usize>,
    pub output: Option<PathBuf>,
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::new("", e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        ConfigError::new(field, e.inner().message().to_string())
    })
}

pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    resolve(parse_raw(text)?, overrides)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text, overrides)?;
    // Relative data paths are taken relative to the config file.
    if let (Some(p), Some(dir)) = (cfg.dataset.path.as_mut(), path.parent()) {
        if p.is_relative() {
            *p = dir.join(&*p);
        }
    }
    Ok(cfg)
}

fn distinct<T: Eq + Hash + Copy + fmt::Debug>(field: &str, items: &[T]) -> Result<(), ConfigError> {
    let mut seen = HashSet::new();
    for &x in items {
        if !seen.insert(x) {
            return Err(ConfigError::new(field, format!("duplicate entry {x:?}")));
        }
    }
    Ok(())
}

pub fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let dataset = raw.dataset;
    check_dataset(&dataset)?;

    let kinds = raw.learner.name.to_vec();
    if kinds.is_empty() {
        return Err(ConfigError::new("learner.name", "at least one learner is required"));
    }
    distinct("learner.name", &kinds)?;
    let learners = kinds
        .iter()
        .map(|&kind| {
            let mut spec = LearnerSpec::new(kind);
            if let Some(k) = raw.learner.k {
                spec.k = k;
            }
            if let Some(h) = raw.learner.hidden {
                spec.hidden = h;
            }
            spec.lr = raw.learner.lr;
            if let Some(e) = raw.learner.epsilon {
                spec.epsilon = e;
            }
            if let Some(s) = raw.learner.init_scale {
                spec.init_scale = s;
            }
            if let Some(b) = raw.learner.bias {
                spec.bias = b;
            }
            spec.validate()
                .map_err(|e| ConfigError::new("learner", e.to_string()))?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    let strategies = raw
        .strategies
        .map(|s| s.to_vec())
        .unwrap_or_else(|| vec![Strategy::Random]);
    if strategies.is_empty() {
        return Err(ConfigError::new("strategies", "at least one strategy is required"));
    }
    distinct("strategies", &strategies)?;

    let track = resolve_track(&raw.track, raw.learner.epochs_per_batch)?;

    let seeds = overrides
        .seeds
        .clone()
        .or(raw.seeds)
        .unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
    if seeds.is_empty() {
        return Err(ConfigError::new("seeds", "must not be empty"));
    }
    distinct("seeds", &seeds)?;

    let cutoff = overrides.cutoff.or(raw.cutoff).unwrap_or(DEFAULT_CUTOFF);
    if cutoff == 0 {
        return Err(ConfigError::new("cutoff", "must be at least 1"));
    }
    if let Some(s) = dataset.subset {
        if cutoff > s {
            return Err(ConfigError::new(
                "cutoff",
                format!("{cutoff} exceeds dataset.subset = {s}"),
            ));
        }
    }

    Ok(ExperimentConfig {
        dataset,
        learners,
        strategies,
        track,
        seeds,
        cutoff,
        precision: raw.precision.unwrap_or_default(),
        timing: raw.timing.unwrap_or_default(),
        output: overrides
            .output
            .clone()
            .or(raw.output)
            .unwrap_or_else(|| PathBuf::from("runs")),
    })
}

fn check_dataset(d: &DatasetSection) -> Result<(), ConfigError> {
    match d.name {
        DatasetKind::Synthetic => {
            let s = d
                .synthetic
                .as_ref()
                .ok_or_else(|| ConfigError::new("dataset.synthetic", "required when dataset.name = \"synthetic\""))?;
            if s.n == 0 {
                return Err(ConfigError::new("dataset.synthetic.n", "must be at least 1"));
            }
            if s.dim == 0 {
                return Err(ConfigError::new("dataset.synthetic.dim", "must be at least 1"));
            }
            match s.generator {
                Generator::Margin => {
                    if s.radius.is_none() {
                        return Err(ConfigError::new(
                            "dataset.synthetic.radius",
                            "required for the margin generator",
                        ));
                    }
                    if s.gamma.is_none() {
                        return Err(ConfigError::new(
                            "dataset.synthetic.gamma",
                            "required for the margin generator",
                        ));
                    }
                }
                Generator::Blobs | Generator::UniformLabels => {
                    if s.classes.unwrap_or(0) == 0 {
                        return Err(ConfigError::new("dataset.synthetic.classes", "must be at least 1"));
                    }
                }
            }
            if d.path.is_some() {
                return Err(ConfigError::new("dataset.path", "not used by the synthetic dataset"));
            }
        }
        _ => {
            if d.path.is_none() {
                return Err(ConfigError::new(
                    "dataset.path",
                    format!("required for dataset `{}`", d.name),
                ));
            }
            if d.synthetic.is_some() {
                return Err(ConfigError::new(
                    "dataset.synthetic",
                    "only valid with dataset.name = \"synthetic\"",
                ));
            }
        }
    }
    if let Some(h) = d.hash_dim {
        if d.name != DatasetKind::Agnews {
            return Err(ConfigError::new("dataset.hash_dim", "only valid for agnews"));
        }
        if !h.is_power_of_two() {
            return Err(ConfigError::new(
                "dataset.hash_dim",
                format!("{h} is not a power of two"),
            ));
        }
    }
    if d.subset == Some(0) {
        return Err(ConfigError::new("dataset.subset", "must be at least 1"));
    }
    Ok(())
}

fn resolve_track(t: &TrackSection, epochs: Option<usize>) -> Result<TrackConfig, ConfigError> {
    let mode = t.mode.unwrap_or(UpdateMode::Online);
    let schedule = match mode {
        UpdateMode::Online => {
            if let Some(k) = t.k {
                if k != 1 {
                    return Err(ConfigError::new("track.k", format!("online mode needs k = 1, got {k}")));
                }
            }
            Schedule::online()
        }
        UpdateMode::Batch => {
            let k = t.k.unwrap_or(DEFAULT_BATCH_K);
            if k < 2 {
                return Err(ConfigError::new("track.k", format!("batch mode needs k >= 2, got {k}")));
            }
            Schedule::batch(k)
        }
    };
    let reset = t.reset.unwrap_or(ResetPolicy::CarryForward);
    if reset == ResetPolicy::ResetEachBatch && mode == UpdateMode::Online {
        return Err(ConfigError::new(
            "track.reset",
            "reset_each_batch requires track.mode = \"batch\"",
        ));
    }
    let epochs = epochs.unwrap_or(1);
    if epochs == 0 {
        return Err(ConfigError::new("learner.epochs_per_batch", "must be at least 1"));
    }
    if epochs > 1 && mode == UpdateMode::Online {
        return Err(ConfigError::new(
            "learner.epochs_per_batch",
            "only meaningful in batch mode",
        ));
    }
    let track = TrackConfig::new(t.init.unwrap_or(Initialization::Scratch), schedule, reset).with_epochs(epochs);
    track.validate().map_err(|e| ConfigError::new("track", e.to_string()))?;
    Ok(track)
}

impl ExperimentConfig {
    /// Hex digest of the canonical JSON form; identical configs share a directory.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output.join(self.content_hash())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dataset.name = "synthetic"
dataset.synthetic.generator = "blobs"
dataset.synthetic.n = 40
dataset.synthetic.dim = 3
dataset.synthetic.classes = 2
learner.name = "perceptron"
cutoff = 20
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = parse_config(MINIMAL, &Overrides::default()).unwrap();
        assert_eq!(cfg.seeds, DEFAULT_SEEDS);
        assert_eq!(cfg.strategies, vec![Strategy::Random]);
        assert_eq!(cfg.track, TrackConfig::scratch_online());
        assert_eq!(cfg.precision, Precision::F64);
    }

    #[test]
    fn lists_and_overrides() {
        let text = format!("{MINIMAL}\nlearner.k = 3\nstrategies = [\"margin\", \"entropy\"]\nseeds = [7, 8]\n")
            .replace("learner.name = \"perceptron\"", "learner.name = [\"knn\", \"mlp\"]");
        let o = Overrides {
            seeds: Some(vec![1]),
            cutoff: Some(10),
            output: None,
        };
        let cfg = parse_config(&text, &o).unwrap();
        assert_eq!(cfg.learners.len(), 2);
        assert_eq!(cfg.learners[0].k, 3);
        assert_eq!(cfg.strategies, vec![Strategy::Margin, Strategy::Entropy]);
        assert_eq!(cfg.seeds, vec![1]);
        assert_eq!(cfg.cutoff, 10);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (format!("{MINIMAL}seeds = []\n"), "seeds"),
            (format!("{MINIMAL}seeds = [1, 1]\n"), "seeds"),
            (format!("{MINIMAL}track.mode = \"batch\"\ntrack.k = 1\n"), "track.k"),
            (format!("{MINIMAL}track.k = 5\n"), "track.k"),
            (format!("{MINIMAL}track.reset = \"reset_each_batch\"\n"), "track.reset"),
            (format!("{MINIMAL}track.colour = 1\n"), "track.colour"),
            (format!("{MINIMAL}track.mode = \"sideways\"\n"), "track.mode"),
            (
                MINIMAL.replace("\"blobs\"", "\"spirals\""),
                "dataset.synthetic.generator",
            ),
            (
                MINIMAL.replace("dataset.synthetic.classes = 2\n", ""),
                "dataset.synthetic.classes",
            ),
            (format!("{MINIMAL}learner.lr = -1.0\n"), "learner"),
            (format!("{MINIMAL}dataset.subset = 10\n"), "cutoff"),
        ];
        for (text, field) in cases {
            let err = parse_config(&text, &Overrides::default()).unwrap_err();
            assert_eq!(err.field, field, "{err}");
        }
    }

    #[test]
    fn hash_tracks_content_but_not_output_location() {
        let a = parse_config(MINIMAL, &Overrides::default()).unwrap();
        let mut b = a.clone();
        b.output = PathBuf::from("elsewhere");
        assert_eq!(a.content_hash(), b.content_hash());
        let c = parse_config(&format!("{MINIMAL}seeds = [0]\n"), &Overrides::default()).unwrap();
        assert_ne!(a.content_hash(), c.content_hash());
        assert_eq!(a.content_hash().len(), 16);
    }
}

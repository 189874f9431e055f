//! Small synthetic datasets in every on-disk format the runner reads.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Result};
use gnl_core::data::{
    encode_idx_images, encode_idx_labels, generate_blobs, generate_margin_dataset, mnist, save_embeddings,
};
use gnl_core::{SeedStreams, Stream};
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Embeddings,
    Margin,
    Idx,
    Agnews,
    All,
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "embeddings" => Self::Embeddings,
            "margin" => Self::Margin,
            "idx" => Self::Idx,
            "agnews" => Self::Agnews,
            "all" => Self::All,
            _ => return Err(format!("unknown fixture `{s}` (embeddings, margin, idx, agnews, all)")),
        })
    }
}

#[derive(Clone, Debug)]
pub struct FixtureParams {
    pub n: usize,
    pub dim: usize,
    pub classes: usize,
    pub separation: f64,
    pub radius: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            n: 1000,
            dim: 32,
            classes: 4,
            separation: 1.0,
            radius: 10.0,
            gamma: 1.0,
            seed: 0,
        }
    }
}

pub const EMBEDDINGS_FILE: &str = "embeddings.glemb";
pub const MARGIN_FILE: &str = "margin.glemb";
pub const IDX_DIR: &str = "idx";
pub const AGNEWS_FILE: &str = "agnews.csv";

const IDX_SIDE: usize = 8;

const TOPICS: [&[&str]; 4] = [
    &[
        "election", "minister", "treaty", "summit", "border", "vote", "embassy", "rebels",
    ],
    &[
        "match", "season", "coach", "goal", "league", "final", "striker", "title",
    ],
    &[
        "shares",
        "profit",
        "market",
        "merger",
        "earnings",
        "stocks",
        "investors",
        "quarter",
    ],
    &[
        "software", "chip", "internet", "browser", "server", "wireless", "startup", "patent",
    ],
];
const FILLER: [&str; 8] = ["the", "a", "new", "after", "report", "says", "week", "today"];

/// Writes the requested fixtures into `out` and returns the paths created.
pub fn write_fixtures(kind: FixtureKind, out: &Path, p: &FixtureParams) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let want = |k: FixtureKind| kind == k || kind == FixtureKind::All;
    if want(FixtureKind::Embeddings) {
        let pool = generate_blobs::<f32>(p.n, p.dim, p.classes, p.separation, p.seed)?;
        let path = out.join(EMBEDDINGS_FILE);
        save_embeddings(&pool, &path)?;
        written.push(path);
    }
    if want(FixtureKind::Margin) {
        let ds = generate_margin_dataset::<f32>(p.n, p.dim, p.radius, p.gamma, p.seed)?;
        let path = out.join(MARGIN_FILE);
        save_embeddings(&ds.pool, &path)?;
        written.push(path);
    }
    if want(FixtureKind::Idx) {
        written.extend(write_idx(&out.join(IDX_DIR), p)?);
    }
    if want(FixtureKind::Agnews) {
        let path = out.join(AGNEWS_FILE);
        fs::write(&path, agnews_csv(p.n, p.seed))?;
        written.push(path);
    }
    Ok(written)
}

/// 8×8 grayscale images from Gaussian blobs, ten classes, in IDX layout.
fn write_idx(dir: &Path, p: &FixtureParams) -> Result<Vec<PathBuf>> {
    if p.n == 0 {
        bail!("fixture size must be at least 1");
    }
    fs::create_dir_all(dir)?;
    let pool = generate_blobs::<f64>(
        p.n,
        IDX_SIDE * IDX_SIDE,
        mnist::NUM_CLASSES,
        p.separation.max(1.0),
        p.seed,
    )?;
    let images: Vec<Vec<u8>> = (0..pool.len())
        .map(|i| {
            pool.row(i)
                .to_dense()
                .iter()
                .map(|v| (128.0 + 40.0 * v).round().clamp(0.0, 255.0) as u8)
                .collect()
        })
        .collect();
    let labels: Vec<u8> = pool.labels().iter().map(|&l| l as u8).collect();
    let img = dir.join(mnist::TEST_IMAGES_FILE);
    let lab = dir.join(mnist::TEST_LABELS_FILE);
    fs::write(&img, encode_idx_images(&images, IDX_SIDE, IDX_SIDE))?;
    fs::write(&lab, encode_idx_labels(&labels))?;
    Ok(vec![img, lab])
}

/// Headline-style rows in the AG News CSV layout: quoted class (1..4), title, description.
pub fn agnews_csv(n: usize, seed: u64) -> String {
    let mut rng = SeedStreams::new(seed).rng(Stream::PoolSubset);
    let mut words = |class: usize, len: usize| -> String {
        (0..len)
            .map(|_| {
                if rng.random_bool(0.6) {
                    TOPICS[class][rng.random_range(0..TOPICS[class].len())]
                } else {
                    FILLER[rng.random_range(0..FILLER.len())]
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    for i in 0..n {
        let class = i % TOPICS.len();
        let title = words(class, 4);
        let body = words(class, 12);
        let _ = writeln!(out, "\"{}\",\"{}\",\"{}, reuters\"", class + 1, title, body);
    }
    out
}

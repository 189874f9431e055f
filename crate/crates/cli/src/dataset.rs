use std::borrow::Cow;

use anyhow::{bail, Context, Result};
use gnl_core::data::{
    agnews_pool, generate_blobs, generate_margin_dataset, generate_uniform_labels, load_agnews_csv, load_embeddings,
    load_mnist_dir, DatasetKind, DEFAULT_HASH_DIM,
};
use gnl_core::pool::Pool;
use gnl_core::Scalar;

use crate::config::{DatasetSection, Generator};

/// Loads or generates the full pool described by the dataset section.
pub fn load_pool<T: Scalar>(d: &DatasetSection) -> Result<Pool<T>> {
    let path = || d.path.as_deref().context("dataset.path is required");
    let pool = match d.name {
        DatasetKind::Mnist => {
            let dir = path()?;
            load_mnist_dir(dir).with_context(|| format!("loading MNIST from {}", dir.display()))?
        }
        DatasetKind::Agnews => {
            let file = path()?;
            let records = load_agnews_csv(file).with_context(|| format!("loading AG News from {}", file.display()))?;
            agnews_pool(&records, d.hash_dim.unwrap_or(DEFAULT_HASH_DIM))?
        }
        DatasetKind::Embeddings => {
            let file = path()?;
            load_embeddings(file).with_context(|| format!("loading embeddings from {}", file.display()))?
        }
        DatasetKind::Synthetic => {
            let s = d.synthetic.as_ref().context("dataset.synthetic is required")?;
            let classes = s.classes.unwrap_or(2);
            match s.generator {
                Generator::Blobs => generate_blobs(s.n, s.dim, classes, s.separation.unwrap_or(3.0), s.seed)?,
                Generator::UniformLabels => generate_uniform_labels(s.n, s.dim, classes, s.seed)?,
                Generator::Margin => {
                    let (r, g) = (s.radius.unwrap_or(10.0), s.gamma.unwrap_or(1.0));
                    generate_margin_dataset(s.n, s.dim, r, g, s.seed)?.pool
                }
            }
        }
    };
    if pool.is_empty() {
        bail!("dataset `{}` is empty", d.name);
    }
    Ok(pool)
}

/// The pool an episode with `seed` runs on: the full pool, or a seeded subset.
pub fn episode_pool<T: Scalar>(full: &Pool<T>, subset: Option<usize>, seed: u64) -> Result<Cow<'_, Pool<T>>> {
    match subset {
        None => Ok(Cow::Borrowed(full)),
        Some(n) => Ok(Cow::Owned(
            full.sample_subset(n, seed)
                .with_context(|| format!("dataset.subset = {n}"))?,
        )),
    }
}

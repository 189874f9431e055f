//! Dataset ingestion: MNIST IDX, AG News CSV with hashed text features, the
//! embedding file format for pretrained-feature tracks, and synthetic fixtures.

pub mod agnews;
pub mod embeddings;
pub mod mnist;
pub mod synthetic;
pub mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use agnews::{agnews_pool, load_agnews_csv, parse_agnews_csv, TextRecord};
pub use embeddings::{load_embeddings, read_embeddings, save_embeddings, write_embeddings};
pub use mnist::{encode_idx_images, encode_idx_labels, load_mnist_dir, parse_mnist_idx};
pub use synthetic::{generate_blobs, generate_margin_dataset, generate_uniform_labels, MarginDataset};
pub use text::{featurize_text_hashing, fnv1a64, DEFAULT_HASH_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Mnist,
    Agnews,
    Embeddings,
    Synthetic,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 4] = [
        DatasetKind::Mnist,
        DatasetKind::Agnews,
        DatasetKind::Embeddings,
        DatasetKind::Synthetic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Agnews => "agnews",
            DatasetKind::Embeddings => "embeddings",
            DatasetKind::Synthetic => "synthetic",
        }
    }

    /// Fixed class count, where the dataset defines one.
    pub fn num_classes(&self) -> Option<usize> {
        match self {
            DatasetKind::Mnist => Some(mnist::NUM_CLASSES),
            DatasetKind::Agnews => Some(agnews::NUM_CLASSES),
            DatasetKind::Embeddings | DatasetKind::Synthetic => None,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown dataset `{s}`")))
    }
}

//! Hashed bag-of-words features.
//!
//! Text is lowercased and split on every non-alphanumeric character. Each token's
//! UTF-8 bytes are hashed with 64-bit FNV-1a and the low bits pick one of `dim`
//! buckets (`dim` a power of two). Bucket counts are L2-normalized.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pool::SparseVector;
use crate::scalar::Scalar;

pub const DEFAULT_HASH_DIM: usize = 1 << 15;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn bucket(token: &str, dim: usize) -> u32 {
    (fnv1a64(token.as_bytes()) & (dim as u64 - 1)) as u32
}

/// Raw bucket counts before normalization.
pub fn hashed_counts(text: &str, dim: usize) -> Result<BTreeMap<u32, usize>> {
    if !dim.is_power_of_two() || dim > u32::MAX as usize {
        return Err(Error::invalid(format!("hash dimension {dim} is not a power of two")));
    }
    let mut counts = BTreeMap::new();
    for tok in tokenize(text) {
        *counts.entry(bucket(&tok, dim)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Unit-norm hashed token counts; empty text maps to the zero vector.
pub fn featurize_text_hashing<T: Scalar>(text: &str, dim: usize) -> Result<SparseVector<T>> {
    let counts = hashed_counts(text, dim)?;
    let norm = counts.values().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
    let (indices, values) = counts
        .into_iter()
        .map(|(i, c)| (i, T::from_f64_lossy(c as f64 / norm)))
        .unzip();
    Ok(SparseVector { dim, indices, values })
}

//! Seed derivation. One master seed fans out into independent streams so that
//! changing, say, the acquisition strategy never perturbs learner initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type EpisodeRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Random acquisition draws and score tie-breaks.
    Acquisition,
    /// Tie-breaks among equally probable predicted classes.
    Prediction,
    /// Initial parameter draws.
    LearnerInit,
    /// Example order within batch fits.
    LearnerShuffle,
    /// Pool subsampling.
    PoolSubset,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Acquisition => 0xA11C_0001,
            Stream::Prediction => 0xA11C_0002,
            Stream::LearnerInit => 0xA11C_0003,
            Stream::LearnerShuffle => 0xA11C_0004,
            Stream::PoolSubset => 0xA11C_0005,
        }
    }
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a tag into a child seed.
#[inline]
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn seed(&self, stream: Stream) -> u64 {
        derive_seed(self.master, stream.tag())
    }

    pub fn rng(&self, stream: Stream) -> EpisodeRng {
        EpisodeRng::seed_from_u64(self.seed(stream))
    }
}

/// Uniform index in `0..n`. Panics if `n == 0`.
#[inline]
pub fn uniform_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0, "uniform_index over empty range");
    if n == 1 {
        0
    } else {
        rng.random_range(0..n)
    }
}

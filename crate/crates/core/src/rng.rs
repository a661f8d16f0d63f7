//! Seed derivation for reproducible, order-independent randomness.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! a master seed plus a label path. Two streams with different labels never
//! share draws, so a new stage (or a new replication) cannot perturb the
//! draws of an existing one, and results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator handed to estimators and samplers.
pub type StreamRng = ChaCha8Rng;

/// Named purposes for sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stage {
    BudgetDraw = 1,
    SplitShuffle = 2,
    Estimator = 3,
    Subsampling = 4,
    FullEstimate = 5,
    Data = 6,
    Replication = 7,
    Coordinate = 8,
    Point = 9,
    Method = 10,
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(seed: u64, stage: Stage, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stage as u64)) ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// A master seed from which named sub-streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A generator for `stage`, distinguished further by `index`.
    pub fn rng(&self, stage: Stage, index: u64) -> StreamRng {
        StreamRng::seed_from_u64(mix(self.seed, stage, index))
    }

    /// A fresh master seed scoped under `(stage, index)`.
    pub fn child(&self, stage: Stage, index: u64) -> Streams {
        Streams {
            seed: mix(self.seed, stage, index),
        }
    }

    pub fn budget_draw(&self) -> StreamRng {
        self.rng(Stage::BudgetDraw, 0)
    }

    pub fn split_shuffle(&self) -> StreamRng {
        self.rng(Stage::SplitShuffle, 0)
    }

    /// Stream for the estimator applied to split `j`.
    pub fn estimator(&self, split: usize) -> StreamRng {
        self.rng(Stage::Estimator, split as u64)
    }
}

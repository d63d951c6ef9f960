//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `seed_from_u64(seed)`, with
//! the ChaCha stream id selecting an independent sequence:
//!
//! - stream 0: topic-vector initialization
//! - stream 1: synthetic data generation
//! - stream `(epoch << 40) | doc_index` (epoch ≥ 1): one document's draws in one epoch
//!
//! ChaCha output is specified bit-for-bit, so draws are identical on every
//! platform and independent of the order in which documents are visited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type BosRng = ChaCha8Rng;

const DOC_BITS: u32 = 40;
const INIT_STREAM: u64 = 0;
const SYNTH_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, id: u64) -> BosRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn init(&self) -> BosRng {
        self.stream(INIT_STREAM)
    }

    pub fn synth(&self) -> BosRng {
        self.stream(SYNTH_STREAM)
    }

    /// Stream for document `doc_index` during `epoch` (1-based).
    pub fn document(&self, epoch: usize, doc_index: usize) -> BosRng {
        assert!(epoch >= 1, "epochs are 1-based");
        assert!((doc_index as u64) < 1 << DOC_BITS, "document index exceeds 2^40");
        self.stream(((epoch as u64) << DOC_BITS) | doc_index as u64)
    }
}

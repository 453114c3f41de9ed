//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 substream keyed by one
//! 64-bit master seed. ChaCha is counter based: the key is expanded from the
//! master seed and each substream gets its own 64-bit stream id, so streams
//! never overlap and can be generated in any order (or in parallel) with
//! identical results.
//!
//! Stream ids pack a purpose tag into the top byte and an index (row number,
//! etc.) into the low 56 bits:
//!
//! | tag | purpose                         | index      |
//! |-----|---------------------------------|------------|
//! | 1   | signal support and values       | 0          |
//! | 2   | signal norm                     | 0          |
//! | 3   | measurement matrix row          | row number |
//! | 4   | dither shift                    | row number |
//!
//! Trial seeds for the benchmark harness are derived with [`derive_seed`]
//! (SplitMix64 mixing of the master seed and a path of indices).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const INDEX_MASK: u64 = (1 << 56) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SignalShape,
    SignalNorm,
    MatrixRow(u64),
    Shift(u64),
}

impl Stream {
    pub fn id(self) -> u64 {
        let (tag, index) = match self {
            Stream::SignalShape => (1u64, 0),
            Stream::SignalNorm => (2, 0),
            Stream::MatrixRow(i) => (3, i),
            Stream::Shift(i) => (4, i),
        };
        debug_assert!(index <= INDEX_MASK);
        (tag << 56) | (index & INDEX_MASK)
    }
}

/// Keyed generator from which substreams are split.
#[derive(Clone)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub fn stream(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream.id());
        rng.set_word_pos(0);
        rng
    }
}

/// Convenience for a single substream of `master_seed`.
pub fn substream(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    StreamFactory::new(master_seed).stream(stream)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of indices.
pub fn derive_seed(master_seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master_seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let f = StreamFactory::new(42);
        let a: Vec<u64> = f.stream(Stream::MatrixRow(3)).random_iter().take(4).collect();
        let b: Vec<u64> = substream(42, Stream::MatrixRow(3)).random_iter().take(4).collect();
        let c: Vec<u64> = f.stream(Stream::MatrixRow(4)).random_iter().take(4).collect();
        let d: Vec<u64> = f.stream(Stream::Shift(3)).random_iter().take(4).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derived_seeds_depend_on_path() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
    }
}

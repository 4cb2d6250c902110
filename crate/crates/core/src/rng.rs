//! Seeded, counter-based random streams.
//!
//! Every draw is a function of `(seed, stream, shard, position)` only: the
//! generator is ChaCha12 keyed by the seed and shard index, with the stream id
//! as its nonce. Work split into fixed-size shards therefore produces the same
//! numbers on any platform and for any number of worker threads.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::special::norm_quantile;

/// Seed and sub-stream identifying a reproducible sequence of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Independent generator for shard `shard` of this stream.
    pub fn shard(&self, shard: u64) -> DrawStream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&shard.to_le_bytes());
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.stream);
        DrawStream { rng }
    }
}

/// Uniform and Gaussian draws from one shard.
#[derive(Debug, Clone)]
pub struct DrawStream {
    rng: ChaCha12Rng,
}

impl DrawStream {
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Standard normal by inverse-CDF transform of [`uniform`](Self::uniform).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        norm_quantile(self.uniform())
    }

    pub fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }
}

/// Run `work` over `[0, n)` split into shards of `shard_len` items, in
/// parallel on the current rayon pool. Results come back in shard order, so
/// any fold over them is independent of the thread count.
pub(crate) fn sharded<T, F>(n: u64, shard_len: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, std::ops::Range<u64>) -> T + Sync,
{
    let shards = n.div_ceil(shard_len);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let start = s * shard_len;
            work(s, start..(start + shard_len).min(n))
        })
        .collect()
}

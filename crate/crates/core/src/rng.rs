//! Named, seeded random streams.
//!
//! Every random decision in the toolkit is drawn from a ChaCha stream keyed by
//! a user seed, a stream name and an item index, so corpus-parallel work can
//! derive per-item generators without sharing state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Synth = 1,
    Perturb = 2,
    Train = 3,
    Sample = 4,
    Init = 5,
    Probe = 6,
}

/// Generator for item `index` of stream `stream` under `seed`.
///
/// The key is built from `seed` and `stream`; `index` selects the ChaCha
/// stream (nonce), so every item has its own keystream.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

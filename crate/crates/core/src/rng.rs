//! Keyed random streams for reproducible parallel generation.
//!
//! Every random decision draws from a ChaCha8 stream addressed by
//! `(seed, sample_index, stream)`. The key is fixed by the sample, not by
//! the order workers reach it, so any partition of samples across threads
//! reproduces the serial dataset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams. Span, query and truncation draws share `SPANS`.
pub mod stream {
    pub const TASK: u64 = 1;
    pub const VARIANT: u64 = 2;
    pub const WINDOW: u64 = 3;
    pub const SPANS: u64 = 4;
    pub const RETRY: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for one `(seed, sample_index, stream)` triple.
pub fn sample_rng(seed: u64, sample_index: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ splitmix64(sample_index);
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        state = splitmix64(state ^ i as u64);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// The same stream, advanced to attempt number `attempt` (for resampling).
pub fn retry_rng(seed: u64, sample_index: u64, stream: u64, attempt: u64) -> ChaCha8Rng {
    if attempt == 0 {
        return sample_rng(seed, sample_index, stream);
    }
    sample_rng(
        seed,
        sample_index,
        stream ^ (attempt << 32) ^ (self::stream::RETRY << 56),
    )
}

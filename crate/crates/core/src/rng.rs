//! Counter-style normal variate streams shared by path sampling and
//! band-limited random fields.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One normal-variate stream keyed by `(seed, domain tag, stream id)`. Each
/// draw consumes a fixed budget of two 64-bit words, so draw `n` of a stream
/// is independent of every other stream under the same seed.
pub(crate) struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub(crate) fn new(seed: u64, tag: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&tag.to_le_bytes());
        key[16..24].copy_from_slice(&0x5341_4c54_5041_5448_u64.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        NormalStream { rng }
    }

    pub(crate) fn next_normal(&mut self) -> f64 {
        const TWO53: f64 = 9007199254740992.0;
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        let u1 = ((a >> 11) as f64 + 1.0) / TWO53; // (0, 1]
        let u2 = (b >> 11) as f64 / TWO53; // [0, 1)
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

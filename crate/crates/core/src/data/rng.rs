use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Seedable, splittable generator used by every stochastic operation.
///
/// Streams derived with [`RngState::derive`] from the same seed are
/// independent ChaCha20 streams, so adding draws to one consumer never
/// shifts the numbers another consumer sees.
#[derive(Clone, Debug)]
pub struct RngState(ChaCha20Rng);

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Stream `stream` of the generator keyed by `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Child generator seeded from this one's output.
    pub fn split(&mut self) -> Self {
        Self(ChaCha20Rng::seed_from_u64(self.0.next_u64()))
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A named random stream: the generated sequence is a pure function of
/// `(master_seed, stream_id)`, independent of scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// Stream for trial `trial` at grid point `index` of an experiment.
    pub fn for_trial(master_seed: u64, index: u32, trial: u32) -> Self {
        RngStream::new(master_seed, ((index as u64) << 32) | trial as u64)
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

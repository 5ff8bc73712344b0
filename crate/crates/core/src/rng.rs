//! Order-independent random streams.
//!
//! Every random draw in the toolkit comes from a generator keyed by
//! `(master_seed, image_key, stage_index)`. The key is hashed with SHA-256
//! into a ChaCha12 key; ChaCha is itself a counter-based generator, so the
//! stream for one (image, stage) pair never depends on how many other
//! streams were created before it or on which thread created it.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Generator handed to every stochastic stage.
pub type StageRng = ChaCha12Rng;

const DOMAIN_TAG: &[u8] = b"degraforge/stream/v1";

/// Stage ordinals used when deriving streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum StageSlot {
    /// Gate outcomes and stage parameters.
    Sampler = 0,
    Blur = 1,
    Downsample = 2,
    Noise = 3,
    Jpeg = 4,
    /// Patch placement for `--crop`.
    Crop = 5,
}

impl StageSlot {
    pub fn index(self) -> u32 {
        self as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub image_key: String,
    pub stage_index: u32,
}

impl StreamKey {
    pub fn new(master_seed: u64, image_key: impl Into<String>, stage_index: u32) -> Self {
        Self {
            master_seed,
            image_key: image_key.into(),
            stage_index,
        }
    }

    /// The 256-bit generator key for this triple.
    pub fn digest(&self) -> [u8; 32] {
        let key_hash = Sha256::digest(self.image_key.as_bytes());
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(self.master_seed.to_le_bytes());
        h.update(key_hash);
        h.update(self.stage_index.to_le_bytes());
        h.finalize().into()
    }
}

/// Creates the generator for `key`. Pure in its argument.
pub fn derive_stream(key: &StreamKey) -> StageRng {
    StageRng::from_seed(key.digest())
}

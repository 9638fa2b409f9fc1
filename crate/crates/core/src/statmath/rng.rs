use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible random stream.
///
/// Streams sharing a master seed but with distinct ids map onto distinct
/// ChaCha streams, so parallel work can be assigned a stream per task and the
/// output does not depend on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Sibling stream under the same master seed.
    pub fn with_id(&self, stream_id: u64) -> Self {
        Self::new(self.master_seed, stream_id)
    }

    /// A child stream namespace: the returned stream (and all its siblings)
    /// is keyed by `(self, id)` and does not collide with `self`'s siblings.
    pub fn child(&self, id: u64) -> Self {
        let parent = splitmix64(splitmix64(self.master_seed) ^ self.stream_id);
        Self::new(
            splitmix64(parent ^ splitmix64(id ^ 0xA5A5_5A5A_C3C3_3C3C)),
            0,
        )
    }
}

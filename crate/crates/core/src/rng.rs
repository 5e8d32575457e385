//! Named, independent random streams derived from a single 64-bit seed.
//!
//! Every component of a run draws from its own ChaCha stream so that, for
//! example, changing the number of tuning blocks never perturbs the
//! synthetic data or the sampling phase.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Synthetic,
    Tuning,
    BurnIn,
    Sampling,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Synthetic => 0,
            Stream::Tuning => 1,
            Stream::BurnIn => 2,
            Stream::Sampling => 3,
        }
    }
}

/// Seed plus chain index; expands into one RNG per [`Stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSequence {
    pub seed: u64,
    pub chain: u64,
}

impl SeedSequence {
    pub fn new(seed: u64) -> Self {
        SeedSequence { seed, chain: 0 }
    }

    pub fn for_chain(self, chain: u64) -> Self {
        SeedSequence { chain, ..self }
    }

    pub fn stream(&self, stream: Stream) -> Rng {
        let mut rng = Rng::seed_from_u64(self.seed);
        // Synthetic data is shared by all chains of a run.
        let chain = if stream == Stream::Synthetic {
            0
        } else {
            self.chain
        };
        rng.set_stream((chain << 8) | stream.id());
        rng
    }
}

/// Serializable position of a ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    /// Word position, stored as a decimal string since it is 128-bit.
    #[serde(with = "u128_string")]
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &Rng) -> Self {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> Rng {
        let mut rng = Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

mod u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

//! Reproducible uniform streams keyed by (seed, replication, channel).
//!
//! Every replication of every experiment draws from its own ChaCha stream,
//! so parallel replication order cannot change any output. Within a stream
//! the k-th draw is the k-th uniform of that (seed, rep, channel) key.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream channels used by the samplers. Keeping the primary uniforms on
/// their own channel means adding auxiliary noise (below-threshold values,
/// coupling accept/reject) never shifts the main draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Driving uniforms `U_n` shared by coupled samplers.
    Primary,
    /// Below-threshold noise (vee values, filler laws).
    Below,
    /// Auxiliary draws (Markov innovations, etc.).
    Aux,
}

impl Channel {
    fn id(self) -> u64 {
        match self {
            Channel::Primary => 0,
            Channel::Below => 1,
            Channel::Aux => 2,
        }
    }
}

/// Factory for per-replication uniform streams.
#[derive(Debug, Clone, Copy)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uniform stream for one replication and channel.
    pub fn uniforms(&self, rep: u64, channel: Channel) -> UniformStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // 64-bit stream id: high bits select the channel, low bits the rep.
        rng.set_stream((channel.id() << 56) | (rep & 0x00ff_ffff_ffff_ffff));
        UniformStream { rng }
    }
}

/// Sequence of i.i.d. uniforms on the open interval (0, 1).
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    /// Next uniform, strictly inside (0, 1) so logs never hit -inf.
    pub fn next_uniform(&mut self) -> f64 {
        // 53 random bits centered in their cell: (k + 0.5) * 2^-53.
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }
}

//! Counter-based random streams keyed by `(seed, generation, phase, agent)`.
//!
//! Every agent action draws from its own stream, so the outcome of a phase
//! does not depend on the order in which agents are evaluated.

use rand::rand_core::impls;
use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed and a path of indices into a child seed. Order-sensitive.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed.wrapping_add(GOLDEN)), |acc, &x| {
        mix64(acc.rotate_left(23) ^ mix64(x.wrapping_add(GOLDEN)))
    })
}

/// Model phase that consumes randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cheat = 1,
    Reproduce = 2,
    Mutate = 3,
}

/// A stream whose n-th output is `mix64(key + n * GOLDEN)`.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
}

impl StreamRng {
    pub fn from_key(key: u64) -> Self {
        StreamRng { state: key }
    }

    pub fn for_agent(seed: u64, generation: u64, phase: Phase, agent: u64) -> Self {
        PhaseStreams::new(seed, generation, phase).agent(agent)
    }
}

/// Stream factory for one `(seed, generation, phase)`, hashing that prefix once.
#[derive(Debug, Clone, Copy)]
pub struct PhaseStreams {
    base: u64,
}

impl PhaseStreams {
    pub fn new(seed: u64, generation: u64, phase: Phase) -> Self {
        PhaseStreams {
            base: derive_seed(seed, &[generation, phase as u64]),
        }
    }

    #[inline]
    pub fn agent(&self, agent: u64) -> StreamRng {
        StreamRng::from_key(mix64(self.base ^ mix64(agent.wrapping_add(GOLDEN))))
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

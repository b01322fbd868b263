//! Seed derivation for reproducible, order-independent random streams.
//!
//! Every random draw in the crate comes from a [`SampleRng`] seeded by
//! [`MasterSeed::derive`], which mixes the master seed with a role tag and an index.
//! Changing how many trials run never perturbs the streams of earlier trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

/// Role tags separating independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Operator = 1,
    Train = 2,
    MonteCarlo = 3,
    Test = 4,
    Trial = 5,
    Noise = 6,
    Images = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MasterSeed(pub u64);

impl MasterSeed {
    pub fn derive(self, role: Role, index: u64) -> MasterSeed {
        let mut h = splitmix(self.0 ^ 0x6a09_e667_f3bc_c908);
        h = splitmix(h ^ role as u64);
        MasterSeed(splitmix(h ^ index))
    }

    pub fn rng(self) -> SampleRng {
        SampleRng::seed_from_u64(self.0)
    }

    pub fn stream(self, role: Role, index: u64) -> SampleRng {
        self.derive(role, index).rng()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

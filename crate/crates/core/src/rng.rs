//! Named, index-addressable random streams derived from one root seed.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by
//! `(root, name, index)`, so results do not depend on how work is scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn stream(&self, name: &str) -> Rng {
        self.indexed(name, 0)
    }

    pub fn indexed(&self, name: &str, index: u64) -> Rng {
        let mut rng = Rng::seed_from_u64(splitmix(self.root ^ fnv1a(name)));
        rng.set_stream(index);
        rng
    }

    /// Child stream set for a nested component (e.g. one seed of a sweep).
    pub fn child(&self, name: &str, index: u64) -> Streams {
        Streams::new(splitmix(splitmix(self.root ^ fnv1a(name)) ^ index))
    }
}

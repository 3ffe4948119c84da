use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Derives one independent random stream per path from a master seed.
///
/// The stream for path `i` depends only on `(seed, i)`, so any path can be
/// replayed in isolation and results do not depend on how paths are
/// scheduled across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self, index: u64) -> PathRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        PathRng { rng }
    }
}

/// Per-path generator.
#[derive(Debug, Clone)]
pub struct PathRng {
    rng: ChaCha8Rng,
}

impl PathRng {
    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_normal(&mut self, out: &mut [f64], scale: f64) {
        for x in out {
            *x = scale * self.normal();
        }
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

//! Counter-style seeding: every (seed, λ, j, m, trial) tuple gets its own
//! ChaCha8 stream, so results do not depend on scheduling order.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedKey {
    pub seed: u64,
    pub lambda: f64,
    pub j: i32,
    pub m: u64,
    pub trial: u64,
}

impl SeedKey {
    pub fn new(seed: u64) -> Self {
        SeedKey { seed, lambda: 0.0, j: 0, m: 0, trial: 0 }
    }

    pub fn piece(seed: u64, lambda: f64, j: i32, m: usize) -> Self {
        SeedKey { seed, lambda, j, m: m as u64, trial: 0 }
    }

    pub fn trial(self, trial: u64) -> Self {
        SeedKey { trial, ..self }
    }

    pub fn stream(&self) -> u64 {
        let mut h = splitmix(self.seed ^ 0x243f_6a88_85a3_08d3);
        h = splitmix(h ^ self.lambda.to_bits());
        h = splitmix(h ^ (self.j as i64 as u64));
        h = splitmix(h ^ self.m);
        splitmix(h ^ self.trial)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.stream())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian<R: rand::Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

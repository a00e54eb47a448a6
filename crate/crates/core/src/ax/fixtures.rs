//! Seeded random inputs.
//!
//! Generator: ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`; values uniform on `[-1, 1)`. Fixture files under
//! `fixtures/` ship the concrete numbers so other implementations do not
//! need to reproduce the generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::types::{DerivMatrix, ElementField, GeomFactors};

pub const DEFAULT_SEED: u64 = 0x4E45_4B42; // "NEKB"

pub struct FixtureRng {
    rng: ChaCha8Rng,
}

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    pub fn vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.uniform()).collect()
    }

    pub fn field(&mut self, n: usize) -> ElementField {
        ElementField::from_raw(n, self.vec(n * n * n))
    }

    /// Arbitrary symmetric factors (not necessarily definite).
    pub fn geom(&mut self, n: usize) -> GeomFactors {
        GeomFactors::new(n, self.vec(6 * n * n * n)).expect("sized correctly")
    }

    /// Symmetric positive definite factors per point: `M^T M + 0.1 I`.
    pub fn geom_spd(&mut self, n: usize) -> GeomFactors {
        let mut values = Vec::with_capacity(6 * n * n * n);
        for _ in 0..n * n * n {
            let m: [f64; 9] = std::array::from_fn(|_| self.uniform());
            let s = |a: usize, b: usize| (0..3).map(|r| m[3 * r + a] * m[3 * r + b]).sum::<f64>();
            values.extend_from_slice(&[s(0, 0) + 0.1, s(0, 1), s(0, 2), s(1, 1) + 0.1, s(1, 2), s(2, 2) + 0.1]);
        }
        GeomFactors::new(n, values).expect("sized correctly")
    }

    pub fn deriv(&mut self, n: usize) -> DerivMatrix {
        DerivMatrix::new(n, self.vec(n * n)).expect("sized correctly")
    }
}

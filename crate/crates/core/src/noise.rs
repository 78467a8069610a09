//! Counter-addressed Gaussian increments.
//!
//! Each `(seed, path_index, counter)` triple owns a fixed window of a ChaCha8
//! keystream: the key comes from `seed`, the stream id is `path_index`, and the
//! word position is `counter * WORDS_PER_DRAW`. Draws are therefore
//! reproducible in isolation, independent of how paths are scheduled across
//! threads.
//!
//! A stream with `substeps = k` builds each increment as the sum of `k`
//! consecutive fine draws, so a path stepped at `k dt` sees the same Brownian
//! path as one stepped at `dt`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Keystream words reserved for one draw. Ziggurat sampling consumes two
/// words per normal plus rare rejections, so a few hundred normals fit with
/// a wide margin.
pub const WORDS_PER_DRAW: u128 = 1 << 16;

#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    path_index: u64,
    counter: u64,
    substeps: u32,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        Self { seed, path_index, counter: 0, substeps: 1, rng }
    }

    /// A stream positioned at `counter`.
    pub fn at(seed: u64, path_index: u64, counter: u64) -> Self {
        let mut s = Self::new(seed, path_index);
        s.counter = counter;
        s
    }

    /// Coarsening factor; see the module docs.
    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn substeps(&self) -> u32 {
        self.substeps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// `count` i.i.d. `N(0, variance)` values from the current window, then
    /// advances the counter.
    pub fn gaussians(&mut self, count: usize, variance: f64) -> DVector<f64> {
        debug_assert!(count < (WORDS_PER_DRAW / 8) as usize);
        self.rng.set_word_pos(u128::from(self.counter) * WORDS_PER_DRAW);
        self.counter += 1;
        let sd = variance.sqrt();
        DVector::from_fn(count, |_, _| {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            sd * z
        })
    }

    /// Independent driving increments `(dB, dC)`, each `N(0, dt I)` in
    /// `ambient_dim` coordinates.
    pub fn driving_increments(&mut self, ambient_dim: usize, dt: f64) -> (DVector<f64>, DVector<f64>) {
        let k = self.substeps;
        let mut all = self.gaussians(2 * ambient_dim, dt / f64::from(k));
        for _ in 1..k {
            all += self.gaussians(2 * ambient_dim, dt / f64::from(k));
        }
        let db = all.rows(0, ambient_dim).into_owned();
        let dc = all.rows(ambient_dim, ambient_dim).into_owned();
        (db, dc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_exact() {
        let mut a = NoiseStream::new(42, 7);
        let first = a.driving_increments(3, 0.01);
        let second = a.driving_increments(3, 0.01);
        assert_eq!(a.counter(), 2);
        let mut b = NoiseStream::at(42, 7, 1);
        assert_eq!(b.driving_increments(3, 0.01), second);
        let mut c = NoiseStream::at(42, 7, 0);
        assert_eq!(c.driving_increments(3, 0.01), first);
        assert_ne!(first, second);
    }

    #[test]
    fn coarse_increments_sum_fine_ones() {
        let mut fine = NoiseStream::new(3, 1);
        let (a1, c1) = fine.driving_increments(2, 0.5);
        let (a2, c2) = fine.driving_increments(2, 0.5);
        let mut coarse = NoiseStream::new(3, 1).with_substeps(2);
        let (a, c) = coarse.driving_increments(2, 1.0);
        assert_eq!(coarse.counter(), 2);
        assert!((a - (a1 + a2)).amax() < 1e-15);
        assert!((c - (c1 + c2)).amax() < 1e-15);
    }

    #[test]
    fn paths_and_seeds_differ() {
        let x = NoiseStream::new(1, 0).gaussians(4, 1.0);
        assert_ne!(x, NoiseStream::new(1, 1).gaussians(4, 1.0));
        assert_ne!(x, NoiseStream::new(2, 0).gaussians(4, 1.0));
    }

    #[test]
    fn moments_and_independence() {
        let dt = 1e-3;
        let dim = 2;
        let samples = 500_000;
        let mut s = NoiseStream::new(2024, 0);
        let (mut sum, mut sq) = ([0.0; 2], [0.0; 2]);
        let mut cross = 0.0;
        for _ in 0..samples {
            let (db, dc) = s.driving_increments(dim, dt);
            for i in 0..dim {
                sum[0] += db[i];
                sum[1] += dc[i];
                sq[0] += db[i] * db[i];
                sq[1] += dc[i] * dc[i];
            }
            cross += db[0] * dc[0];
        }
        let count = (samples * dim) as f64;
        for k in 0..2 {
            let mean = sum[k] / count;
            let var = sq[k] / count - mean * mean;
            assert!((var / dt - 1.0).abs() < 0.01, "variance {var}");
            assert!(mean.abs() < 3.0 * (dt / count).sqrt());
        }
        // E[dB dC] = 0 with standard error dt / sqrt(samples)
        let cov = cross / samples as f64;
        assert!(cov.abs() < 3.0 * dt / (samples as f64).sqrt(), "cross covariance {cov}");
    }
}

//! Seeded synthetic multi-label data for tests and benchmarks.
//!
//! The first `informative` features drive the labels through a random linear
//! map plus noise; the remaining features are pure noise. Each label is
//! thresholded at its own 70th percentile, giving a label density near 0.3.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub informative: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n_samples: usize, n_features: usize, n_labels: usize, seed: u64) -> Self {
        Self {
            n_samples,
            n_features,
            n_labels,
            informative: n_features.div_ceil(4).max(1),
            noise: 0.5,
            seed,
        }
    }

    pub fn generate(&self) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
        let (n, d, c) = (self.n_samples, self.n_features, self.n_labels);
        let k = self.informative.min(d);
        let x = DMatrix::from_fn(d, n, |_, _| gauss());
        let mixing = DMatrix::from_fn(c, k, |_, _| gauss());
        let mut latent = mixing * x.rows(0, k);
        latent.apply(|v| *v += self.noise * gauss());

        let mut y = DMatrix::zeros(n, c);
        for l in 0..c {
            let mut row: Vec<f64> = latent.row(l).iter().copied().collect();
            row.sort_by(f64::total_cmp);
            let cut = row[((n as f64) * 0.7) as usize % n];
            for i in 0..n {
                if latent[(l, i)] >= cut {
                    y[(i, l)] = 1.0;
                }
            }
        }
        Dataset::from_matrices(x, y).expect("synthetic data is well-formed")
    }
}

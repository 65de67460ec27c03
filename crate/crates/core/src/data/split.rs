use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

const MAX_DRAWS: usize = 10;

/// Partition of sample indices into labeled and unlabeled sets, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiSplit {
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    seed: u64,
}

impl SemiSplit {
    /// Builds a split from explicit labeled indices over `n` samples.
    pub fn from_labeled(n: usize, mut labeled: Vec<usize>, seed: u64) -> Result<Self> {
        labeled.sort_unstable();
        labeled.dedup();
        if labeled.is_empty() {
            return Err(Error::InvalidInput(
                "split needs at least one labeled sample".into(),
            ));
        }
        if labeled.last().is_some_and(|&i| i >= n) {
            return Err(Error::InvalidInput("labeled index out of range".into()));
        }
        let mut mask = vec![false; n];
        for &i in &labeled {
            mask[i] = true;
        }
        let unlabeled = (0..n).filter(|&i| !mask[i]).collect();
        Ok(Self {
            labeled,
            unlabeled,
            seed,
        })
    }

    pub fn labeled_indices(&self) -> &[usize] {
        &self.labeled
    }

    pub fn unlabeled_indices(&self) -> &[usize] {
        &self.unlabeled
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_samples(&self) -> usize {
        self.labeled.len() + self.unlabeled.len()
    }

    /// `mask[i]` is true iff sample `i` is labeled.
    pub fn labeled_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_samples()];
        for &i in &self.labeled {
            mask[i] = true;
        }
        mask
    }
}

/// Number of labeled samples for a fraction of `n`, i.e. `⌈fraction·n⌉`.
pub(crate) fn labeled_count(n: usize, fraction: f64) -> usize {
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    let raw = fraction * n as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Draws a seeded labeled/unlabeled split.
///
/// Up to ten shuffles are tried so that every label with at least one
/// positive sample has a positive in the labeled set; if none succeeds the
/// last draw is kept and a warning is logged.
pub fn make_split(dataset: &Dataset, labeled_fraction: f64, seed: u64) -> Result<SemiSplit> {
    if !(labeled_fraction > 0.0 && labeled_fraction <= 1.0) {
        return Err(Error::param(
            "labeled_fraction",
            format!("{labeled_fraction} is outside (0, 1]"),
        ));
    }
    let n = dataset.n_samples();
    let n_l = labeled_count(n, labeled_fraction);
    if n_l == 0 {
        return Err(Error::param(
            "labeled_fraction",
            format!("{labeled_fraction} of {n} samples labels nobody"),
        ));
    }

    let labels = dataset.labels();
    let present: Vec<usize> = (0..labels.ncols())
        .filter(|&j| labels.column(j).iter().any(|&v| v > 0.0))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut draw = Vec::new();
    for attempt in 0..MAX_DRAWS {
        indices.shuffle(&mut rng);
        draw = indices[..n_l].to_vec();
        let covered = present
            .iter()
            .all(|&j| draw.iter().any(|&i| labels[(i, j)] > 0.0));
        if covered {
            break;
        }
        if attempt + 1 == MAX_DRAWS {
            log::warn!(
                "labeled split (n_l = {n_l}, seed = {seed}) misses positives for some labels after {MAX_DRAWS} draws"
            );
        }
    }
    SemiSplit::from_labeled(n, draw, seed)
}

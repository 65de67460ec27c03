use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Per-feature z-score parameters (population standard deviation).
///
/// Features with zero variance keep `std = 0` and pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardizationStats {
    pub fn fit(features: &DMatrix<f64>) -> Self {
        let n = features.ncols() as f64;
        let mut mean = Vec::with_capacity(features.nrows());
        let mut std = Vec::with_capacity(features.nrows());
        for row in features.row_iter() {
            let mu = row.sum() / n;
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean.push(mu);
            std.push(var.sqrt());
        }
        Self { mean, std }
    }

    /// Applies `(x − mean) / std` per feature; zero-variance features are left untouched.
    pub fn apply(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.nrows() != self.mean.len() {
            return Err(Error::Shape(format!(
                "stats cover {} features, matrix has {}",
                self.mean.len(),
                features.nrows()
            )));
        }
        let mut out = features.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            let sd = self.std[i];
            if sd > 0.0 {
                let mu = self.mean[i];
                row.apply(|v| *v = (*v - mu) / sd);
            }
        }
        Ok(out)
    }

    pub fn apply_sample(&self, sample: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.apply(&DMatrix::from_column_slice(sample.len(), 1, sample.as_slice()))?;
        Ok(m.column(0).into_owned())
    }
}

/// Standardizes a training dataset and returns the stats for held-out data.
pub fn standardize(dataset: &Dataset) -> (Dataset, StandardizationStats) {
    let stats = StandardizationStats::fit(dataset.features());
    let features = stats
        .apply(dataset.features())
        .expect("stats fitted on the same matrix");
    let out = Dataset::new(
        features,
        dataset.labels().clone(),
        dataset.feature_names().to_vec(),
        dataset.label_names().to_vec(),
    )
    .expect("standardization keeps a valid dataset valid");
    (out, stats)
}

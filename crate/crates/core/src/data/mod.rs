//! Dataset types, ingestion and semi-supervised splits.
//!
//! Features are stored column-per-sample (`d × n`); labels are stored
//! row-per-sample (`n × c`) with entries exactly `0.0` or `1.0`.

mod arff;
mod csv;
mod split;
mod standardize;

pub use self::arff::{load_mulan, parse_mulan};
pub use self::csv::{load_csv, parse_csv};
pub use self::split::{make_split, SemiSplit};
pub use self::standardize::{standardize, StandardizationStats};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: DMatrix<f64>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset after checking shapes, finiteness and that labels are binary.
    pub fn new(
        features: DMatrix<f64>,
        labels: DMatrix<f64>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let (d, n) = features.shape();
        if d == 0 {
            return Err(Error::InvalidInput("dataset has no features".into()));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 samples, got {n}"
            )));
        }
        if labels.nrows() != n {
            return Err(Error::Shape(format!(
                "{} label rows for {} samples",
                labels.nrows(),
                n
            )));
        }
        if labels.ncols() == 0 {
            return Err(Error::InvalidInput("dataset has no labels".into()));
        }
        if feature_names.len() != d || label_names.len() != labels.ncols() {
            return Err(Error::Shape("name list length does not match matrix".into()));
        }
        if let Some((i, j)) = first_non_finite(&features) {
            return Err(Error::InvalidInput(format!(
                "non-finite value for feature {i} of sample {j}"
            )));
        }
        if let Some(v) = labels.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidInput(format!("label entry {v} is not 0 or 1")));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            label_names,
        })
    }

    /// Builds a dataset with generated names (`f0..`, `l0..`).
    pub fn from_matrices(features: DMatrix<f64>, labels: DMatrix<f64>) -> Result<Self> {
        let feature_names = (0..features.nrows()).map(|i| format!("f{i}")).collect();
        let label_names = (0..labels.ncols()).map(|j| format!("l{j}")).collect();
        Self::new(features, labels, feature_names, label_names)
    }

    /// `d × n` feature matrix, one column per sample.
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// `n × c` binary label matrix, one row per sample.
    pub fn labels(&self) -> &DMatrix<f64> {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.ncols()
    }

    /// Restricts the dataset to the given samples, in the given order.
    pub fn select_samples(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select_columns(indices);
        let labels = self.labels.select_rows(indices);
        Self::new(
            features,
            labels,
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    /// Restricts the dataset to the given features, in the given order.
    pub fn select_features(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select_rows(indices);
        let names = indices.iter().map(|&i| self.feature_names[i].clone()).collect();
        Self::new(features, self.labels.clone(), names, self.label_names.clone())
    }

    /// Appends the samples of `other`; feature and label names must agree.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if self.feature_names != other.feature_names || self.label_names != other.label_names {
            return Err(Error::Shape(
                "datasets have different feature or label columns".into(),
            ));
        }
        let n = self.n_samples() + other.n_samples();
        let mut features = DMatrix::zeros(self.n_features(), n);
        features
            .columns_mut(0, self.n_samples())
            .copy_from(&self.features);
        features
            .columns_mut(self.n_samples(), other.n_samples())
            .copy_from(&other.features);
        let mut labels = DMatrix::zeros(n, self.n_labels());
        labels.rows_mut(0, self.n_samples()).copy_from(&self.labels);
        labels
            .rows_mut(self.n_samples(), other.n_samples())
            .copy_from(&other.labels);
        Self::new(
            features,
            labels,
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }
}

fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

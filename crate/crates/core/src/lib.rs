//! Semi-supervised multi-label feature selection with sparse graph learning.
//!
//! Given features `X` (`d × n`), labels for a subset of the samples and an
//! initial sample graph, the solver jointly learns
//!
//! * a row-sparse regression `W` from features to soft labels `F`,
//! * an orthonormal shared label subspace `Q`,
//! * a sparse symmetric reconstruction graph `M` over the samples,
//!
//! and ranks features by the row norms of `W`. The [`evaluation`] module
//! scores a ranking with ML-kNN and the usual multi-label metrics.
//!
//! ```no_run
//! use sgmfs::data::{load_mulan, make_split, standardize};
//! use sgmfs::solver::{fit, select_features, SgmfsConfig};
//!
//! let ds = load_mulan("emotions.arff", "emotions.xml")?;
//! let (ds, _stats) = standardize(&ds);
//! let split = make_split(&ds, 0.15, 7)?;
//! let (_state, ranking) = fit(&ds, &split, &SgmfsConfig::default())?;
//! let top = select_features(&ranking, 0.2)?;
//! # Ok::<(), sgmfs::Error>(())
//! ```

pub mod data;
pub mod error;
pub mod evaluation;
pub mod graph;
mod linalg;
pub mod solver;
pub mod subspace;
pub mod synthetic;

pub use error::{Error, Result};

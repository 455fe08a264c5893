//! Frame-level audio event detection toolkit.
//!
//! The pipeline turns a recording into 25 ms / 10 ms-hop analysis frames,
//! computes a 105-dimensional descriptor vector per frame (spectral shape,
//! noise measures, prosody, plus first and second derivatives), ranks and
//! selects features with histogram-based mutual information, and trains one
//! of three frame classifiers (GMM, MLP, SVM) evaluated through 10-fold
//! cross-validation, ROC curves and the revised error rate.

pub mod classifiers;
pub mod error;
pub mod eval;
pub mod features;
pub mod info;
pub mod labels;
pub mod signal;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};

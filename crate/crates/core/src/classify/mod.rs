//! Trainable classifiers over real-valued feature vectors.
//!
//! Four families are provided: a soft-margin SVM (one-vs-one, linear or RBF
//! kernel), linear discriminant analysis, k-nearest neighbours and a CART
//! decision tree. The low-level `*_fit` functions work on raw features;
//! [`TrainedModel`] adds per-dimension standardization where it applies and
//! handles persistence.

mod dataset;
mod knn;
mod lda;
mod model;
mod svm;
mod tree;

pub use dataset::LabeledDataset;
pub use knn::{knn_fit, KnnModel, DEFAULT_K};
pub use lda::{lda_fit, LdaModel, LDA_MAX_DIM};
pub use model::{load_model, save_model, Classifier, ClassifierKind, Standardizer, TrainParams, TrainedModel, EMSM_MAGIC, EMSM_VERSION};
pub use svm::{svm_fit, BinaryMachine, Kernel, KernelSpec, SvmModel, SvmParams};
pub use tree::{gini, tree_fit, Split, TreeModel, TreeNode, TreeParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("need at least two classes with samples, found {0}")]
    SingleClass(usize),
    #[error("feature dimension mismatch: model expects {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pooled covariance is singular after regularization")]
    SingularCovariance,
    #[error("model format error: {0}")]
    Format(String),
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ClassifyError>;

pub(crate) fn check_query(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(ClassifyError::DimensionMismatch { expected, actual: x.len() });
    }
    Ok(())
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax_first<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

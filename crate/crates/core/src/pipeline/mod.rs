//! End-to-end orchestration.
//!
//! Frames become evolution matrices through [`Recognizer`]; cohorts of
//! matrices are split, reduced to windowed feature vectors and fed to the
//! four screening classifiers.

mod cost;
mod cv;
mod mci;
mod recognize;
mod split;

pub use cost::{cost_report, LayerCost, LayerCostKind, NetworkCostReport};
pub use cv::{cross_validate, cross_validate_cohort, cross_validate_with, stratified_folds, CvReport, DEFAULT_FOLDS};
pub use mci::{
    evaluate_all, evaluate_mci, mci_dataset, select_features, train_mci, ClassifierResult, EvaluationReport, MciModel, Participant,
    WindowSource, MCI_CLASSES, REFERENCE_ACCURACY,
};
pub use recognize::{
    extract_face_features, run_emotion_recognition, train_emotion_model, EmotionClassifier, EmotionModel, LabelMode, Recognizer,
    StubEmotionModel,
};
pub use split::{split_dataset, split_indices, SplitSpec};

use thiserror::Error;

use crate::analytics::AnalyticsError;
use crate::classify::ClassifyError;
use crate::face::FaceError;
use crate::io::IoError;
use crate::net::NetError;
use crate::tensor::TensorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Face(#[from] FaceError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frame {index}: {source}")]
    Frame { index: usize, source: Box<PipelineError> },
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    pub(crate) fn at_frame(self, index: usize) -> Self {
        PipelineError::Frame { index, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

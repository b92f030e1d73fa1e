//! Viola-Jones style face localization.
//!
//! Windows are scored by an attentional cascade of Haar-like stumps over an
//! integral image, scanned at multiple scales, and overlapping accepts are
//! merged. Cascade training is not part of this crate; cascades are built
//! in code ([`Cascade::center_surround`]) or loaded from JSON.

mod cascade;
mod detect;
mod integral;

pub use cascade::{Cascade, CascadeOutcome, HaarRect, HaarStump, Stage};
pub use detect::{crop_and_resize, detect_faces, largest_face, merge_detections, scan_windows, DetectParams, Detection, FACE_SIZE};
pub use integral::{IntegralImage, Window};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaceError {
    #[error("expected a single-channel image, got {0} channels")]
    NotGray(usize),
    #[error("window {0:?} lies outside the {1}x{2} image")]
    WindowOutOfBounds(Window, usize, usize),
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),
    #[error("invalid detection parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate crop box {0:?}")]
    DegenerateBox(Window),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, FaceError>;

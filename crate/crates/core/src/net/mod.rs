//! Data-driven layer graph (MobileNetV2 trunk by default), weight loading
//! and feature extraction at a named layer.

mod forward;
mod graph;
mod weights;

pub use forward::{random_weights, FeatureVector, Network};
pub use graph::{LayerKind, LayerSpec, NetworkGraph, DEFAULT_FEATURE_LAYER, MOBILENET_V2_TOPOLOGY};
pub use weights::{load_weights, save_weights, WeightContainer, WeightTensor, NWF1_MAGIC};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("weight file format error: {0}")]
    Format(String),
    #[error("weight file truncated at byte {0}")]
    Truncated(usize),
    #[error("duplicate tensor name '{0}'")]
    DuplicateTensor(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("layer '{layer}': missing weight tensor '{key}'")]
    MissingWeight { layer: String, key: String },
    #[error("layer '{layer}': shape mismatch: {detail}")]
    Shape { layer: String, detail: String },
    #[error("unknown layer '{name}'; available layers: {available}")]
    UnknownLayer { name: String, available: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, NetError>;

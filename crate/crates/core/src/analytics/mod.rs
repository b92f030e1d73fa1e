//! Emotion-evolution analytics.
//!
//! A participant's recording becomes an [`EvolutionMatrix`]: one emotion
//! distribution per frame. Cohort-level occurrence series count, per frame,
//! how many members of a group show each emotion; the frame window where the
//! two groups differ most selects the features used for screening.

mod cohort;
mod emotion;
mod occurrence;

pub use cohort::{assign_group, Group, ParticipantRecord, StimulusTimeline};
pub use emotion::{Emotion, EmotionDistribution, EvolutionMatrix, EVOLUTION_CSV_HEADER};
pub use occurrence::{
    common_length, group_difference, mci_feature_vector, occurrence_series, select_window, select_window_values, DifferenceSeries,
    FeatureSpec, FrameWindow, OccurrenceSeries, DEFAULT_WINDOW,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("invalid emotion distribution at frame {frame}: {detail}")]
    InvalidDistribution { frame: usize, detail: String },
    #[error("evolution matrix needs at least one frame")]
    EmptyMatrix,
    #[error("MoCA score {0} is outside the screened bands (20-30)")]
    OutOfBand(i64),
    #[error("invalid participant record {id}: {detail}")]
    InvalidRecord { id: String, detail: String },
    #[error("group {0} has no participants")]
    EmptyGroup(Group),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("unknown emotion {0:?}")]
    UnknownEmotion(String),
    #[error("CSV error at line {line}: {detail}")]
    Csv { line: usize, detail: String },
    #[error("invalid timeline: {0}")]
    InvalidTimeline(String),
}

pub type Result<T> = std::result::Result<T, AnalyticsError>;

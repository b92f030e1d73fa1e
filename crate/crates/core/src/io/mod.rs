//! File formats at the edges of the pipeline: binary PGM/PPM frames, cohort
//! and labeled-frame manifests, evolution-matrix files and occurrence plots.

mod manifest;
mod plot;
mod pnm;

pub use manifest::{read_cohort_manifest, read_labeled_frames, write_cohort_manifest, write_labeled_frames, CohortEntry, LabeledFrame};
pub use plot::{occurrence_csv, parse_occurrence_csv, render_occurrence_svg, write_occurrence_csv, write_occurrence_svg};
pub use pnm::{decode_pnm, encode_pnm, load_frames, read_pnm, write_pnm, Frame};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analytics::EvolutionMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{path}: {detail}")]
    Io { path: PathBuf, detail: String },
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },
    #[error("{path}: {detail}")]
    Inconsistent { path: PathBuf, detail: String },
    #[error("{path}:{line}: {detail}")]
    Manifest { path: PathBuf, line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, IoError>;

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::Io { path: path.to_path_buf(), detail: e.to_string() }
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Reads an evolution matrix; the participant id is the file stem.
pub fn read_evolution_csv(path: &Path) -> Result<EvolutionMatrix> {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    EvolutionMatrix::from_csv(id, &read_text(path)?).map_err(|e| IoError::Format { path: path.to_path_buf(), detail: e.to_string() })
}

pub fn write_evolution_csv(matrix: &EvolutionMatrix, path: &Path) -> Result<()> {
    write_file(path, matrix.to_csv())
}

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_text, write_file, IoError, Result};
use crate::analytics::{Emotion, Group, ParticipantRecord};

/// One line of a cohort manifest (JSON lines).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortEntry {
    pub id: String,
    pub moca: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Group>,
    pub frames_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<u32>,
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Parses a cohort manifest. Relative `frames_dir` entries resolve against
/// the manifest's directory. Blank lines and `#` comments are skipped.
pub fn read_cohort_manifest(path: &Path) -> Result<Vec<ParticipantRecord>> {
    let text = read_text(path)?;
    let base = base_dir(path);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |detail: String| IoError::Manifest { path: path.to_path_buf(), line: i + 1, detail };
        let entry: CohortEntry = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if !seen.insert(entry.id.clone()) {
            return Err(err(format!("duplicate participant id {:?}", entry.id)));
        }
        let record = ParticipantRecord::new(entry.id, Some(entry.moca), entry.group).map_err(|e| err(e.to_string()))?;
        out.push(record.with_frames(base.join(&entry.frames_dir), entry.fps));
    }
    if out.is_empty() {
        return Err(IoError::Manifest { path: path.to_path_buf(), line: 0, detail: "manifest lists no participants".into() });
    }
    Ok(out)
}

pub fn write_cohort_manifest(entries: &[CohortEntry], path: &Path) -> Result<()> {
    let mut text = String::new();
    for e in entries {
        text.push_str(&serde_json::to_string(e).expect("entry serializes"));
        text.push('\n');
    }
    write_file(path, text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledFrame {
    pub path: PathBuf,
    pub label: Emotion,
}

/// Parses `path,label` lines; relative paths resolve against the manifest's
/// directory.
pub fn read_labeled_frames(path: &Path) -> Result<Vec<LabeledFrame>> {
    let text = read_text(path)?;
    let base = base_dir(path);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |detail: String| IoError::Manifest { path: path.to_path_buf(), line: i + 1, detail };
        let (p, label) = line.rsplit_once(',').ok_or_else(|| err("expected `path,label`".into()))?;
        let label: Emotion = label.parse().map_err(|e: crate::analytics::AnalyticsError| err(e.to_string()))?;
        out.push(LabeledFrame { path: base.join(p.trim()), label });
    }
    if out.is_empty() {
        return Err(IoError::Manifest { path: path.to_path_buf(), line: 0, detail: "manifest lists no frames".into() });
    }
    Ok(out)
}

/// Writes paths relative to `root` when possible.
pub fn write_labeled_frames(frames: &[LabeledFrame], root: &Path, path: &Path) -> Result<()> {
    let mut text = String::new();
    for f in frames {
        let p = f.path.strip_prefix(root).unwrap_or(&f.path);
        text.push_str(&format!("{},{}\n", p.display(), f.label));
    }
    write_file(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohort_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cohort.jsonl");
        std::fs::write(
            &path,
            "# two participants\n{\"id\":\"h1\",\"moca\":27,\"frames_dir\":\"frames/h1\"}\n\n{\"id\":\"i1\",\"moca\":21,\"frames_dir\":\"/abs\",\"fps\":25}\n",
        )
        .unwrap();
        let recs = read_cohort_manifest(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].group, Group::Healthy);
        assert_eq!(recs[0].frames_dir.as_deref(), Some(dir.path().join("frames/h1").as_path()));
        assert_eq!(recs[1].frames_dir.as_deref(), Some(Path::new("/abs")));
        assert_eq!(recs[1].fps, Some(25));

        std::fs::write(&path, "{\"id\":\"a\",\"moca\":27,\"frames_dir\":\"x\"}\n{\"id\":\"a\",\"moca\":27,\"frames_dir\":\"y\"}\n")
            .unwrap();
        assert!(matches!(read_cohort_manifest(&path), Err(IoError::Manifest { line: 2, .. })));
        std::fs::write(&path, "{\"id\":\"a\",\"moca\":10,\"frames_dir\":\"x\"}\n").unwrap();
        assert!(read_cohort_manifest(&path).is_err());
        std::fs::write(&path, "{\"id\":\"a\",\"frames_dir\":\"x\"}\n").unwrap();
        assert!(read_cohort_manifest(&path).is_err());
    }

    #[test]
    fn labeled_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.csv");
        let frames = vec![
            LabeledFrame { path: dir.path().join("a/1.pgm"), label: Emotion::Happy },
            LabeledFrame { path: dir.path().join("b,2.pgm"), label: Emotion::Other },
        ];
        write_labeled_frames(&frames, dir.path(), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a/1.pgm,happy\nb,2.pgm,other\n");
        assert_eq!(read_labeled_frames(&path).unwrap(), frames);
        std::fs::write(&path, "x.pgm,bored\n").unwrap();
        assert!(matches!(read_labeled_frames(&path), Err(IoError::Manifest { line: 1, .. })));
    }
}

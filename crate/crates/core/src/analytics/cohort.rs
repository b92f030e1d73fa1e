use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Healthy,
    Impaired,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Healthy, Group::Impaired];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::Healthy => "healthy",
            Group::Impaired => "impaired",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "healthy" => Ok(Group::Healthy),
            "impaired" => Ok(Group::Impaired),
            other => Err(format!("unknown group {other:?} (expected healthy or impaired)")),
        }
    }
}

/// MoCA banding: 25–30 healthy, 20–24 impaired; anything else is rejected.
pub fn assign_group(moca: i64) -> Result<Group> {
    match moca {
        25..=30 => Ok(Group::Healthy),
        20..=24 => Ok(Group::Impaired),
        _ => Err(AnalyticsError::OutOfBand(moca)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub id: String,
    pub moca: Option<u8>,
    pub group: Group,
    pub frames_dir: Option<PathBuf>,
    pub fps: Option<u32>,
}

impl ParticipantRecord {
    /// Resolves the group from the MoCA score. An explicit `group` must agree
    /// with an in-band score; for out-of-band or missing scores it is required.
    pub fn new(id: impl Into<String>, moca: Option<i64>, group: Option<Group>) -> Result<Self> {
        let id = id.into();
        let invalid = |detail: String| AnalyticsError::InvalidRecord { id: id.clone(), detail };
        if let Some(m) = moca {
            if !(0..=30).contains(&m) {
                return Err(invalid(format!("MoCA score {m} outside 0-30")));
            }
        }
        let banded = moca.map(assign_group);
        let group = match (banded, group) {
            (Some(Ok(b)), Some(g)) if b != g => return Err(invalid(format!("group {g} contradicts MoCA band {b}"))),
            (Some(Ok(b)), _) => b,
            (_, Some(g)) => g,
            (Some(Err(e)), None) => return Err(invalid(e.to_string())),
            (None, None) => return Err(invalid("needs a MoCA score or a group".into())),
        };
        Ok(Self { moca: moca.map(|m| m as u8), id, group, frames_dir: None, fps: None })
    }

    pub fn with_frames(mut self, dir: impl Into<PathBuf>, fps: Option<u32>) -> Self {
        self.frames_dir = Some(dir.into());
        self.fps = fps;
        self
    }
}

/// Frame times and the stimulus shown at each; carried as metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusTimeline {
    pub times: Vec<f64>,
    pub stimuli: Vec<String>,
}

impl StimulusTimeline {
    pub fn new(times: Vec<f64>, stimuli: Vec<String>) -> Result<Self> {
        if times.len() != stimuli.len() {
            return Err(AnalyticsError::InvalidTimeline(format!("{} times for {} stimuli", times.len(), stimuli.len())));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalyticsError::InvalidTimeline("times must be finite and strictly increasing".into()));
        }
        Ok(Self { times, stimuli })
    }

    /// Evenly spaced frames at `fps`, all under one stimulus name.
    pub fn uniform(n: usize, fps: u32, stimulus: &str) -> Result<Self> {
        if fps == 0 {
            return Err(AnalyticsError::InvalidTimeline("fps must be positive".into()));
        }
        Self::new((0..n).map(|i| i as f64 / fps as f64).collect(), vec![stimulus.to_string(); n])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moca_bands() {
        assert_eq!(assign_group(26), Ok(Group::Healthy));
        assert_eq!(assign_group(25), Ok(Group::Healthy));
        assert_eq!(assign_group(30), Ok(Group::Healthy));
        assert_eq!(assign_group(22), Ok(Group::Impaired));
        assert_eq!(assign_group(20), Ok(Group::Impaired));
        assert_eq!(assign_group(19), Err(AnalyticsError::OutOfBand(19)));
        assert!(assign_group(31).is_err());
    }

    #[test]
    fn record_resolution() {
        assert_eq!(ParticipantRecord::new("a", Some(27), None).unwrap().group, Group::Healthy);
        assert_eq!(ParticipantRecord::new("a", Some(27), Some(Group::Healthy)).unwrap().group, Group::Healthy);
        assert!(ParticipantRecord::new("a", Some(27), Some(Group::Impaired)).is_err());
        assert_eq!(ParticipantRecord::new("a", Some(15), Some(Group::Impaired)).unwrap().group, Group::Impaired);
        assert!(ParticipantRecord::new("a", Some(15), None).is_err());
        assert!(ParticipantRecord::new("a", Some(40), None).is_err());
        assert!(ParticipantRecord::new("a", None, None).is_err());
    }

    #[test]
    fn timeline() {
        assert!(StimulusTimeline::new(vec![0.0, 0.0], vec!["a".into(), "a".into()]).is_err());
        assert!(StimulusTimeline::new(vec![0.0], vec![]).is_err());
        let t = StimulusTimeline::uniform(4, 2, "clip").unwrap();
        assert_eq!(t.times, vec![0.0, 0.5, 1.0, 1.5]);
    }

    #[test]
    fn group_names() {
        for g in Group::ALL {
            assert_eq!(g.name().parse::<Group>().unwrap(), g);
        }
    }
}

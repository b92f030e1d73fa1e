use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Result};

const SUM_TOLERANCE: f64 = 1e-9;

pub const EVOLUTION_CSV_HEADER: &str = "frame,happy,neutral,sad,angry,surprise,other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Happy,
    Neutral,
    Sad,
    Angry,
    Surprise,
    Other,
}

impl Emotion {
    /// Canonical order; indices below refer to positions in this array.
    pub const ALL: [Emotion; 6] = [Emotion::Happy, Emotion::Neutral, Emotion::Sad, Emotion::Angry, Emotion::Surprise, Emotion::Other];
    /// Emotions kept for screening features (surprise is dropped).
    pub const RETAINED: [Emotion; 5] = [Emotion::Happy, Emotion::Neutral, Emotion::Sad, Emotion::Angry, Emotion::Other];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Happy => "happy",
            Emotion::Neutral => "neutral",
            Emotion::Sad => "sad",
            Emotion::Angry => "angry",
            Emotion::Surprise => "surprise",
            Emotion::Other => "other",
        }
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|e| e.name().to_string()).collect()
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|e| e.name() == t).ok_or_else(|| AnalyticsError::UnknownEmotion(s.to_string()))
    }
}

/// Probabilities of the six emotions at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionDistribution([f64; 6]);

impl EmotionDistribution {
    pub fn new(p: [f64; 6]) -> std::result::Result<Self, String> {
        if let Some(i) = p.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(format!("entry {i} is {} (must be finite and non-negative)", p[i]));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("entries sum to {s}"));
        }
        Ok(Self(p))
    }

    /// Builds from a slice of six scores already normalized to sum to one.
    pub fn from_slice(p: &[f64]) -> std::result::Result<Self, String> {
        let arr: [f64; 6] = p.try_into().map_err(|_| format!("expected 6 entries, got {}", p.len()))?;
        Self::new(arr)
    }

    pub fn one_hot(e: Emotion) -> Self {
        let mut p = [0.0; 6];
        p[e.index()] = 1.0;
        Self(p)
    }

    pub fn values(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }

    /// Most probable emotion; ties go to the earlier canonical emotion.
    pub fn argmax(&self) -> Emotion {
        let mut best = 0;
        for i in 1..6 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Emotion::ALL[best]
    }
}

/// Emotion distributions over `n` frames for one participant (a 6 × n
/// column-stochastic matrix, stored column by column).
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    participant: String,
    columns: Vec<EmotionDistribution>,
}

impl EvolutionMatrix {
    pub fn new(participant: impl Into<String>, columns: Vec<EmotionDistribution>) -> Result<Self> {
        if columns.is_empty() {
            return Err(AnalyticsError::EmptyMatrix);
        }
        Ok(Self { participant: participant.into(), columns })
    }

    /// Validates raw per-frame columns.
    pub fn from_columns(participant: impl Into<String>, columns: &[[f64; 6]]) -> Result<Self> {
        let cols = columns
            .iter()
            .enumerate()
            .map(|(j, c)| EmotionDistribution::new(*c).map_err(|detail| AnalyticsError::InvalidDistribution { frame: j + 1, detail }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(participant, cols)
    }

    pub fn from_labels(participant: impl Into<String>, labels: &[Emotion]) -> Result<Self> {
        Self::new(participant, labels.iter().map(|&e| EmotionDistribution::one_hot(e)).collect())
    }

    pub fn participant(&self) -> &str {
        &self.participant
    }

    pub fn n_frames(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[EmotionDistribution] {
        &self.columns
    }

    pub fn column(&self, frame: usize) -> &EmotionDistribution {
        &self.columns[frame]
    }

    pub fn get(&self, e: Emotion, frame: usize) -> f64 {
        self.columns[frame].get(e)
    }

    pub fn argmax(&self, frame: usize) -> Emotion {
        self.columns[frame].argmax()
    }

    /// One-hot matrix of the per-frame argmax.
    pub fn hardened(&self) -> Self {
        Self {
            participant: self.participant.clone(),
            columns: self.columns.iter().map(|c| EmotionDistribution::one_hot(c.argmax())).collect(),
        }
    }

    /// First `n` frames (all of them if `n` is larger).
    pub fn truncated(&self, n: usize) -> Self {
        Self { participant: self.participant.clone(), columns: self.columns[..n.min(self.columns.len())].to_vec() }
    }

    /// CSV with header [`EVOLUTION_CSV_HEADER`] and one row per frame (frames
    /// numbered from 1). Values use the shortest representation that parses
    /// back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * 7 * self.columns.len());
        out.push_str(EVOLUTION_CSV_HEADER);
        out.push('\n');
        for (j, c) in self.columns.iter().enumerate() {
            out.push_str(&(j + 1).to_string());
            for v in c.values() {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(participant: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let csv_err = |line: usize, detail: String| AnalyticsError::Csv { line: line + 1, detail };
        match lines.next() {
            Some((_, h)) if h.trim() == EVOLUTION_CSV_HEADER => {}
            Some((i, h)) => return Err(csv_err(i, format!("expected header {EVOLUTION_CSV_HEADER:?}, got {h:?}"))),
            None => return Err(AnalyticsError::EmptyMatrix),
        }
        let mut columns = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(csv_err(i, format!("expected 7 fields, got {}", fields.len())));
            }
            let frame: usize = fields[0].parse().map_err(|_| csv_err(i, format!("bad frame number {:?}", fields[0])))?;
            if frame != columns.len() + 1 {
                return Err(csv_err(i, format!("frame {frame} out of sequence, expected {}", columns.len() + 1)));
            }
            let mut p = [0.0; 6];
            for (k, f) in fields[1..].iter().enumerate() {
                p[k] = f.parse().map_err(|_| csv_err(i, format!("bad value {f:?}")))?;
            }
            columns.push(EmotionDistribution::new(p).map_err(|d| csv_err(i, d))?);
        }
        Self::new(participant, columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        for (i, e) in Emotion::ALL.iter().enumerate() {
            assert_eq!(e.index(), i);
            assert_eq!(Emotion::from_index(i), Some(*e));
            assert_eq!(e.name().parse::<Emotion>().unwrap(), *e);
        }
        assert!(!Emotion::RETAINED.contains(&Emotion::Surprise));
        assert!("fear".parse::<Emotion>().is_err());
    }

    #[test]
    fn distribution_checks() {
        assert!(EmotionDistribution::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(EmotionDistribution::new([0.5, 0.4, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(EmotionDistribution::new([1.5, -0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(EmotionDistribution::from_slice(&[1.0]).is_err());
        let tie = EmotionDistribution::new([0.0, 0.0, 0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(tie.argmax(), Emotion::Sad);
    }

    #[test]
    fn single_happy_frame() {
        let m = EvolutionMatrix::from_labels("p", &[Emotion::Happy]).unwrap();
        assert_eq!(m.column(0).values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(EvolutionMatrix::from_labels("p", &[]).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = EvolutionMatrix::from_columns("p", &[[0.1, 0.2, 0.3, 0.4, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]]).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("frame,happy,neutral,sad,angry,surprise,other\n1,0.1,0.2,0.3,0.4,0,0\n"));
        assert_eq!(EvolutionMatrix::from_csv("p", &csv).unwrap(), m);
        assert!(matches!(EvolutionMatrix::from_csv("p", "x\n1,1,0,0,0,0,0"), Err(AnalyticsError::Csv { line: 1, .. })));
        let gap = format!("{EVOLUTION_CSV_HEADER}\n2,1,0,0,0,0,0\n");
        assert!(matches!(EvolutionMatrix::from_csv("p", &gap), Err(AnalyticsError::Csv { line: 2, .. })));
        let bad = format!("{EVOLUTION_CSV_HEADER}\n1,0.5,0,0,0,0,0\n");
        assert!(EvolutionMatrix::from_csv("p", &bad).is_err());
    }

    #[test]
    fn hardened_is_one_hot_argmax() {
        let m = EvolutionMatrix::from_columns("p", &[[0.2, 0.3, 0.1, 0.1, 0.2, 0.1], [0.5, 0.0, 0.0, 0.5, 0.0, 0.0]]).unwrap();
        let h = m.hardened();
        assert_eq!(h.argmax(0), Emotion::Neutral);
        assert_eq!(h.column(1).values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.truncated(1).n_frames(), 1);
        assert_eq!(m.truncated(9).n_frames(), 2);
    }
}

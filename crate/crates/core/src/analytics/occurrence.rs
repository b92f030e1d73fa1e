use serde::{Deserialize, Serialize};

use super::{AnalyticsError, Emotion, EvolutionMatrix, Group, Result};

pub const DEFAULT_WINDOW: usize = 60;

/// Per-frame share `U = N / T` of a group's members whose most probable
/// emotion is `emotion`. Counts are kept as integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceSeries {
    pub emotion: Emotion,
    pub group: Group,
    pub counts: Vec<usize>,
    pub group_size: usize,
}

impl OccurrenceSeries {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn value(&self, frame: usize) -> f64 {
        self.counts[frame] as f64 / self.group_size as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|j| self.value(j)).collect()
    }
}

/// Shortest frame count among `matrices`; logs a warning when they differ.
pub fn common_length(matrices: &[&EvolutionMatrix]) -> Option<usize> {
    let min = matrices.iter().map(|m| m.n_frames()).min()?;
    let max = matrices.iter().map(|m| m.n_frames()).max()?;
    if min != max {
        log::warn!("frame counts range from {min} to {max}; truncating to {min}");
    }
    Some(min)
}

/// Occurrence of `emotion` in `group` at every frame, using the per-frame
/// argmax of each member's matrix. Unequal lengths are truncated to the
/// shortest.
pub fn occurrence_series(matrices: &[&EvolutionMatrix], group: Group, emotion: Emotion) -> Result<OccurrenceSeries> {
    let n = common_length(matrices).ok_or(AnalyticsError::EmptyGroup(group))?;
    let counts = (0..n).map(|j| matrices.iter().filter(|m| m.argmax(j) == emotion).count()).collect();
    Ok(OccurrenceSeries { emotion, group, counts, group_size: matrices.len() })
}

/// Non-negative per-frame values `numerators[j] / denominator`, kept exact
/// so that window comparisons never suffer rounding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceSeries {
    pub numerators: Vec<u64>,
    pub denominator: u64,
}

impl DifferenceSeries {
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.numerators.iter().map(|&v| v as f64 / self.denominator as f64).collect()
    }

    /// Frame-wise sum of differences sharing one denominator.
    pub fn total(parts: &[DifferenceSeries]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| AnalyticsError::InvalidWindow("no difference series to add".into()))?;
        let mut numerators = vec![0u64; first.len()];
        for p in parts {
            if p.len() != first.len() {
                return Err(AnalyticsError::LengthMismatch(first.len(), p.len()));
            }
            if p.denominator != first.denominator {
                return Err(AnalyticsError::InvalidWindow(format!("denominators {} and {} differ", first.denominator, p.denominator)));
            }
            numerators.iter_mut().zip(&p.numerators).for_each(|(a, b)| *a += b);
        }
        Ok(Self { numerators, denominator: first.denominator })
    }
}

/// `|U_a(j) − U_b(j)|` at every frame.
pub fn group_difference(a: &OccurrenceSeries, b: &OccurrenceSeries) -> Result<DifferenceSeries> {
    if a.len() != b.len() {
        return Err(AnalyticsError::LengthMismatch(a.len(), b.len()));
    }
    let (ta, tb) = (a.group_size as u64, b.group_size as u64);
    let numerators = a.counts.iter().zip(&b.counts).map(|(&na, &nb)| (na as u64 * tb).abs_diff(nb as u64 * ta)).collect();
    Ok(DifferenceSeries { numerators, denominator: ta * tb })
}

/// Contiguous frame range `[start, start + width)`, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameWindow {
    pub start: usize,
    pub width: usize,
}

impl FrameWindow {
    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start..self.end()).contains(&frame)
    }

    /// One-based inclusive frame numbers, as printed in reports.
    pub fn frame_numbers(&self) -> (usize, usize) {
        (self.start + 1, self.end())
    }
}

fn check_width(width: usize, n: usize) -> Result<()> {
    if width == 0 || width > n {
        return Err(AnalyticsError::InvalidWindow(format!("width {width} must be in 1..={n}")));
    }
    Ok(())
}

/// Window of `width` frames with the largest summed difference; ties go to
/// the earliest window.
pub fn select_window(diff: &DifferenceSeries, width: usize) -> Result<FrameWindow> {
    check_width(width, diff.len())?;
    let v = &diff.numerators;
    let mut sum: u64 = v[..width].iter().sum();
    let (mut best, mut best_start) = (sum, 0);
    for start in 1..=v.len() - width {
        sum = sum + v[start + width - 1] - v[start - 1];
        if sum > best {
            best = sum;
            best_start = start;
        }
    }
    Ok(FrameWindow { start: best_start, width })
}

/// Floating-point variant of [`select_window`] over arbitrary scores; each
/// window is summed directly so results do not depend on scan history.
pub fn select_window_values(values: &[f64], width: usize) -> Result<FrameWindow> {
    check_width(width, values.len())?;
    let mut best = (f64::NEG_INFINITY, 0);
    for start in 0..=values.len() - width {
        let s: f64 = values[start..start + width].iter().sum();
        if s > best.0 {
            best = (s, start);
        }
    }
    Ok(FrameWindow { start: best.1, width })
}

/// Rows for `emotions` restricted to `window`, flattened emotion by emotion.
pub fn mci_feature_vector(matrix: &EvolutionMatrix, window: &FrameWindow, emotions: &[Emotion]) -> Result<Vec<f64>> {
    if window.width == 0 || window.end() > matrix.n_frames() {
        return Err(AnalyticsError::InvalidWindow(format!(
            "frames {}..{} exceed the {} frames of {}",
            window.start,
            window.end(),
            matrix.n_frames(),
            matrix.participant()
        )));
    }
    let mut out = Vec::with_capacity(emotions.len() * window.width);
    for &e in emotions {
        out.extend((window.start..window.end()).map(|j| matrix.get(e, j)));
    }
    Ok(out)
}

/// Frozen feature selection: which frames and emotions form a participant's
/// screening vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub window: FrameWindow,
    pub emotions: Vec<Emotion>,
}

impl FeatureSpec {
    /// Picks the window where the two groups' occurrence curves, summed over
    /// the retained emotions, differ most.
    pub fn select(healthy: &[&EvolutionMatrix], impaired: &[&EvolutionMatrix], width: usize) -> Result<(Self, DifferenceSeries)> {
        let all: Vec<&EvolutionMatrix> = healthy.iter().chain(impaired).copied().collect();
        let n = common_length(&all).ok_or(AnalyticsError::EmptyGroup(Group::Healthy))?;
        let trim = |ms: &[&EvolutionMatrix]| ms.iter().map(|m| m.truncated(n)).collect::<Vec<_>>();
        let (h, i) = (trim(healthy), trim(impaired));
        let (h, i): (Vec<&EvolutionMatrix>, Vec<&EvolutionMatrix>) = (h.iter().collect(), i.iter().collect());
        let parts = Emotion::RETAINED
            .iter()
            .map(|&e| group_difference(&occurrence_series(&h, Group::Healthy, e)?, &occurrence_series(&i, Group::Impaired, e)?))
            .collect::<Result<Vec<_>>>()?;
        let diff = DifferenceSeries::total(&parts)?;
        let window = select_window(&diff, width)?;
        Ok((Self { window, emotions: Emotion::RETAINED.to_vec() }, diff))
    }

    pub fn len(&self) -> usize {
        self.emotions.len() * self.window.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn features(&self, matrix: &EvolutionMatrix) -> Result<Vec<f64>> {
        mci_feature_vector(matrix, &self.window, &self.emotions)
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::integral::{IntegralImage, Window};
use super::{FaceError, Result};

/// Weighted rectangle in unit-window coordinates (`[0, 1]` on both axes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub weight: f64,
}

impl HaarRect {
    pub fn new(x: f64, y: f64, w: f64, h: f64, weight: f64) -> Self {
        Self { x, y, w, h, weight }
    }

    /// Pixel rectangle covered inside `win`; edges are rounded independently
    /// so adjacent unit rectangles tile without gaps.
    pub fn in_window(&self, win: &Window) -> Window {
        let edge = |origin: usize, extent: usize, f: f64| origin + ((f * extent as f64).round() as usize).min(extent);
        let x0 = edge(win.x, win.w, self.x);
        let y0 = edge(win.y, win.h, self.y);
        let x1 = edge(win.x, win.w, self.x + self.w).max(x0 + 1).min(win.x + win.w);
        let y1 = edge(win.y, win.h, self.y + self.h).max(y0 + 1).min(win.y + win.h);
        let x0 = x0.min(x1 - 1);
        let y0 = y0.min(y1 - 1);
        Window::new(x0, y0, x1 - x0, y1 - y0)
    }
}

/// Decision stump over a Haar-like feature.
///
/// The feature is `sum(weight_i * mean_i) / sigma`, where `mean_i` is the
/// mean intensity under rectangle `i` and `sigma` the window's standard
/// deviation (floored at 1). The stump votes `left_value` when the feature is
/// below `threshold`, `right_value` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarStump {
    pub rectangles: Vec<HaarRect>,
    pub threshold: f64,
    pub left_value: f64,
    pub right_value: f64,
}

impl HaarStump {
    pub fn feature(&self, ii: &IntegralImage, win: &Window, sigma: f64) -> f64 {
        let total: f64 = self
            .rectangles
            .iter()
            .map(|r| {
                let px = r.in_window(win);
                r.weight * ii.sum_unchecked(&px) / px.area() as f64
            })
            .sum();
        total / sigma
    }

    pub fn vote(&self, feature: f64) -> f64 {
        if feature < self.threshold {
            self.left_value
        } else {
            self.right_value
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub stage_threshold: f64,
    pub stumps: Vec<HaarStump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    pub base_window: (usize, usize),
    pub stages: Vec<Stage>,
}

/// Result of running a cascade on one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeOutcome {
    pub accepted: bool,
    /// Number of stages passed before acceptance or rejection.
    pub stages_passed: usize,
    /// Accumulated stage margins `sum(stage_sum - stage_threshold)` over
    /// the stages evaluated.
    pub score: f64,
}

const MIN_SIGMA: f64 = 1.0;

impl Cascade {
    pub fn new(base_window: (usize, usize), stages: Vec<Stage>) -> Result<Self> {
        let c = Self { base_window, stages };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FaceError::InvalidCascade(m));
        if self.base_window.0 == 0 || self.base_window.1 == 0 {
            return bad(format!("base window {:?} must be positive", self.base_window));
        }
        if self.stages.is_empty() {
            return bad("cascade needs at least one stage".into());
        }
        for (s, stage) in self.stages.iter().enumerate() {
            if stage.stumps.is_empty() {
                return bad(format!("stage {s} has no stumps"));
            }
            for (k, stump) in stage.stumps.iter().enumerate() {
                if stump.rectangles.len() < 2 {
                    return bad(format!("stage {s} stump {k}: needs at least two rectangles"));
                }
                for r in &stump.rectangles {
                    let inside = r.x >= 0.0 && r.y >= 0.0 && r.w > 0.0 && r.h > 0.0 && r.x + r.w <= 1.0 + 1e-9 && r.y + r.h <= 1.0 + 1e-9;
                    if !inside || !r.weight.is_finite() {
                        return bad(format!("stage {s} stump {k}: rectangle {r:?} not inside the unit window"));
                    }
                }
                if stump.threshold.is_nan() || !stump.left_value.is_finite() || !stump.right_value.is_finite() {
                    return bad(format!("stage {s} stump {k}: non-finite parameters"));
                }
            }
            if stage.stage_threshold.is_nan() {
                return bad(format!("stage {s}: NaN threshold"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Cascade = serde_json::from_str(text).map_err(|e| FaceError::InvalidCascade(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| FaceError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cascade serializes")
    }

    /// Geometric test cascade for a bright square on a darker surround
    /// (the face proxy drawn by [`crate::synth`]).
    ///
    /// Stage 1 asks for a centre brighter than the window as a whole; stage 2
    /// asks for the centre to be brighter than each of the four border bands;
    /// stage 3 asks for the centre's own edges to be brighter than the
    /// neighbouring band, which rejects windows much larger than the square.
    pub fn center_surround() -> Self {
        let center = HaarRect::new(0.25, 0.25, 0.5, 0.5, 1.0);
        let stump =
            |other: HaarRect, threshold: f64| HaarStump { rectangles: vec![center, other], threshold, left_value: 0.0, right_value: 1.0 };
        let bands = [
            HaarRect::new(0.0, 0.0, 1.0, 0.25, -1.0),
            HaarRect::new(0.0, 0.75, 1.0, 0.25, -1.0),
            HaarRect::new(0.0, 0.0, 0.25, 1.0, -1.0),
            HaarRect::new(0.75, 0.0, 0.25, 1.0, -1.0),
        ];
        let edges = [
            HaarRect::new(0.25, 0.25, 0.5, 0.08, 1.0),
            HaarRect::new(0.25, 0.67, 0.5, 0.08, 1.0),
            HaarRect::new(0.25, 0.25, 0.08, 0.5, 1.0),
            HaarRect::new(0.67, 0.25, 0.08, 0.5, 1.0),
        ];
        let edge = |e: HaarRect, b: HaarRect| HaarStump { rectangles: vec![e, b], threshold: 1.2, left_value: 0.0, right_value: 1.0 };
        Self::new(
            (24, 24),
            vec![
                Stage { stage_threshold: 1.0, stumps: vec![stump(HaarRect::new(0.0, 0.0, 1.0, 1.0, -1.0), 0.8)] },
                Stage { stage_threshold: 4.0, stumps: bands.iter().map(|&b| stump(b, 1.2)).collect() },
                Stage { stage_threshold: 4.0, stumps: edges.iter().zip(&bands).map(|(&e, &b)| edge(e, b)).collect() },
            ],
        )
        .expect("built-in cascade is valid")
    }

    /// Runs the stages in order, stopping at the first stage whose summed
    /// stump votes fall below its threshold.
    pub fn evaluate(&self, ii: &IntegralImage, window: &Window) -> Result<CascadeOutcome> {
        if window.w == 0 || window.h == 0 || !ii.contains(window) {
            return Err(FaceError::WindowOutOfBounds(*window, ii.width(), ii.height()));
        }
        let (_, sigma) = ii.mean_std(window);
        let sigma = sigma.max(MIN_SIGMA);
        let mut score = 0.0;
        for (s, stage) in self.stages.iter().enumerate() {
            let sum: f64 = stage.stumps.iter().map(|st| st.vote(st.feature(ii, window, sigma))).sum();
            score += sum - stage.stage_threshold;
            if !(sum >= stage.stage_threshold) {
                return Ok(CascadeOutcome { accepted: false, stages_passed: s, score });
            }
        }
        Ok(CascadeOutcome { accepted: true, stages_passed: self.stages.len(), score })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn pass_all() -> Cascade {
        let stump = HaarStump {
            rectangles: vec![HaarRect::new(0.0, 0.0, 0.5, 1.0, 1.0), HaarRect::new(0.5, 0.0, 0.5, 1.0, -1.0)],
            threshold: f64::NEG_INFINITY,
            left_value: 0.0,
            right_value: 1.0,
        };
        Cascade::new((4, 4), vec![Stage { stage_threshold: 0.5, stumps: vec![stump] }]).unwrap()
    }

    #[test]
    fn always_pass_and_always_reject() {
        let img = Tensor::new(6, 6, 1, (0..36).map(|v| (v * 7 % 11) as f32).collect()).unwrap();
        let ii = IntegralImage::new(&img).unwrap();
        let mut c = pass_all();
        for (x, y, s) in [(0, 0, 4), (2, 1, 4), (0, 0, 6), (3, 3, 3)] {
            assert!(c.evaluate(&ii, &Window::new(x, y, s, s)).unwrap().accepted);
        }
        c.stages[0].stage_threshold = f64::INFINITY;
        for (x, y, s) in [(0, 0, 4), (2, 1, 4), (0, 0, 6)] {
            assert!(!c.evaluate(&ii, &Window::new(x, y, s, s)).unwrap().accepted);
        }
        assert!(c.evaluate(&ii, &Window::new(4, 4, 3, 3)).is_err());
    }

    #[test]
    fn validation() {
        let mut c = pass_all();
        c.stages[0].stumps[0].rectangles.pop();
        assert!(c.validate().is_err());
        let mut c = pass_all();
        c.stages[0].stumps[0].rectangles[0].x = 0.8;
        assert!(c.validate().is_err());
        assert!(Cascade::new((4, 4), vec![]).is_err());
        assert!(Cascade::from_json("{").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Cascade::center_surround();
        assert_eq!(Cascade::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unit_rects_map_to_pixels() {
        let w = Window::new(10, 20, 24, 24);
        assert_eq!(HaarRect::new(0.25, 0.25, 0.5, 0.5, 1.0).in_window(&w), Window::new(16, 26, 12, 12));
        assert_eq!(HaarRect::new(0.0, 0.0, 1.0, 1.0, 1.0).in_window(&w), w);
        let tiny = Window::new(0, 0, 2, 2);
        assert_eq!(HaarRect::new(0.0, 0.0, 0.1, 0.1, 1.0).in_window(&tiny).area(), 1);
    }
}

use serde::{Deserialize, Serialize};

use super::cascade::Cascade;
use super::integral::{IntegralImage, Window};
use super::{FaceError, Result};
use crate::tensor::{resize_bilinear, Tensor};

/// Side of the square crop fed to the feature network.
pub const FACE_SIZE: usize = 224;

const MERGE_IOU: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Ratio between successive window sizes; must exceed 1.
    pub scale_factor: f64,
    /// Smallest window side scanned, in pixels.
    pub min_size: usize,
    /// Sliding-window step in pixels, the same at every scale.
    pub step: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self { scale_factor: 1.25, min_size: 24, step: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub window: Window,
    pub scale: f64,
    pub score: f64,
}

/// Window sizes scanned for an image, smallest first.
fn window_sizes(cascade: &Cascade, params: &DetectParams, width: usize, height: usize) -> Vec<(usize, usize, f64)> {
    let (bw, bh) = cascade.base_window;
    let mut sizes: Vec<(usize, usize, f64)> = Vec::new();
    let mut scale = 1.0f64;
    loop {
        let w = (bw as f64 * scale).round() as usize;
        let h = (bh as f64 * scale).round() as usize;
        if w > width || h > height {
            break;
        }
        if w.min(h) >= params.min_size && sizes.last().is_none_or(|&(lw, lh, _)| (lw, lh) != (w, h)) {
            sizes.push((w, h, scale));
        }
        scale *= params.scale_factor;
    }
    sizes
}

fn check_params(params: &DetectParams) -> Result<()> {
    if !(params.scale_factor > 1.0) || !params.scale_factor.is_finite() {
        return Err(FaceError::InvalidParams(format!("scale_factor must be > 1, got {}", params.scale_factor)));
    }
    if params.step == 0 {
        return Err(FaceError::InvalidParams("step must be positive".into()));
    }
    Ok(())
}

/// Every accepted window before merging, in scan order (scale, row, column).
pub fn scan_windows(ii: &IntegralImage, cascade: &Cascade, params: &DetectParams) -> Result<Vec<Detection>> {
    check_params(params)?;
    let mut hits = Vec::new();
    for (w, h, scale) in window_sizes(cascade, params, ii.width(), ii.height()) {
        for y in (0..=ii.height() - h).step_by(params.step) {
            for x in (0..=ii.width() - w).step_by(params.step) {
                let window = Window::new(x, y, w, h);
                let outcome = cascade.evaluate(ii, &window)?;
                if outcome.accepted {
                    hits.push(Detection { window, scale, score: outcome.score });
                }
            }
        }
    }
    Ok(hits)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

// Integer round-half-up of sum / n.
fn rounded_mean(sum: usize, n: usize) -> usize {
    (2 * sum + n) / (2 * n)
}

/// Groups raw hits whose IoU exceeds 0.3 (transitively) and replaces each
/// group with its average box. Scores add up within a group. Output is
/// sorted by descending score, then top-to-bottom, then left-to-right.
pub fn merge_detections(hits: &[Detection], image_w: usize, image_h: usize) -> Vec<Detection> {
    let n = hits.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if hits[i].window.iou(&hits[j].window) > MERGE_IOU {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    let mut merged: Vec<Detection> = groups
        .iter()
        .map(|members| {
            let m = members.len();
            let total = |f: fn(&Window) -> usize| members.iter().map(|&i| f(&hits[i].window)).sum::<usize>();
            let x = rounded_mean(total(|w| w.x), m);
            let y = rounded_mean(total(|w| w.y), m);
            let w = rounded_mean(total(|w| w.w), m).clamp(1, image_w.saturating_sub(x).max(1));
            let h = rounded_mean(total(|w| w.h), m).clamp(1, image_h.saturating_sub(y).max(1));
            Detection {
                window: Window::new(x, y, w, h),
                scale: members.iter().map(|&i| hits[i].scale).sum::<f64>() / m as f64,
                score: members.iter().map(|&i| hits[i].score).sum(),
            }
        })
        .collect();
    merged.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.window.y.cmp(&b.window.y)).then(a.window.x.cmp(&b.window.x)));
    merged
}

/// Multi-scale sliding-window detection on a single-channel image.
pub fn detect_faces(gray: &Tensor, cascade: &Cascade, params: &DetectParams) -> Result<Vec<Detection>> {
    let ii = IntegralImage::new(gray)?;
    let hits = scan_windows(&ii, cascade, params)?;
    Ok(merge_detections(&hits, gray.width(), gray.height()))
}

/// Largest box; ties go to the topmost, then leftmost.
pub fn largest_face(detections: &[Detection]) -> Option<&Detection> {
    detections
        .iter()
        .min_by(|a, b| b.window.area().cmp(&a.window.area()).then(a.window.y.cmp(&b.window.y)).then(a.window.x.cmp(&b.window.x)))
}

/// Crops `det` from `image` and resizes it to `FACE_SIZE x FACE_SIZE x 3`.
pub fn crop_and_resize(image: &Tensor, window: &Window) -> Result<Tensor> {
    let crop = image.crop(window.x, window.y, window.w, window.h).map_err(|_| FaceError::DegenerateBox(*window))?;
    let resized = resize_bilinear(&crop, FACE_SIZE, FACE_SIZE).map_err(|_| FaceError::DegenerateBox(*window))?;
    Ok(resized.to_rgb())
}

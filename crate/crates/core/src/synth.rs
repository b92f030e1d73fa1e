//! Synthetic data: scripted emotion cohorts and drawn face frames.
//!
//! Cohorts follow a per-participant Markov chain over emotions whose
//! baseline mix depends on the group. Inside a fixed frame window,
//! "responders" switch to a group-typical emotion: happiness for healthy
//! participants, anger for impaired ones. Noise levels control how often a
//! participant fails to respond and how often a frame deviates from the
//! script.
//!
//! Frames are grayscale images with a bright square face on a dark, noisy
//! background. Each emotion is drawn as a distinct dark mark inside the face
//! so that a feature extractor plus classifier can tell them apart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{Emotion, EmotionDistribution, EvolutionMatrix, Group, ParticipantRecord};
use crate::face::Window;
use crate::tensor::Tensor;

/// Parameters of a scripted cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortParams {
    pub n_healthy: usize,
    pub n_impaired: usize,
    pub n_frames: usize,
    /// Zero-based first frame of the scripted window.
    pub window_start: usize,
    pub window_width: usize,
    /// Probability that a participant follows the group script in the window.
    pub response_rate: f64,
    /// Probability that a window frame falls back to the baseline chain.
    pub frame_noise: f64,
    /// Upper bound on the mass moved away from the scripted label in soft
    /// columns; 0 gives one-hot columns. Must stay below 0.5.
    pub soft_noise: f64,
    pub seed: u64,
}

impl CohortParams {
    /// 25 healthy and 36 impaired participants over 300 frames with a clear
    /// 60-frame window at frames 201–260.
    pub fn high_separation(seed: u64) -> Self {
        Self {
            n_healthy: 25,
            n_impaired: 36,
            n_frames: 300,
            window_start: 200,
            window_width: 60,
            response_rate: 1.0,
            frame_noise: 0.1,
            soft_noise: 0.3,
            seed,
        }
    }

    /// Same layout with a sizeable share of non-responders and noisy frames.
    pub fn medium_noise(seed: u64) -> Self {
        Self { response_rate: 0.8, frame_noise: 0.4, ..Self::high_separation(seed) }
    }

    fn validate(&self) -> Result<(), String> {
        if self.n_healthy == 0 || self.n_impaired == 0 {
            return Err("both groups need participants".into());
        }
        if self.n_frames == 0 || self.window_width == 0 || self.window_start + self.window_width > self.n_frames {
            return Err(format!("window {}+{} does not fit {} frames", self.window_start, self.window_width, self.n_frames));
        }
        for (name, p) in [("response_rate", self.response_rate), ("frame_noise", self.frame_noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} {p} outside [0, 1]"));
            }
        }
        if !(0.0..0.5).contains(&self.soft_noise) {
            return Err(format!("soft_noise {} outside [0, 0.5)", self.soft_noise));
        }
        Ok(())
    }
}

/// One generated participant.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParticipant {
    pub record: ParticipantRecord,
    /// Scripted per-frame emotion; the matrix argmax equals it at every frame.
    pub script: Vec<Emotion>,
    pub matrix: EvolutionMatrix,
}

fn baseline(group: Group) -> [f64; 6] {
    match group {
        Group::Healthy => [0.30, 0.43, 0.08, 0.05, 0.04, 0.10],
        Group::Impaired => [0.14, 0.48, 0.14, 0.10, 0.04, 0.10],
    }
}

fn draw(rng: &mut impl Rng, weights: &[f64; 6]) -> Emotion {
    let mut u = rng.random::<f64>() * weights.iter().sum::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return Emotion::ALL[i];
        }
        u -= w;
    }
    Emotion::Other
}

fn script(rng: &mut impl Rng, group: Group, p: &CohortParams) -> Vec<Emotion> {
    let base = baseline(group);
    let responder = rng.random::<f64>() < p.response_rate;
    let target = match group {
        Group::Healthy => Emotion::Happy,
        Group::Impaired => Emotion::Angry,
    };
    let mut out = Vec::with_capacity(p.n_frames);
    let mut current = draw(rng, &base);
    for j in 0..p.n_frames {
        if rng.random::<f64>() < 0.1 {
            current = draw(rng, &base);
        }
        let in_window = (p.window_start..p.window_start + p.window_width).contains(&j);
        if in_window && responder && rng.random::<f64>() >= p.frame_noise {
            out.push(target);
        } else {
            out.push(current);
        }
    }
    out
}

/// Soft column whose argmax is `label`: `(1 − ε)` on the label, the rest
/// spread at random over the other five emotions, `ε ≤ soft_noise`.
fn soften(rng: &mut impl Rng, label: Emotion, soft_noise: f64) -> EmotionDistribution {
    if soft_noise == 0.0 {
        return EmotionDistribution::one_hot(label);
    }
    let eps = rng.random::<f64>() * soft_noise;
    let raw: Vec<f64> = (0..6).map(|i| if i == label.index() { 0.0 } else { rng.random::<f64>() + 1e-3 }).collect();
    let total: f64 = raw.iter().sum();
    let mut p = [0.0; 6];
    for i in 0..6 {
        p[i] = if i == label.index() { 1.0 - eps } else { eps * raw[i] / total };
    }
    // Fold rounding residue into the label entry so the column sums to one.
    let residue = 1.0 - p.iter().sum::<f64>();
    p[label.index()] += residue;
    EmotionDistribution::new(p).expect("constructed distribution is valid")
}

/// Generates a cohort; healthy participants come first (`h001`, ...), then
/// impaired ones (`i001`, ...). MoCA scores are drawn inside each band.
pub fn synth_cohort(p: &CohortParams) -> Result<Vec<SynthParticipant>, String> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut out = Vec::with_capacity(p.n_healthy + p.n_impaired);
    for (group, n, prefix, band) in [(Group::Healthy, p.n_healthy, 'h', 25..=30), (Group::Impaired, p.n_impaired, 'i', 20..=24)] {
        for k in 0..n {
            let id = format!("{prefix}{:03}", k + 1);
            let moca = rng.random_range(band.clone());
            let record = ParticipantRecord::new(&id, Some(moca), None).map_err(|e| e.to_string())?;
            let labels = script(&mut rng, group, p);
            let columns = labels.iter().map(|&e| soften(&mut rng, e, p.soft_noise)).collect();
            let matrix = EvolutionMatrix::new(&id, columns).map_err(|e| e.to_string())?;
            out.push(SynthParticipant { record, script: labels, matrix });
        }
    }
    Ok(out)
}

/// Layout of a synthetic frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub width: usize,
    pub height: usize,
    pub min_face: usize,
    pub max_face: usize,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self { width: 128, height: 112, min_face: 28, max_face: 40 }
    }
}

const BACKGROUND: (f32, f32) = (25.0, 55.0);
const SKIN: (f32, f32) = (205.0, 212.0);
const INK: f32 = 60.0;

fn fill(img: &mut Tensor, x0: usize, y0: usize, w: usize, h: usize, v: f32) {
    for y in y0..(y0 + h).min(img.height()) {
        for x in x0..(x0 + w).min(img.width()) {
            img.set(y, x, 0, v);
        }
    }
}

/// Draws the mark for `emotion` inside the square face `f` (in place).
/// Marks are placed in the central half of the face.
pub fn draw_expression(img: &mut Tensor, f: &Window, emotion: Emotion) {
    let s = f.w as f64;
    let at = |u: f64| (u * s).round() as usize;
    let (x, y) = (f.x, f.y);
    // Eyes are shared by every expression except "other".
    let eyes = |img: &mut Tensor| {
        fill(img, x + at(0.30), y + at(0.32), at(0.1).max(1), at(0.08).max(1), INK);
        fill(img, x + at(0.60), y + at(0.32), at(0.1).max(1), at(0.08).max(1), INK);
    };
    match emotion {
        Emotion::Happy => {
            eyes(img);
            // Upturned mouth: bar with raised ends.
            fill(img, x + at(0.34), y + at(0.62), at(0.32), at(0.05).max(1), INK);
            fill(img, x + at(0.30), y + at(0.56), at(0.05).max(1), at(0.08).max(1), INK);
            fill(img, x + at(0.65), y + at(0.56), at(0.05).max(1), at(0.08).max(1), INK);
        }
        Emotion::Neutral => {
            eyes(img);
            fill(img, x + at(0.34), y + at(0.62), at(0.32), at(0.04).max(1), INK);
        }
        Emotion::Sad => {
            eyes(img);
            fill(img, x + at(0.34), y + at(0.58), at(0.32), at(0.05).max(1), INK);
            fill(img, x + at(0.30), y + at(0.62), at(0.05).max(1), at(0.08).max(1), INK);
            fill(img, x + at(0.65), y + at(0.62), at(0.05).max(1), at(0.08).max(1), INK);
        }
        Emotion::Angry => {
            eyes(img);
            // Heavy brows and a short tight mouth.
            fill(img, x + at(0.28), y + at(0.26), at(0.16), at(0.04).max(1), INK);
            fill(img, x + at(0.56), y + at(0.26), at(0.16), at(0.04).max(1), INK);
            fill(img, x + at(0.42), y + at(0.62), at(0.16), at(0.06).max(1), INK);
        }
        Emotion::Surprise => {
            eyes(img);
            fill(img, x + at(0.42), y + at(0.56), at(0.16), at(0.14), INK);
        }
        Emotion::Other => {
            // Face turned away: a vertical shadow, no features.
            fill(img, x + at(0.28), y + at(0.30), at(0.12), at(0.40), INK + 40.0);
        }
    }
}

/// A frame with one face showing `emotion`; returns the image and the face box.
pub fn synth_face_frame(rng: &mut impl Rng, params: &FrameParams, emotion: Emotion) -> (Tensor, Window) {
    let mut img = Tensor::new(
        params.height,
        params.width,
        1,
        (0..params.width * params.height).map(|_| rng.random_range(BACKGROUND.0..BACKGROUND.1).round()).collect(),
    )
    .expect("positive frame size");
    let side = rng.random_range(params.min_face..=params.max_face.min(params.width).min(params.height));
    // Keep half a face of background around the face when the frame allows it.
    let margin = |extent: usize| (side / 2).min((extent - side) / 2);
    let (mx, my) = (margin(params.width), margin(params.height));
    let fx = rng.random_range(mx..=params.width - side - mx);
    let fy = rng.random_range(my..=params.height - side - my);
    let face = Window::new(fx, fy, side, side);
    for y in fy..fy + side {
        for x in fx..fx + side {
            img.set(y, x, 0, rng.random_range(SKIN.0..SKIN.1).round());
        }
    }
    draw_expression(&mut img, &face, emotion);
    (img, face)
}

/// One face frame per scripted emotion.
pub fn render_script(rng: &mut impl Rng, params: &FrameParams, script: &[Emotion]) -> Vec<Tensor> {
    script.iter().map(|&e| synth_face_frame(rng, params, e).0).collect()
}

/// A frame with background only.
pub fn synth_empty_frame(rng: &mut impl Rng, params: &FrameParams) -> Tensor {
    Tensor::new(
        params.height,
        params.width,
        1,
        (0..params.width * params.height).map(|_| rng.random_range(BACKGROUND.0..BACKGROUND.1).round()).collect(),
    )
    .expect("positive frame size")
}

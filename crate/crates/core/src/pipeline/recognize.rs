use std::thread;

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::analytics::{Emotion, EmotionDistribution, EvolutionMatrix};
use crate::classify::{ClassifierKind, LabeledDataset, TrainParams, TrainedModel};
use crate::face::{crop_and_resize, detect_faces, largest_face, Cascade, DetectParams, Detection, Window};
use crate::net::Network;
use crate::tensor::Tensor;

/// Maps block features of a face crop to an emotion distribution.
pub trait EmotionModel: Send + Sync {
    fn distribution(&self, features: &[f32]) -> Result<EmotionDistribution>;

    /// Whether `distribution` looks at its input. When false the recognizer
    /// skips the network pass.
    fn needs_features(&self) -> bool {
        true
    }
}

/// Returns the same emotion for every face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StubEmotionModel(pub Emotion);

impl EmotionModel for StubEmotionModel {
    fn distribution(&self, _: &[f32]) -> Result<EmotionDistribution> {
        Ok(EmotionDistribution::one_hot(self.0))
    }

    fn needs_features(&self) -> bool {
        false
    }
}

/// A trained classifier whose class names are emotions.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionClassifier {
    model: TrainedModel,
    emotions: Vec<Emotion>,
}

impl EmotionClassifier {
    pub fn new(model: TrainedModel) -> Result<Self> {
        let emotions = model.class_names.iter().map(|n| n.parse::<Emotion>()).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { model, emotions })
    }

    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    pub fn predict(&self, features: &[f32]) -> Result<Emotion> {
        let x: Vec<f64> = features.iter().map(|&v| v as f64).collect();
        Ok(self.emotions[self.model.predict(&x)?])
    }
}

impl EmotionModel for EmotionClassifier {
    fn distribution(&self, features: &[f32]) -> Result<EmotionDistribution> {
        let x: Vec<f64> = features.iter().map(|&v| v as f64).collect();
        let scores = self.model.scores(&x)?;
        let total: f64 = scores.iter().sum();
        if !(total > 0.0) {
            return Err(PipelineError::Internal(format!("classifier scores sum to {total}")));
        }
        let mut p = [0.0; 6];
        for (e, s) in self.emotions.iter().zip(&scores) {
            p[e.index()] += s / total;
        }
        EmotionDistribution::new(p).map_err(PipelineError::Internal)
    }
}

/// Whether evolution-matrix columns keep the model's scores or only their
/// argmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    Hard,
    #[default]
    Soft,
}

fn gray(image: &Tensor) -> Result<Tensor> {
    Ok(image.to_gray()?)
}

/// Detects the largest face in `image`, crops it to the network input size
/// and extracts `layer` features. `None` when no face is found.
pub fn extract_face_features(
    image: &Tensor,
    cascade: &Cascade,
    params: &DetectParams,
    network: &Network,
    layer: &str,
) -> Result<Option<(Detection, Vec<f32>)>> {
    let detections = detect_faces(&gray(image)?, cascade, params)?;
    let Some(face) = largest_face(&detections).copied() else {
        return Ok(None);
    };
    let crop = crop_and_resize(image, &face.window)?;
    Ok(Some((face, network.extract_features(&crop, layer)?.values)))
}

/// The four recognition stages bound together.
pub struct Recognizer<'a> {
    pub cascade: &'a Cascade,
    pub detect: DetectParams,
    pub network: &'a Network,
    pub layer: String,
    pub model: &'a dyn EmotionModel,
    pub mode: LabelMode,
}

impl Recognizer<'_> {
    /// One evolution-matrix column. Frames without a face count as "other".
    pub fn recognize_frame(&self, image: &Tensor) -> Result<EmotionDistribution> {
        let detections = detect_faces(&gray(image)?, self.cascade, &self.detect)?;
        let Some(face) = largest_face(&detections) else {
            return Ok(EmotionDistribution::one_hot(Emotion::Other));
        };
        let features = if self.model.needs_features() {
            let crop = crop_and_resize(image, &face.window)?;
            self.network.extract_features(&crop, &self.layer)?.values
        } else {
            Vec::new()
        };
        let d = self.model.distribution(&features)?;
        Ok(match self.mode {
            LabelMode::Hard => EmotionDistribution::one_hot(d.argmax()),
            LabelMode::Soft => d,
        })
    }
}

fn worker_count(n: usize) -> usize {
    thread::available_parallelism().map_or(1, |p| p.get()).min(n).max(1)
}

/// Runs `f` over `items` on scoped threads, keeping input order. The error of
/// the lowest failing index wins.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(usize, &T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let workers = worker_count(items.len());
    let chunk = items.len().div_ceil(workers).max(1);
    let parts: Vec<Result<Vec<U>>> = thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                let f = &f;
                s.spawn(move || part.iter().enumerate().map(|(i, item)| f(c * chunk + i, item)).collect::<Result<Vec<U>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(PipelineError::Internal("worker panicked".into())))).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Converts a participant's frames into an evolution matrix.
pub fn run_emotion_recognition(participant: &str, frames: &[Tensor], recognizer: &Recognizer<'_>) -> Result<EvolutionMatrix> {
    if frames.is_empty() {
        return Err(PipelineError::InvalidInput(format!("{participant}: no frames")));
    }
    let columns = par_map(frames, |i, f| recognizer.recognize_frame(f).map_err(|e| e.at_frame(i)))?;
    Ok(EvolutionMatrix::new(participant, columns)?)
}

/// Network features of the largest face, or of the whole frame when no face
/// is found. The flag is true when the fallback was used.
fn face_or_full(image: &Tensor, cascade: &Cascade, params: &DetectParams, network: &Network, layer: &str) -> Result<(Vec<f32>, bool)> {
    if let Some((_, f)) = extract_face_features(image, cascade, params, network, layer)? {
        return Ok((f, false));
    }
    let full = Window::new(0, 0, image.width(), image.height());
    let crop = crop_and_resize(image, &full)?;
    Ok((network.extract_features(&crop, layer)?.values, true))
}

/// Trains an emotion classifier on labeled frames. Returns the classifier
/// and the indices of frames where no face was found (their whole frame was
/// used instead).
#[allow(clippy::too_many_arguments)]
pub fn train_emotion_model(
    frames: &[(Tensor, Emotion)],
    cascade: &Cascade,
    detect: &DetectParams,
    network: &Network,
    layer: &str,
    kind: ClassifierKind,
    params: &TrainParams,
) -> Result<(EmotionClassifier, Vec<usize>)> {
    if frames.is_empty() {
        return Err(PipelineError::InvalidInput("no labeled frames".into()));
    }
    let extracted = par_map(frames, |i, (img, _)| face_or_full(img, cascade, detect, network, layer).map_err(|e| e.at_frame(i)))?;
    let no_face = extracted.iter().enumerate().filter(|(_, (_, fallback))| *fallback).map(|(i, _)| i).collect();
    let features = extracted.into_iter().map(|(f, _)| f.into_iter().map(f64::from).collect()).collect();
    let labels = frames.iter().map(|(_, e)| e.index()).collect();
    let data = LabeledDataset::new(features, labels, Emotion::names())?;
    let model = TrainedModel::fit(kind, &data, params)?;
    Ok((EmotionClassifier::new(model)?, no_face))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{random_weights, NetworkGraph};

    fn tiny_network() -> Network {
        let g = NetworkGraph::from_json(
            r#"{"name":"tiny","input_shape":[224,224,3],"layers":[
                {"name":"in","kind":"input_normalize"},
                {"name":"c","kind":"conv_standard","inputs":["in"],"weight_key":"c","kernel":3,"filters":2,"stride":8},
                {"name":"pool","kind":"global_avg_pool","inputs":["c"]}]}"#,
        )
        .unwrap();
        let w = random_weights(&g, 1).unwrap();
        Network::bind(g, &w).unwrap()
    }

    #[test]
    fn no_face_frames_become_other() {
        let net = tiny_network();
        let cascade = Cascade::center_surround();
        let stub = StubEmotionModel(Emotion::Happy);
        let r = Recognizer {
            cascade: &cascade,
            detect: DetectParams::default(),
            network: &net,
            layer: "pool".into(),
            model: &stub,
            mode: LabelMode::Hard,
        };
        let frames = vec![Tensor::filled(40, 40, 1, 80.0).unwrap(); 3];
        let m = run_emotion_recognition("p", &frames, &r).unwrap();
        assert_eq!(m.n_frames(), 3);
        assert!((0..3).all(|j| m.get(Emotion::Other, j) == 1.0));
    }

    #[test]
    fn errors_carry_frame_index() {
        let net = tiny_network();
        let cascade = Cascade::center_surround();
        let stub = StubEmotionModel(Emotion::Happy);
        let r = Recognizer {
            cascade: &cascade,
            detect: DetectParams::default(),
            network: &net,
            layer: "pool".into(),
            model: &stub,
            mode: LabelMode::Hard,
        };
        let mut frames = vec![Tensor::filled(40, 40, 1, 80.0).unwrap(); 4];
        frames[2] = Tensor::filled(40, 40, 2, 80.0).unwrap();
        assert!(matches!(run_emotion_recognition("p", &frames, &r), Err(PipelineError::Frame { index: 2, .. })));
    }

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        assert_eq!(par_map(&items, |i, &x| Ok(i + x)).unwrap(), (0..37).map(|x| 2 * x).collect::<Vec<_>>());
        let r = par_map(&items, |i, _| if i % 10 == 9 { Err(PipelineError::Internal(i.to_string())) } else { Ok(i) });
        assert_eq!(r, Err(PipelineError::Internal("9".into())));
    }
}

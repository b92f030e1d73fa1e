use std::path::Path;

use emoscreen::analytics::ParticipantRecord;
use emoscreen::classify::load_model;
use emoscreen::face::{Cascade, DetectParams};
use emoscreen::io::{load_frames, read_cohort_manifest, read_evolution_csv, write_evolution_csv};
use emoscreen::net::{load_weights, random_weights, Network, NetworkGraph};
use emoscreen::pipeline::{run_emotion_recognition, EmotionClassifier, EmotionModel, LabelMode, Participant, Recognizer, StubEmotionModel};
use emoscreen::tensor::Tensor;

use crate::{CliError, CohortOpts, ModelOpts, NetOpts};

/// Detector and feature network configured from the command line.
pub struct Stack {
    pub cascade: Cascade,
    pub detect: DetectParams,
    pub network: Network,
    pub layer: String,
}

impl Stack {
    pub fn load(opts: &NetOpts, seed: u64) -> Result<Self, CliError> {
        let graph = match &opts.topology {
            Some(p) => NetworkGraph::load(p)?,
            None => NetworkGraph::mobilenet_v2(),
        };
        graph.layer(&opts.layer)?;
        let weights = match &opts.weights {
            Some(p) => load_weights(p)?,
            None => {
                log::info!("no weight file given; using random weights from seed {seed}");
                random_weights(&graph, seed)?
            }
        };
        let network = Network::bind(graph, &weights)?;
        let cascade = match &opts.cascade {
            Some(p) => Cascade::load(p)?,
            None => Cascade::center_surround(),
        };
        let detect = DetectParams { scale_factor: opts.scale_factor, min_size: opts.min_size, step: opts.step };
        Ok(Self { cascade, detect, network, layer: opts.layer.clone() })
    }
}

pub enum LoadedModel {
    Stub(StubEmotionModel),
    Trained(Box<EmotionClassifier>),
}

impl LoadedModel {
    pub fn load(opts: &ModelOpts) -> Result<Self, CliError> {
        match (&opts.emotion_model, opts.stub) {
            (Some(p), _) => Ok(LoadedModel::Trained(Box::new(EmotionClassifier::new(load_model(p)?)?))),
            (None, Some(e)) => Ok(LoadedModel::Stub(StubEmotionModel(e))),
            (None, None) => Err(CliError::Usage("recognition needs --emotion-model or --stub".into())),
        }
    }

    pub fn as_model(&self) -> &dyn EmotionModel {
        match self {
            LoadedModel::Stub(m) => m,
            LoadedModel::Trained(m) => m.as_ref(),
        }
    }
}

/// Recognizes frame directories with one loaded model stack.
pub struct FrameRecognizer {
    stack: Stack,
    model: LoadedModel,
    mode: LabelMode,
}

impl FrameRecognizer {
    pub fn load(opts: &ModelOpts, seed: u64) -> Result<Self, CliError> {
        let model = LoadedModel::load(opts)?;
        Ok(Self { stack: Stack::load(&opts.net, seed)?, model, mode: if opts.hard_label { LabelMode::Hard } else { LabelMode::Soft } })
    }

    pub fn recognize_dir(&self, id: &str, dir: &Path) -> Result<emoscreen::analytics::EvolutionMatrix, CliError> {
        let frames: Vec<Tensor> = load_frames(dir)?.into_iter().map(|f| f.image).collect();
        let r = Recognizer {
            cascade: &self.stack.cascade,
            detect: self.stack.detect,
            network: &self.stack.network,
            layer: self.stack.layer.clone(),
            model: self.model.as_model(),
            mode: self.mode,
        };
        log::info!("{id}: recognizing {} frames", frames.len());
        Ok(run_emotion_recognition(id, &frames, &r)?)
    }

    /// Recognizes every record with frames and writes `evolution/<id>.csv`.
    pub fn recognize_records(&self, records: &[ParticipantRecord], out: &Path) -> Result<Vec<Participant>, CliError> {
        records
            .iter()
            .map(|r| {
                let dir = r.frames_dir.as_deref().ok_or_else(|| CliError::Data(format!("{}: no frames_dir", r.id)))?;
                let matrix = self.recognize_dir(&r.id, dir)?;
                write_evolution_csv(&matrix, &out.join("evolution").join(format!("{}.csv", r.id)))?;
                Ok(Participant::new(r.clone(), matrix))
            })
            .collect()
    }
}

/// Participants of a cohort manifest with matrices read from `--matrices`
/// or recognized from their frames.
pub fn load_participants(opts: &CohortOpts, seed: u64, out: &Path) -> Result<Vec<Participant>, CliError> {
    let records = read_cohort_manifest(&opts.cohort)?;
    match &opts.matrices {
        Some(dir) => {
            records.into_iter().map(|r| Ok(Participant::new(r.clone(), read_evolution_csv(&dir.join(format!("{}.csv", r.id)))?))).collect()
        }
        None => FrameRecognizer::load(&opts.model, seed)?.recognize_records(&records, out),
    }
}

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::analytics::{EvolutionMatrix, FeatureSpec, Group, ParticipantRecord};
use crate::classify::{ClassifierKind, LabeledDataset, TrainParams, TrainedModel};

/// Class names of the screening classifiers, indexed by [`Group::index`].
pub const MCI_CLASSES: [&str; 2] = ["healthy", "impaired"];

/// Published accuracies (%) for comparison columns only.
pub const REFERENCE_ACCURACY: [(ClassifierKind, f64); 4] =
    [(ClassifierKind::Lda, 60.0), (ClassifierKind::Svm, 73.3), (ClassifierKind::Knn, 60.0), (ClassifierKind::Tree, 40.0)];

fn reference(kind: ClassifierKind) -> f64 {
    REFERENCE_ACCURACY.iter().find(|(k, _)| *k == kind).map_or(f64::NAN, |(_, a)| *a)
}

/// A participant with a recognized (or scripted) evolution matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Participant {
    pub record: ParticipantRecord,
    pub matrix: EvolutionMatrix,
}

impl Participant {
    pub fn new(record: ParticipantRecord, matrix: EvolutionMatrix) -> Self {
        Self { record, matrix }
    }

    pub fn group(&self) -> Group {
        self.record.group
    }
}

/// Which participants drive window selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSource {
    /// Training split only.
    #[default]
    Training,
    /// Every participant, test split included.
    AllParticipants,
}

/// Window selection over `participants`, split by group.
pub fn select_features(participants: &[Participant], width: usize) -> Result<FeatureSpec> {
    let by_group = |g: Group| participants.iter().filter(|p| p.group() == g).map(|p| &p.matrix).collect::<Vec<_>>();
    let (spec, _) = FeatureSpec::select(&by_group(Group::Healthy), &by_group(Group::Impaired), width)?;
    Ok(spec)
}

/// Windowed feature vectors labeled by group.
pub fn mci_dataset(participants: &[Participant], spec: &FeatureSpec) -> Result<LabeledDataset> {
    if participants.is_empty() {
        return Err(PipelineError::InvalidInput("empty participant set".into()));
    }
    let features = participants.iter().map(|p| spec.features(&p.matrix)).collect::<std::result::Result<Vec<_>, _>>()?;
    let labels = participants.iter().map(|p| p.group().index()).collect();
    Ok(LabeledDataset::new(features, labels, MCI_CLASSES.iter().map(|s| s.to_string()).collect())?)
}

/// A screening classifier with its frozen feature selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MciModel {
    pub spec: FeatureSpec,
    pub model: TrainedModel,
}

impl MciModel {
    pub fn predict(&self, matrix: &EvolutionMatrix) -> Result<Group> {
        let x = self.spec.features(matrix)?;
        Ok(Group::ALL[self.model.predict(&x)?])
    }
}

pub fn train_mci(train: &[Participant], spec: &FeatureSpec, kind: ClassifierKind, params: &TrainParams) -> Result<MciModel> {
    let data = mci_dataset(train, spec)?;
    Ok(MciModel { spec: spec.clone(), model: TrainedModel::fit(kind, &data, params)? })
}

/// Test-set outcome of one classifier. `confusion[true][predicted]` is
/// indexed by [`Group::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: String,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub confusion: [[usize; 2]; 2],
    pub reference_accuracy: f64,
    pub train_ms: f64,
    pub test_ms: f64,
}

impl ClassifierResult {
    pub fn kind(&self) -> Option<ClassifierKind> {
        self.classifier.parse().ok().or_else(|| ClassifierKind::ALL.into_iter().find(|k| k.to_string() == self.classifier))
    }
}

pub fn evaluate_mci(model: &MciModel, test: &[Participant]) -> Result<ClassifierResult> {
    if test.is_empty() {
        return Err(PipelineError::InvalidInput("empty test split".into()));
    }
    let start = Instant::now();
    let mut confusion = [[0usize; 2]; 2];
    let mut correct = 0;
    for p in test {
        let predicted = model.predict(&p.matrix)?;
        confusion[p.group().index()][predicted.index()] += 1;
        correct += usize::from(predicted == p.group());
    }
    let trace = confusion[0][0] + confusion[1][1];
    if trace != correct {
        return Err(PipelineError::Internal(format!("confusion trace {trace} != counted correct {correct}")));
    }
    let kind = model.model.kind();
    Ok(ClassifierResult {
        classifier: kind.to_string(),
        accuracy: 100.0 * trace as f64 / test.len() as f64,
        correct,
        total: test.len(),
        confusion,
        reference_accuracy: reference(kind),
        train_ms: 0.0,
        test_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Side-by-side comparison of the four screening classifiers on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub split: String,
    pub seed: u64,
    pub window_source: WindowSource,
    pub spec: FeatureSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub results: Vec<ClassifierResult>,
}

impl EvaluationReport {
    pub fn result(&self, kind: ClassifierKind) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.kind() == Some(kind))
    }

    /// Fixed-width text table, one row per classifier.
    pub fn to_table(&self) -> String {
        let (first, last) = self.spec.window.frame_numbers();
        let mut s = String::new();
        writeln!(s, "Cognitive impairment detection accuracy").unwrap();
        writeln!(s, "split: {}; train {} / test {}; window frames {first}-{last}", self.split, self.n_train, self.n_test).unwrap();
        writeln!(s, "{:<15} {:>12} {:>9} {:>13} {:>10}", "Classifier", "Accuracy (%)", "Correct", "Reference (%)", "Train ms").unwrap();
        for r in &self.results {
            writeln!(
                s,
                "{:<15} {:>12.1} {:>9} {:>13.1} {:>10.2}",
                r.classifier,
                r.accuracy,
                format!("{}/{}", r.correct, r.total),
                r.reference_accuracy,
                r.train_ms
            )
            .unwrap();
        }
        s
    }
}

/// Selects the window, trains `kinds` on `train` and scores them on `test`.
pub fn evaluate_all(
    train: &[Participant],
    test: &[Participant],
    kinds: &[ClassifierKind],
    width: usize,
    window_source: WindowSource,
    params: &TrainParams,
) -> Result<(EvaluationReport, Vec<MciModel>)> {
    if train.is_empty() || test.is_empty() {
        return Err(PipelineError::InvalidInput("empty split".into()));
    }
    let spec = match window_source {
        WindowSource::Training => select_features(train, width)?,
        WindowSource::AllParticipants => select_features(&[train, test].concat(), width)?,
    };
    let mut results = Vec::with_capacity(kinds.len());
    let mut models = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let start = Instant::now();
        let model = train_mci(train, &spec, kind, params)?;
        let train_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut r = evaluate_mci(&model, test)?;
        r.train_ms = train_ms;
        results.push(r);
        models.push(model);
    }
    let report = EvaluationReport { split: String::new(), seed: 0, window_source, spec, n_train: train.len(), n_test: test.len(), results };
    Ok((report, models))
}

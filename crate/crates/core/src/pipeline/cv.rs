use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_mci, select_features, train_mci, Participant, PipelineError, Result};
use crate::classify::{ClassifierKind, LabeledDataset, TrainParams, TrainedModel};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub classifier: String,
    pub folds: usize,
    pub seed: u64,
    pub fold_sizes: Vec<usize>,
    pub fold_errors: Vec<f64>,
    pub mean_error: f64,
}

/// Fold membership: each class is shuffled and dealt round-robin, the deal
/// continuing across classes, so fold sizes differ by at most one and every
/// class is spread as evenly as possible.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(PipelineError::InvalidInput(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if folds > labels.len() {
        return Err(PipelineError::InvalidInput(format!("{folds} folds exceed the {} samples", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for c in 0..n_classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            out[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Runs `fit_and_score(train, test)` per fold; it returns the number of
/// misclassified test items.
pub fn cross_validate_with(
    labels: &[usize],
    folds: usize,
    seed: u64,
    mut fit_and_score: impl FnMut(&[usize], &[usize]) -> Result<usize>,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let parts = stratified_folds(labels, folds, seed)?;
    let mut sizes = Vec::with_capacity(folds);
    let mut errors = Vec::with_capacity(folds);
    for (k, test) in parts.iter().enumerate() {
        let train: Vec<usize> = parts.iter().enumerate().filter(|&(j, _)| j != k).flat_map(|(_, f)| f.iter().copied()).collect();
        let wrong = fit_and_score(&train, test)?;
        sizes.push(test.len());
        errors.push(wrong as f64 / test.len() as f64);
    }
    Ok((sizes, errors))
}

fn report(kind: ClassifierKind, folds: usize, seed: u64, (fold_sizes, fold_errors): (Vec<usize>, Vec<f64>)) -> CvReport {
    let mean_error = fold_errors.iter().sum::<f64>() / fold_errors.len() as f64;
    CvReport { classifier: kind.to_string(), folds, seed, fold_sizes, fold_errors, mean_error }
}

/// Stratified k-fold error of `kind` on a labeled dataset.
pub fn cross_validate(data: &LabeledDataset, kind: ClassifierKind, params: &TrainParams, folds: usize, seed: u64) -> Result<CvReport> {
    let parts = cross_validate_with(data.labels(), folds, seed, |train, test| {
        let model = TrainedModel::fit(kind, &data.subset(train)?, params)?;
        let mut wrong = 0;
        for &i in test {
            let (x, y) = data.sample(i);
            wrong += usize::from(model.predict(x)? != y);
        }
        Ok(wrong)
    })?;
    Ok(report(kind, folds, seed, parts))
}

/// Stratified k-fold error on a cohort; the window is reselected from each
/// fold's training participants.
pub fn cross_validate_cohort(
    cohort: &[Participant],
    kind: ClassifierKind,
    params: &TrainParams,
    width: usize,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    let labels: Vec<usize> = cohort.iter().map(|p| p.group().index()).collect();
    let parts = cross_validate_with(&labels, folds, seed, |train, test| {
        let pick = |idx: &[usize]| idx.iter().map(|&i| cohort[i].clone()).collect::<Vec<_>>();
        let train = pick(train);
        let spec = select_features(&train, width)?;
        let model = train_mci(&train, &spec, kind, params)?;
        let r = evaluate_mci(&model, &pick(test))?;
        Ok(r.total - r.correct)
    })?;
    Ok(report(kind, folds, seed, parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition() {
        let labels: Vec<usize> = (0..23).map(|i| usize::from(i % 3 == 0)).collect();
        let folds = stratified_folds(&labels, 5, 9).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert_eq!(folds, stratified_folds(&labels, 5, 9).unwrap());
        assert!(stratified_folds(&labels, 1, 0).is_err());
        assert!(stratified_folds(&labels, 24, 0).is_err());
    }

    #[test]
    fn separable_data_has_no_error() {
        let features: Vec<Vec<f64>> = (0..20).map(|i| vec![if i < 10 { -1.0 - i as f64 } else { 1.0 + i as f64 }, 0.5]).collect();
        let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let data = LabeledDataset::new(features, labels, vec!["a".into(), "b".into()]).unwrap();
        for kind in ClassifierKind::ALL {
            let r = cross_validate(&data, kind, &TrainParams { knn_k: 3, ..Default::default() }, 5, 2).unwrap();
            assert_eq!(r.mean_error, 0.0, "{kind}");
            assert_eq!(r.fold_sizes, vec![4; 5]);
        }
    }
}

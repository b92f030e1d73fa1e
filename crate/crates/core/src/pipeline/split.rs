use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Participant, PipelineError, Result};
use crate::analytics::Group;

/// How a cohort is divided into training and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitSpec {
    /// Random split with `round(p * n)` training items.
    Fraction { p: f64, seed: u64 },
    /// Exact per-group counts; they must use up each group.
    FixedCounts { train_healthy: usize, train_impaired: usize, test_healthy: usize, test_impaired: usize, seed: u64 },
}

impl SplitSpec {
    pub fn fixed_counts(train_healthy: usize, train_impaired: usize, test_healthy: usize, test_impaired: usize, seed: u64) -> Self {
        SplitSpec::FixedCounts { train_healthy, train_impaired, test_healthy, test_impaired, seed }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            SplitSpec::Fraction { seed, .. } | SplitSpec::FixedCounts { seed, .. } => seed,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            SplitSpec::Fraction { p, seed } => format!("fraction p={p} seed={seed}"),
            SplitSpec::FixedCounts { train_healthy, train_impaired, test_healthy, test_impaired, seed } => format!(
                "train {}+{} / test {}+{} (healthy+impaired) seed={seed}",
                train_healthy, train_impaired, test_healthy, test_impaired
            ),
        }
    }
}

/// Training and test indices into `groups`, each sorted ascending.
pub fn split_indices(groups: &[Group], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = groups.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed());
    let (mut train, mut test) = match *spec {
        SplitSpec::Fraction { p, .. } => {
            if !(p > 0.0 && p < 1.0) {
                return Err(PipelineError::Split(format!("fraction {p} must lie strictly between 0 and 1")));
            }
            let n_train = (p * n as f64).round() as usize;
            if n_train == 0 || n_train == n {
                return Err(PipelineError::Split(format!("fraction {p} of {n} items leaves an empty part")));
            }
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let test = idx.split_off(n_train);
            (idx, test)
        }
        SplitSpec::FixedCounts { train_healthy, train_impaired, test_healthy, test_impaired, .. } => {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (group, n_train, n_test) in
                [(Group::Healthy, train_healthy, test_healthy), (Group::Impaired, train_impaired, test_impaired)]
            {
                let mut idx: Vec<usize> = (0..n).filter(|&i| groups[i] == group).collect();
                if n_train + n_test != idx.len() {
                    return Err(PipelineError::Split(format!(
                        "{group}: {n_train} train + {n_test} test does not match the {} participants in the cohort",
                        idx.len()
                    )));
                }
                idx.shuffle(&mut rng);
                test.extend(idx.split_off(n_train));
                train.extend(idx);
            }
            if train.is_empty() || test.is_empty() {
                return Err(PipelineError::Split("both parts need at least one participant".into()));
            }
            (train, test)
        }
    };
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits a cohort by [`split_indices`] on participant groups.
pub fn split_dataset(cohort: &[Participant], spec: &SplitSpec) -> Result<(Vec<Participant>, Vec<Participant>)> {
    let groups: Vec<Group> = cohort.iter().map(|p| p.record.group).collect();
    let (train, test) = split_indices(&groups, spec)?;
    Ok((train.iter().map(|&i| cohort[i].clone()).collect(), test.iter().map(|&i| cohort[i].clone()).collect()))
}

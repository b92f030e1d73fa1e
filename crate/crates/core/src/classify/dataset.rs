use super::{ClassifyError, Result};

/// Feature vectors with class indices into a fixed list of class names.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    dim: usize,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let bad = |m: String| Err(ClassifyError::InvalidDataset(m));
        if features.len() != labels.len() {
            return bad(format!("{} feature vectors but {} labels", features.len(), labels.len()));
        }
        if features.is_empty() {
            return bad("no samples".into());
        }
        if class_names.is_empty() {
            return bad("no class names".into());
        }
        let dim = features[0].len();
        if dim == 0 {
            return bad("feature dimension must be positive".into());
        }
        for (i, (x, &y)) in features.iter().zip(&labels).enumerate() {
            if x.len() != dim {
                return bad(format!("sample {i} has dimension {}, expected {dim}", x.len()));
            }
            if let Some(j) = x.iter().position(|v| !v.is_finite()) {
                return bad(format!("sample {i} has a non-finite value at index {j}"));
            }
            if y >= class_names.len() {
                return bad(format!("sample {i} has label {y} but only {} classes exist", class_names.len()));
            }
        }
        Ok(Self { features, labels, class_names, dim })
    }

    /// Convenience constructor taking string labels; classes are named in
    /// order of first appearance unless `class_names` is given.
    pub fn from_named(features: Vec<Vec<f64>>, labels: &[&str], class_names: Option<Vec<String>>) -> Result<Self> {
        let mut names = class_names.unwrap_or_default();
        let fixed = !names.is_empty();
        let mut idx = Vec::with_capacity(labels.len());
        for &l in labels {
            let i = match names.iter().position(|n| n == l) {
                Some(i) => i,
                None if fixed => return Err(ClassifyError::InvalidDataset(format!("unknown label {l:?}"))),
                None => {
                    names.push(l.to_string());
                    names.len() - 1
                }
            };
            idx.push(i);
        }
        Self::new(features, idx, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        (&self.features[i], self.labels[i])
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Class indices that have at least one sample, ascending.
    pub fn present_classes(&self) -> Vec<usize> {
        self.class_counts().iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(features, labels, self.class_names.clone())
    }

    /// Same samples with every feature vector replaced by `f(x)`.
    pub fn map_features(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.features.iter().map(|x| f(x)).collect(), self.labels.clone(), self.class_names.clone())
    }
}

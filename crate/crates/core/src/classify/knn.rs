use super::{argmax_first, check_query, squared_distance, ClassifyError, LabeledDataset, Result};

pub const DEFAULT_K: usize = 5;

/// Stored training set queried by Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub dim: usize,
    pub n_classes: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

pub fn knn_fit(data: &LabeledDataset, k: usize) -> Result<KnnModel> {
    if k == 0 || k > data.len() {
        return Err(ClassifyError::InvalidParameter(format!("k must be in 1..={}, got {k}", data.len())));
    }
    Ok(KnnModel { k, dim: data.dim(), n_classes: data.n_classes(), features: data.features().to_vec(), labels: data.labels().to_vec() })
}

impl KnnModel {
    /// Indices of the `k` nearest samples; equal distances keep insertion order.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_query(self.dim, x)?;
        let mut order: Vec<(f64, usize)> = self.features.iter().enumerate().map(|(i, f)| (squared_distance(f, x), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(order.into_iter().take(self.k).map(|(_, i)| i).collect())
    }

    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        let mut votes = vec![0; self.n_classes];
        for i in self.neighbors(x)? {
            votes[self.labels[i]] += 1;
        }
        Ok(votes)
    }

    /// Majority label among the neighbours; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.votes(x)?))
    }
}

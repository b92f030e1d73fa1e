use nalgebra::{DMatrix, DVector};

use super::{argmax_first, check_query, ClassifyError, LabeledDataset, Result};

/// Gaussian classifier with a shared, shrinkage-regularized covariance.
///
/// Scores are `δ_k(x) = xᵀ Σ⁻¹ μ_k − ½ μ_kᵀ Σ⁻¹ μ_k + ln π_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub dim: usize,
    pub n_classes: usize,
    /// Classes with training samples, ascending; the rows below follow this order.
    pub classes: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// Regularized pooled covariance, row-major `dim × dim`.
    pub covariance: Vec<f64>,
    pub shrinkage: f64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Largest feature dimension accepted by [`lda_fit`].
pub const LDA_MAX_DIM: usize = 4096;

pub fn lda_fit(data: &LabeledDataset) -> Result<LdaModel> {
    if data.dim() > LDA_MAX_DIM {
        return Err(ClassifyError::InvalidParameter(format!(
            "LDA keeps a dense {0}x{0} covariance; dimension {0} exceeds the limit of {LDA_MAX_DIM}",
            data.dim()
        )));
    }
    let classes = data.present_classes();
    if classes.len() < 2 {
        return Err(ClassifyError::SingleClass(classes.len()));
    }
    let d = data.dim();
    let n = data.len();
    let counts = data.class_counts();
    let slot = |label: usize| classes.iter().position(|&c| c == label).expect("label is present");

    let mut means = vec![vec![0.0; d]; classes.len()];
    for (x, &y) in data.features().iter().zip(data.labels()) {
        for (m, v) in means[slot(y)].iter_mut().zip(x) {
            *m += v;
        }
    }
    for (m, &c) in means.iter_mut().zip(&classes) {
        m.iter_mut().for_each(|v| *v /= counts[c] as f64);
    }

    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for (x, &y) in data.features().iter().zip(data.labels()) {
        let r = DVector::from_iterator(d, x.iter().zip(&means[slot(y)]).map(|(a, b)| a - b));
        scatter.ger(1.0, &r, &r, 1.0);
    }
    let dof = n.saturating_sub(classes.len()).max(1) as f64;
    let mut cov = scatter / dof;
    let trace = cov.trace();
    // A zero-scatter sample (e.g. one point per class) still gets a ridge.
    let shrinkage = if trace > 0.0 { 1e-6 * trace / d as f64 } else { 1e-6 };
    for i in 0..d {
        cov[(i, i)] += shrinkage;
    }
    let chol = cov.clone().cholesky().ok_or(ClassifyError::SingularCovariance)?;

    let priors: Vec<f64> = classes.iter().map(|&c| counts[c] as f64 / n as f64).collect();
    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    for (m, p) in means.iter().zip(&priors) {
        let mu = DVector::from_column_slice(m);
        let w = chol.solve(&mu);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::SingularCovariance);
        }
        biases.push(-0.5 * mu.dot(&w) + p.ln());
        weights.push(w.as_slice().to_vec());
    }
    Ok(LdaModel {
        dim: d,
        n_classes: data.n_classes(),
        classes,
        means,
        priors,
        covariance: cov.transpose().as_slice().to_vec(),
        shrinkage,
        weights,
        biases,
    })
}

impl LdaModel {
    /// Discriminant scores in `classes` order.
    pub fn discriminants(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_query(self.dim, x)?;
        Ok(self.weights.iter().zip(&self.biases).map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.classes[argmax_first(&self.discriminants(x)?)])
    }

    /// `Σ⁻¹(μ_a − μ_b)` for two trained class indices.
    pub fn direction(&self, a: usize, b: usize) -> Option<Vec<f64>> {
        let ia = self.classes.iter().position(|&c| c == a)?;
        let ib = self.classes.iter().position(|&c| c == b)?;
        Some(self.weights[ia].iter().zip(&self.weights[ib]).map(|(x, y)| x - y).collect())
    }
}

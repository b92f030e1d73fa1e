//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! Each binary machine solves the C-SVC dual
//! `min ½αᵀQα − Σα  s.t. 0 ≤ α ≤ C, yᵀα = 0` with `Q_ij = y_i y_j K(x_i, x_j)`,
//! picking working pairs by maximal KKT violation with second-order gain.
//! Multiclass problems use one machine per class pair and majority voting.

use serde::{Deserialize, Serialize};

use super::{argmax_first, check_query, squared_distance, ClassifyError, LabeledDataset, Result};

const TAU: f64 = 1e-12;

/// Kernel as requested by the caller; `gamma: None` means `1 / dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
}

/// Kernel with all parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
        }
    }
}

impl KernelSpec {
    pub fn resolve(&self, dim: usize) -> Result<Kernel> {
        match *self {
            KernelSpec::Linear => Ok(Kernel::Linear),
            KernelSpec::Rbf { gamma } => {
                let g = gamma.unwrap_or(1.0 / dim as f64);
                if !(g > 0.0) || !g.is_finite() {
                    return Err(ClassifyError::InvalidParameter(format!("RBF gamma must be positive, got {g}")));
                }
                Ok(Kernel::Rbf { gamma: g })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { kernel: KernelSpec::Linear, c: 1.0, tol: 1e-3, max_iter: 10_000_000 }
    }
}

/// One class-pair machine. `coef[i] = α_i y_i` for each support vector;
/// `decision(x) = Σ coef_i K(sv_i, x) − rho`, positive meaning `positive`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMachine {
    pub positive: usize,
    pub negative: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

impl BinaryMachine {
    pub fn decision(&self, kernel: &Kernel, x: &[f64]) -> f64 {
        self.support_vectors.iter().zip(&self.coef).map(|(sv, &a)| a * kernel.eval(sv, x)).sum::<f64>() - self.rho
    }

    /// Winner of this pair for `x`; a zero decision value goes to `negative`.
    pub fn vote(&self, kernel: &Kernel, x: &[f64]) -> usize {
        if self.decision(kernel, x) > 0.0 {
            self.positive
        } else {
            self.negative
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub dim: usize,
    pub n_classes: usize,
    pub machines: Vec<BinaryMachine>,
}

impl SvmModel {
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_query(self.dim, x)?;
        let mut votes = vec![0; self.n_classes];
        for m in &self.machines {
            votes[m.vote(&self.kernel, x)] += 1;
        }
        Ok(votes)
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.votes(x)?))
    }

    /// Fraction of pairwise machines voting for each class.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.machines.len() as f64;
        Ok(self.votes(x)?.into_iter().map(|v| v as f64 / n).collect())
    }
}

/// Trains one machine per pair of classes present in `data`. Classes in the
/// label space without samples never receive votes.
pub fn svm_fit(data: &LabeledDataset, params: &SvmParams) -> Result<SvmModel> {
    if !(params.c > 0.0) || !params.c.is_finite() {
        return Err(ClassifyError::InvalidParameter(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(ClassifyError::InvalidParameter(format!("tolerance must be positive, got {}", params.tol)));
    }
    let kernel = params.kernel.resolve(data.dim())?;
    let present = data.present_classes();
    if present.len() < 2 {
        return Err(ClassifyError::SingleClass(present.len()));
    }
    let mut machines = Vec::new();
    for (a_pos, &a) in present.iter().enumerate() {
        for &b in &present[a_pos + 1..] {
            let idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == a || data.labels()[i] == b).collect();
            let xs: Vec<&[f64]> = idx.iter().map(|&i| data.features()[i].as_slice()).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| if data.labels()[i] == a { 1.0 } else { -1.0 }).collect();
            let sol = solve_dual(&gram(&kernel, &xs), &ys, params.c, params.tol, params.max_iter);
            let mut support_vectors = Vec::new();
            let mut coef = Vec::new();
            for (k, &alpha) in sol.alpha.iter().enumerate() {
                if alpha > 0.0 {
                    support_vectors.push(xs[k].to_vec());
                    coef.push(alpha * ys[k]);
                }
            }
            machines.push(BinaryMachine { positive: a, negative: b, support_vectors, coef, rho: sol.rho, iterations: sol.iterations });
        }
    }
    Ok(SvmModel { kernel, c: params.c, dim: data.dim(), n_classes: data.n_classes(), machines })
}

fn gram(kernel: &Kernel, xs: &[&[f64]]) -> Vec<f64> {
    let n = xs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(xs[i], xs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

/// SMO on a precomputed kernel matrix `k` (row-major `n × n`).
pub(crate) fn solve_dual(k: &[f64], y: &[f64], c: f64, eps: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    while let Some((i, j)) = select_pair(&kk, y, &alpha, &grad, c, eps) {
        if iterations >= max_iter {
            log::warn!("SMO stopped after {max_iter} iterations without reaching tolerance {eps}");
            break;
        }
        iterations += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (kk(i, i) + kk(j, j) - 2.0 * kk(i, j)).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        }
    }
    DualSolution { rho: compute_rho(y, &alpha, &grad, c), alpha, iterations }
}

fn select_pair(kk: &impl Fn(usize, usize) -> f64, y: &[f64], alpha: &[f64], grad: &[f64], c: f64, eps: f64) -> Option<(usize, usize)> {
    let n = y.len();
    let mut gmax = f64::NEG_INFINITY;
    let mut i_sel = None;
    for t in 0..n {
        let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
        if up && -y[t] * grad[t] >= gmax {
            gmax = -y[t] * grad[t];
            i_sel = Some(t);
        }
    }
    let i = i_sel?;
    let mut gmax2 = f64::NEG_INFINITY;
    let mut best = f64::INFINITY;
    let mut j_sel = None;
    for t in 0..n {
        let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
        if !low {
            continue;
        }
        let yg = y[t] * grad[t];
        gmax2 = gmax2.max(yg);
        let diff = gmax + yg;
        if diff > 0.0 {
            let quad = (kk(i, i) + kk(t, t) - 2.0 * kk(i, t)).max(TAU);
            let obj = -diff * diff / quad;
            if obj <= best {
                best = obj;
                j_sel = Some(t);
            }
        }
    }
    if gmax + gmax2 < eps {
        return None;
    }
    j_sel.map(|j| (i, j))
}

fn compute_rho(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

//! Classifier front end and the `EMSM` model file.
//!
//! ```text
//! "EMSM" | version u32 | kind u32 | n_classes u32 | { len u32 | name } * n_classes | dim u32 | NWF1 block
//! ```
//!
//! The NWF1 block stores `f32` values; model parameters are `f64`, so every
//! value is written as its two 32-bit halves (low word first) reinterpreted
//! as `f32`. Each stored tensor therefore carries a trailing dimension of 2
//! and loads back bit for bit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::knn::{knn_fit, KnnModel, DEFAULT_K};
use super::lda::{lda_fit, LdaModel};
use super::svm::{svm_fit, BinaryMachine, Kernel, SvmModel, SvmParams};
use super::tree::{tree_fit, Split, TreeModel, TreeNode, TreeParams};
use super::{check_query, ClassifyError, LabeledDataset, Result};
use crate::net::{WeightContainer, WeightTensor};

pub const EMSM_MAGIC: &[u8; 4] = b"EMSM";
pub const EMSM_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    Lda,
    Svm,
    Knn,
    Tree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [ClassifierKind::Lda, ClassifierKind::Svm, ClassifierKind::Knn, ClassifierKind::Tree];

    fn tag(self) -> u32 {
        match self {
            ClassifierKind::Lda => 1,
            ClassifierKind::Svm => 2,
            ClassifierKind::Knn => 3,
            ClassifierKind::Tree => 4,
        }
    }

    fn from_tag(tag: u32) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag).ok_or_else(|| ClassifyError::Format(format!("unknown classifier tag {tag}")))
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Lda => "LDA",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Tree => "Decision Tree",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ClassifierKind::Lda),
            "svm" => Ok(ClassifierKind::Svm),
            "knn" => Ok(ClassifierKind::Knn),
            "tree" | "decision-tree" | "decision tree" => Ok(ClassifierKind::Tree),
            _ => Err(ClassifyError::InvalidParameter(format!("unknown classifier {s:?} (expected lda, svm, knn or tree)"))),
        }
    }
}

/// Per-dimension z-score fitted on training data. Constant dimensions keep
/// unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &LabeledDataset) -> Self {
        let n = data.len() as f64;
        let d = data.dim();
        let mut mean = vec![0.0; d];
        for x in data.features() {
            mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in data.features() {
            var.iter_mut().zip(x.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m) * (v - m));
        }
        let scale = var.iter().map(|s| (s / n).sqrt()).map(|sd| if sd > 1e-12 { sd } else { 1.0 }).collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.scale)).map(|(v, (m, s))| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub svm: SvmParams,
    pub knn_k: usize,
    pub tree: TreeParams,
    /// Standardize features before SVM, LDA and kNN.
    pub standardize: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { svm: SvmParams::default(), knn_k: DEFAULT_K, tree: TreeParams::default(), standardize: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Lda(LdaModel),
    Svm(SvmModel),
    Knn(KnnModel),
    Tree(TreeModel),
}

/// A fitted classifier with its label map and preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub class_names: Vec<String>,
    pub dim: usize,
    pub n_train: usize,
    pub standardizer: Option<Standardizer>,
    pub classifier: Classifier,
}

impl TrainedModel {
    pub fn fit(kind: ClassifierKind, data: &LabeledDataset, params: &TrainParams) -> Result<Self> {
        let standardizer = (params.standardize && kind != ClassifierKind::Tree).then(|| Standardizer::fit(data));
        let scaled;
        let train = match &standardizer {
            Some(s) => {
                scaled = data.map_features(|x| s.apply(x))?;
                &scaled
            }
            None => data,
        };
        let classifier = match kind {
            ClassifierKind::Lda => Classifier::Lda(lda_fit(train)?),
            ClassifierKind::Svm => Classifier::Svm(svm_fit(train, &params.svm)?),
            ClassifierKind::Knn => Classifier::Knn(knn_fit(train, params.knn_k.min(train.len()))?),
            ClassifierKind::Tree => Classifier::Tree(tree_fit(train, &params.tree)?),
        };
        Ok(Self { class_names: data.class_names().to_vec(), dim: data.dim(), n_train: data.len(), standardizer, classifier })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.classifier {
            Classifier::Lda(_) => ClassifierKind::Lda,
            Classifier::Svm(_) => ClassifierKind::Svm,
            Classifier::Knn(_) => ClassifierKind::Knn,
            Classifier::Tree(_) => ClassifierKind::Tree,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_query(self.dim, x)?;
        Ok(match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let x = self.prepare(x)?;
        match &self.classifier {
            Classifier::Lda(m) => m.predict(&x),
            Classifier::Svm(m) => m.predict(&x),
            Classifier::Knn(m) => m.predict(&x),
            Classifier::Tree(m) => m.predict(&x),
        }
    }

    /// Per-class scores summing to one whose first maximum is the prediction:
    /// pairwise vote fractions (SVM), neighbour fractions (kNN), leaf class
    /// frequencies (tree) or a one-hot vector (LDA).
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.prepare(x)?;
        match &self.classifier {
            Classifier::Svm(m) => m.scores(&x),
            Classifier::Knn(m) => Ok(m.votes(&x)?.into_iter().map(|v| v as f64 / m.k as f64).collect()),
            Classifier::Tree(m) => m.leaf_fractions(&x),
            Classifier::Lda(m) => {
                let mut s = vec![0.0; self.n_classes()];
                s[m.predict(&x)?] = 1.0;
                Ok(s)
            }
        }
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.class_names[self.predict(x)?])
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = EMSM_MAGIC.to_vec();
        out.extend(EMSM_VERSION.to_le_bytes());
        out.extend(self.kind().tag().to_le_bytes());
        out.extend((self.class_names.len() as u32).to_le_bytes());
        for name in &self.class_names {
            out.extend((name.len() as u32).to_le_bytes());
            out.extend(name.as_bytes());
        }
        out.extend((self.dim as u32).to_le_bytes());
        out.extend(self.payload().to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Reader { bytes, pos: 0 };
        if cur.take(4)? != EMSM_MAGIC {
            return Err(ClassifyError::Format("bad magic, expected EMSM".into()));
        }
        let version = cur.u32()?;
        if version != EMSM_VERSION {
            return Err(ClassifyError::Version(version));
        }
        let kind = ClassifierKind::from_tag(cur.u32()?)?;
        let n_classes = cur.u32()? as usize;
        let mut class_names = Vec::new();
        for _ in 0..n_classes {
            let len = cur.u32()? as usize;
            let name = std::str::from_utf8(cur.take(len)?).map_err(|_| ClassifyError::Format("class name is not UTF-8".into()))?;
            class_names.push(name.to_string());
        }
        let dim = cur.u32()? as usize;
        if n_classes < 2 || dim == 0 {
            return Err(ClassifyError::Format(format!("{n_classes} classes, dimension {dim}")));
        }
        let payload = WeightContainer::from_bytes(&bytes[cur.pos..]).map_err(|e| ClassifyError::Format(e.to_string()))?;
        decode(kind, class_names, dim, &Payload(&payload))
    }

    fn payload(&self) -> WeightContainer {
        let mut p = PayloadWriter::default();
        let d = self.dim;
        p.put("meta", vec![1], &[self.n_train as f64]);
        if let Some(s) = &self.standardizer {
            p.put("standardizer/mean", vec![d], &s.mean);
            p.put("standardizer/scale", vec![d], &s.scale);
        }
        match &self.classifier {
            Classifier::Svm(m) => {
                let (kind, gamma) = match m.kernel {
                    Kernel::Linear => (0.0, 0.0),
                    Kernel::Rbf { gamma } => (1.0, gamma),
                };
                p.put("svm/kernel", vec![3], &[kind, gamma, m.c]);
                p.put("svm/count", vec![1], &[m.machines.len() as f64]);
                for (i, mach) in m.machines.iter().enumerate() {
                    let key = |s: &str| format!("svm/m{i:05}/{s}");
                    let nsv = mach.coef.len();
                    p.put(&key("head"), vec![4], &[mach.positive as f64, mach.negative as f64, mach.rho, mach.iterations as f64]);
                    p.put(&key("coef"), vec![nsv], &mach.coef);
                    p.put(&key("sv"), vec![nsv, d], &mach.support_vectors.concat());
                }
            }
            Classifier::Lda(m) => {
                let k = m.classes.len();
                p.put("lda/classes", vec![k], &m.classes.iter().map(|&c| c as f64).collect::<Vec<_>>());
                p.put("lda/means", vec![k, d], &m.means.concat());
                p.put("lda/priors", vec![k], &m.priors);
                p.put("lda/covariance", vec![d, d], &m.covariance);
                p.put("lda/shrinkage", vec![1], &[m.shrinkage]);
                p.put("lda/weights", vec![k, d], &m.weights.concat());
                p.put("lda/biases", vec![k], &m.biases);
            }
            Classifier::Knn(m) => {
                p.put("knn/k", vec![1], &[m.k as f64]);
                p.put("knn/x", vec![m.labels.len(), d], &m.features.concat());
                p.put("knn/y", vec![m.labels.len()], &m.labels.iter().map(|&y| y as f64).collect::<Vec<_>>());
            }
            Classifier::Tree(m) => {
                p.put("tree/params", vec![2], &[m.params.max_depth as f64, m.params.min_leaf as f64]);
                let mut rows = Vec::new();
                let mut counts = Vec::new();
                for node in &m.nodes {
                    match node {
                        TreeNode::Leaf { label, counts: c } => {
                            rows.extend([1.0, *label as f64, 0.0, 0.0, 0.0, 0.0]);
                            counts.extend(c.iter().map(|&v| v as f64));
                        }
                        TreeNode::Internal { split, left, right } => {
                            rows.extend([0.0, split.feature as f64, split.threshold, split.gain, *left as f64, *right as f64]);
                            counts.extend(std::iter::repeat_n(0.0, m.n_classes));
                        }
                    }
                }
                p.put("tree/nodes", vec![m.nodes.len(), 6], &rows);
                p.put("tree/counts", vec![m.nodes.len(), m.n_classes], &counts);
            }
        }
        p.0
    }
}

#[derive(Default)]
struct PayloadWriter(WeightContainer);

impl PayloadWriter {
    fn put(&mut self, name: &str, mut dims: Vec<usize>, values: &[f64]) {
        dims.push(2);
        let words = values
            .iter()
            .flat_map(|v| {
                let bits = v.to_bits();
                [f32::from_bits(bits as u32), f32::from_bits((bits >> 32) as u32)]
            })
            .collect();
        let t = WeightTensor::new(dims, words).expect("dims match values");
        self.0.insert(name, t).expect("payload names are unique");
    }
}

struct Payload<'a>(&'a WeightContainer);

impl Payload<'_> {
    fn get(&self, name: &str, dims: &[usize]) -> Result<Vec<f64>> {
        let t = self.0.get(name).ok_or_else(|| ClassifyError::Format(format!("missing tensor {name}")))?;
        let mut want = dims.to_vec();
        want.push(2);
        if t.dims != want {
            return Err(ClassifyError::Format(format!("tensor {name} has dims {:?}, expected {want:?}", t.dims)));
        }
        Ok(t.values.chunks_exact(2).map(|w| f64::from_bits(w[0].to_bits() as u64 | (w[1].to_bits() as u64) << 32)).collect())
    }

    fn has(&self, name: &str) -> bool {
        self.0.get(name).is_some()
    }

    /// Leading dimension of a stored tensor.
    fn rows(&self, name: &str) -> Result<usize> {
        self.0.get(name).and_then(|t| t.dims.first().copied()).ok_or_else(|| ClassifyError::Format(format!("missing tensor {name}")))
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        Ok(self.get(name, &[1])?[0])
    }
}

fn index(v: f64, bound: usize, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < bound as f64 {
        Ok(v as usize)
    } else {
        Err(ClassifyError::Format(format!("{what} {v} out of range 0..{bound}")))
    }
}

fn rows_of(flat: Vec<f64>, width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(|c| c.to_vec()).collect()
}

fn decode(kind: ClassifierKind, class_names: Vec<String>, dim: usize, p: &Payload) -> Result<TrainedModel> {
    let nc = class_names.len();
    let n_train = index(p.scalar("meta")?, usize::MAX, "training size")?;
    let standardizer = if p.has("standardizer/mean") {
        Some(Standardizer { mean: p.get("standardizer/mean", &[dim])?, scale: p.get("standardizer/scale", &[dim])? })
    } else {
        None
    };
    let classifier = match kind {
        ClassifierKind::Svm => {
            let k = p.get("svm/kernel", &[3])?;
            let kernel = if k[0] == 0.0 { Kernel::Linear } else { Kernel::Rbf { gamma: k[1] } };
            let count = index(p.scalar("svm/count")?, usize::MAX, "machine count")?;
            let mut machines = Vec::with_capacity(count);
            for i in 0..count {
                let key = |s: &str| format!("svm/m{i:05}/{s}");
                let head = p.get(&key("head"), &[4])?;
                let nsv = p.rows(&key("coef"))?;
                machines.push(BinaryMachine {
                    positive: index(head[0], nc, "class")?,
                    negative: index(head[1], nc, "class")?,
                    rho: head[2],
                    iterations: index(head[3], usize::MAX, "iterations")?,
                    coef: p.get(&key("coef"), &[nsv])?,
                    support_vectors: rows_of(p.get(&key("sv"), &[nsv, dim])?, dim),
                });
            }
            Classifier::Svm(SvmModel { kernel, c: k[2], dim, n_classes: nc, machines })
        }
        ClassifierKind::Lda => {
            let k = p.rows("lda/classes")?;
            let classes = p.get("lda/classes", &[k])?.into_iter().map(|v| index(v, nc, "class")).collect::<Result<Vec<_>>>()?;
            Classifier::Lda(LdaModel {
                dim,
                n_classes: nc,
                classes,
                means: rows_of(p.get("lda/means", &[k, dim])?, dim),
                priors: p.get("lda/priors", &[k])?,
                covariance: p.get("lda/covariance", &[dim, dim])?,
                shrinkage: p.scalar("lda/shrinkage")?,
                weights: rows_of(p.get("lda/weights", &[k, dim])?, dim),
                biases: p.get("lda/biases", &[k])?,
            })
        }
        ClassifierKind::Knn => {
            let n = p.rows("knn/y")?;
            let labels = p.get("knn/y", &[n])?.into_iter().map(|v| index(v, nc, "label")).collect::<Result<Vec<_>>>()?;
            let k = index(p.scalar("knn/k")?, n + 1, "k")?;
            if k == 0 {
                return Err(ClassifyError::Format("k is zero".into()));
            }
            Classifier::Knn(KnnModel { k, dim, n_classes: nc, features: rows_of(p.get("knn/x", &[n, dim])?, dim), labels })
        }
        ClassifierKind::Tree => {
            let params = p.get("tree/params", &[2])?;
            let n = p.rows("tree/nodes")?;
            if n == 0 {
                return Err(ClassifyError::Format("tree has no nodes".into()));
            }
            let rows = p.get("tree/nodes", &[n, 6])?;
            let counts = p.get("tree/counts", &[n, nc])?;
            let mut nodes = Vec::with_capacity(n);
            for (i, r) in rows.chunks(6).enumerate() {
                nodes.push(if r[0] == 1.0 {
                    TreeNode::Leaf {
                        label: index(r[1], nc, "leaf label")?,
                        counts: counts[i * nc..(i + 1) * nc].iter().map(|&c| index(c, usize::MAX, "count")).collect::<Result<_>>()?,
                    }
                } else {
                    // Children always follow their parent, so descent cannot loop.
                    let left = index(r[4], n, "child")?;
                    let right = index(r[5], n, "child")?;
                    if left <= i || right <= i {
                        return Err(ClassifyError::Format(format!("node {i} has a backward child link")));
                    }
                    TreeNode::Internal { split: Split { feature: index(r[1], dim, "feature")?, threshold: r[2], gain: r[3] }, left, right }
                });
            }
            let params =
                TreeParams { max_depth: index(params[0], usize::MAX, "depth")?, min_leaf: index(params[1], usize::MAX, "min_leaf")? };
            Classifier::Tree(TreeModel { dim, n_classes: nc, params, nodes })
        }
    };
    Ok(TrainedModel { class_names, dim, n_train, standardizer, classifier })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ClassifyError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model.to_bytes()).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| ClassifyError::Io(format!("{}: {e}", path.display())))?;
    TrainedModel::from_bytes(&bytes)
}

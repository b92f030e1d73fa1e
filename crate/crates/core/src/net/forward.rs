use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::graph::{LayerKind, NetworkGraph};
use super::weights::{WeightContainer, WeightTensor};
use super::{NetError, Result};
use crate::tensor::{self, ConvWeights, Tensor};

/// Flattened `(h, w, c)` activations of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f32>,
    pub source_layer: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Op {
    Normalize,
    Standard(ConvWeights),
    Depthwise(ConvWeights),
    Pointwise(ConvWeights),
    Relu6,
    Add,
    Pool,
}

/// A graph with every weight key resolved and shape-checked.
///
/// Immutable once built; `forward` may be called from several threads.
#[derive(Debug, Clone)]
pub struct Network {
    graph: NetworkGraph,
    ops: Vec<Op>,
    inputs: Vec<Vec<usize>>,
    shapes: Vec<(usize, usize, usize)>,
}

fn kernel_key(key: &str) -> String {
    format!("{key}/kernel")
}

fn bias_key(key: &str) -> String {
    format!("{key}/bias")
}

impl Network {
    pub fn bind(graph: NetworkGraph, weights: &WeightContainer) -> Result<Self> {
        let shapes = graph.infer_shapes()?;
        let in_shapes = graph.input_shapes(&shapes);
        let index: HashMap<&str, usize> = graph.layers.iter().enumerate().map(|(i, l)| (l.name.as_str(), i)).collect();
        let mut ops = Vec::with_capacity(graph.layers.len());
        let mut inputs = Vec::with_capacity(graph.layers.len());
        for (i, layer) in graph.layers.iter().enumerate() {
            inputs.push(layer.inputs.iter().map(|n| index[n.as_str()]).collect());
            let op = match layer.kind {
                LayerKind::InputNormalize => Op::Normalize,
                LayerKind::Relu6 => Op::Relu6,
                LayerKind::ResidualAdd => Op::Add,
                LayerKind::GlobalAvgPool => Op::Pool,
                kind => {
                    let key = layer.weight_key.as_deref().expect("validated");
                    let shape_err = |detail: String| NetError::Shape { layer: layer.name.clone(), detail };
                    let fetch =
                        |name: String| weights.get(&name).ok_or_else(|| NetError::MissingWeight { layer: layer.name.clone(), key: name });
                    let kernel = fetch(kernel_key(key))?;
                    let bias = fetch(bias_key(key))?;
                    let k = layer.kernel.expect("validated");
                    let ci = in_shapes[i].2;
                    let co = shapes[i].2;
                    let want = match kind {
                        LayerKind::ConvDepthwise => vec![k, k, ci, 1],
                        _ => vec![k, k, ci, co],
                    };
                    if kernel.dims != want {
                        return Err(shape_err(format!("kernel dims {:?}, expected {want:?}", kernel.dims)));
                    }
                    if bias.dims != [co] {
                        return Err(shape_err(format!("bias dims {:?}, expected [{co}]", bias.dims)));
                    }
                    let w = match kind {
                        LayerKind::ConvDepthwise => ConvWeights::depthwise(k, k, ci, kernel.values.clone(), bias.values.clone()),
                        _ => ConvWeights::standard(k, k, ci, co, kernel.values.clone(), bias.values.clone()),
                    }
                    .and_then(|w| w.with_stride(layer.stride()))
                    .map(|w| w.with_padding(layer.padding()))
                    .map_err(|e| shape_err(e.to_string()))?;
                    match kind {
                        LayerKind::ConvStandard => Op::Standard(w),
                        LayerKind::ConvDepthwise => Op::Depthwise(w),
                        _ => Op::Pointwise(w),
                    }
                }
            };
            ops.push(op);
        }
        Ok(Self { graph, ops, inputs, shapes })
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn output_shape(&self, layer: &str) -> Result<(usize, usize, usize)> {
        let i = self.graph.position(layer).ok_or_else(|| self.graph.unknown(layer))?;
        Ok(self.shapes[i])
    }

    /// Prepares an image for the input layer: grayscale is replicated to
    /// three channels when the graph expects colour.
    fn prepare(&self, image: &Tensor) -> Result<Tensor> {
        let image = if image.channels() == 1 && self.graph.input_shape.2 == 3 { image.to_rgb() } else { image.clone() };
        if image.shape() != self.graph.input_shape {
            return Err(NetError::Shape {
                layer: "input".into(),
                detail: format!("image {:?}, expected {:?}", image.shape(), self.graph.input_shape),
            });
        }
        Ok(image)
    }

    fn eval(&self, i: usize, image: &Tensor, outputs: &[Option<Tensor>]) -> Result<Tensor> {
        let arg = |k: usize| outputs[self.inputs[i][k]].as_ref().expect("inputs evaluated before use");
        let layer = &self.graph.layers[i].name;
        let wrap = |e: tensor::TensorError| NetError::Shape { layer: layer.clone(), detail: e.to_string() };
        Ok(match &self.ops[i] {
            Op::Normalize => image.map(|x| x / 127.5 - 1.0),
            Op::Standard(w) => tensor::conv2d_standard(arg(0), w).map_err(wrap)?,
            Op::Depthwise(w) => tensor::conv2d_depthwise(arg(0), w).map_err(wrap)?,
            Op::Pointwise(w) => tensor::conv2d_pointwise(arg(0), w).map_err(wrap)?,
            Op::Relu6 => tensor::relu6(arg(0)),
            Op::Add => tensor::residual_add(arg(0), arg(1)).map_err(wrap)?,
            Op::Pool => tensor::global_avg_pool(arg(0)),
        })
    }

    /// Evaluates every layer and returns all activations by name.
    pub fn forward(&self, image: &Tensor) -> Result<HashMap<String, Tensor>> {
        let image = self.prepare(image)?;
        let mut outputs: Vec<Option<Tensor>> = vec![None; self.ops.len()];
        for i in 0..self.ops.len() {
            outputs[i] = Some(self.eval(i, &image, &outputs)?);
        }
        Ok(self.graph.layers.iter().map(|l| l.name.clone()).zip(outputs.into_iter().map(|t| t.expect("evaluated"))).collect())
    }

    /// Evaluates only up to `layer_name`, releasing activations once their
    /// last consumer has run, and returns the flattened layer output.
    pub fn extract_features(&self, image: &Tensor, layer_name: &str) -> Result<FeatureVector> {
        let target = self.graph.position(layer_name).ok_or_else(|| self.graph.unknown(layer_name))?;
        let image = self.prepare(image)?;
        let mut last_use: Vec<usize> = (0..=target).collect();
        for i in 0..=target {
            for &src in &self.inputs[i] {
                last_use[src] = last_use[src].max(i);
            }
        }
        let mut outputs: Vec<Option<Tensor>> = vec![None; target + 1];
        for i in 0..=target {
            outputs[i] = Some(self.eval(i, &image, &outputs)?);
            for &src in &self.inputs[i] {
                if last_use[src] == i && src != target {
                    outputs[src] = None;
                }
            }
        }
        let values = outputs[target].take().expect("target evaluated").into_values();
        Ok(FeatureVector { values, source_layer: layer_name.to_string() })
    }
}

/// Fixed-seed He-normal weights (zero bias) for every convolution of `graph`.
pub fn random_weights(graph: &NetworkGraph, seed: u64) -> Result<WeightContainer> {
    let shapes = graph.infer_shapes()?;
    let in_shapes = graph.input_shapes(&shapes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut container = WeightContainer::new();
    for (i, layer) in graph.layers.iter().enumerate() {
        if !layer.kind.is_conv() {
            continue;
        }
        let key = layer.weight_key.as_deref().expect("validated");
        let k = layer.kernel.expect("validated");
        let (ci, co) = (in_shapes[i].2, shapes[i].2);
        let (dims, fan_in) = match layer.kind {
            LayerKind::ConvDepthwise => (vec![k, k, ci, 1], k * k),
            _ => (vec![k, k, ci, co], k * k * ci),
        };
        let normal = Normal::new(0.0f32, (2.0 / fan_in as f32).sqrt()).expect("positive std");
        let n: usize = dims.iter().product();
        let values = (0..n).map(|_| normal.sample(&mut rng)).collect();
        container.insert(kernel_key(key), WeightTensor::new(dims, values)?)?;
        container.insert(bias_key(key), WeightTensor::new(vec![co], vec![0.0; co])?)?;
    }
    Ok(container)
}

#[cfg(test)]
mod tests {
    use super::super::graph::LayerSpec;
    use super::*;

    fn normalize_only() -> NetworkGraph {
        NetworkGraph::new("n", (3, 3, 3), vec![LayerSpec::new("input_normalize", LayerKind::InputNormalize, &[])]).unwrap()
    }

    #[test]
    fn normalization_fixed_point() {
        let net = Network::bind(normalize_only(), &WeightContainer::new()).unwrap();
        let image = Tensor::filled(3, 3, 3, 127.5).unwrap();
        let out = net.forward(&image).unwrap();
        assert!(out["input_normalize"].values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_pointwise_after_normalize() {
        let g = NetworkGraph::new(
            "toy",
            (2, 2, 2),
            vec![
                LayerSpec::new("in", LayerKind::InputNormalize, &[]),
                LayerSpec::conv("pw", LayerKind::ConvPointwise, "in", 1, Some(2), 1, 0),
            ],
        )
        .unwrap();
        let mut w = WeightContainer::new();
        w.insert("pw/kernel", WeightTensor::new(vec![1, 1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        w.insert("pw/bias", WeightTensor::new(vec![2], vec![0.0, 0.0]).unwrap()).unwrap();
        let net = Network::bind(g, &w).unwrap();
        let image = Tensor::from_u8(2, 2, 2, &[0, 255, 10, 20, 30, 40, 50, 60]).unwrap();
        let out = net.forward(&image).unwrap();
        assert_eq!(out["pw"], out["in"]);
        assert_eq!(net.extract_features(&image, "pw").unwrap().values, out["in"].values());
    }

    #[test]
    fn grayscale_is_replicated() {
        let net = Network::bind(normalize_only(), &WeightContainer::new()).unwrap();
        let gray = Tensor::filled(3, 3, 1, 255.0).unwrap();
        let f = net.extract_features(&gray, "input_normalize").unwrap();
        assert_eq!(f.len(), 27);
        assert!(f.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn bind_errors_name_the_layer() {
        let g = NetworkGraph::new(
            "toy",
            (2, 2, 2),
            vec![
                LayerSpec::new("in", LayerKind::InputNormalize, &[]),
                LayerSpec::conv("pw", LayerKind::ConvPointwise, "in", 1, Some(3), 1, 0),
            ],
        )
        .unwrap();
        let err = Network::bind(g.clone(), &WeightContainer::new()).unwrap_err();
        assert!(matches!(err, NetError::MissingWeight { ref layer, .. } if layer == "pw"));
        let mut w = WeightContainer::new();
        w.insert("pw/kernel", WeightTensor::new(vec![1, 1, 2, 2], vec![0.0; 4]).unwrap()).unwrap();
        w.insert("pw/bias", WeightTensor::new(vec![3], vec![0.0; 3]).unwrap()).unwrap();
        let err = Network::bind(g, &w).unwrap_err();
        assert!(matches!(err, NetError::Shape { ref layer, .. } if layer == "pw"), "{err}");
    }

    #[test]
    fn unknown_layer_lists_available() {
        let net = Network::bind(normalize_only(), &WeightContainer::new()).unwrap();
        let err = net.extract_features(&Tensor::zeros(3, 3, 3).unwrap(), "no_such_layer").unwrap_err();
        assert!(err.to_string().contains("input_normalize"), "{err}");
    }

    #[test]
    fn wrong_image_shape() {
        let net = Network::bind(normalize_only(), &WeightContainer::new()).unwrap();
        assert!(net.forward(&Tensor::zeros(4, 3, 3).unwrap()).is_err());
    }

    #[test]
    fn random_weights_are_seeded() {
        let g = NetworkGraph::mobilenet_v2();
        let a = random_weights(&g, 7).unwrap();
        assert_eq!(a, random_weights(&g, 7).unwrap());
        assert_ne!(a, random_weights(&g, 8).unwrap());
        assert_eq!(a.get("Conv1/kernel").unwrap().dims, vec![3, 3, 3, 32]);
        assert_eq!(a.get("block_11_depthwise/kernel").unwrap().dims, vec![3, 3, 576, 1]);
        Network::bind(g, &a).unwrap();
    }
}

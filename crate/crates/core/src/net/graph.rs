use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetError, Result};
use crate::tensor::output_extent;

/// Topology of the bundled MobileNetV2 trunk (through block 16, batch norm
/// folded into the convolutions).
pub const MOBILENET_V2_TOPOLOGY: &str = include_str!("../../assets/mobilenet_v2.json");

pub const DEFAULT_FEATURE_LAYER: &str = "block_11_add";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    InputNormalize,
    ConvStandard,
    ConvDepthwise,
    ConvPointwise,
    Relu6,
    ResidualAdd,
    GlobalAvgPool,
}

impl LayerKind {
    fn arity(self) -> usize {
        match self {
            LayerKind::InputNormalize => 0,
            LayerKind::ResidualAdd => 2,
            _ => 1,
        }
    }

    pub fn is_conv(self) -> bool {
        matches!(self, LayerKind::ConvStandard | LayerKind::ConvDepthwise | LayerKind::ConvPointwise)
    }
}

/// One node of the layer graph.
///
/// Convolution layers carry their geometry (`kernel`, `filters`, `stride`,
/// `padding`) so shapes can be propagated without weights; the tensors
/// `<weight_key>/kernel` and `<weight_key>/bias` are checked against it
/// at bind time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<usize>,
    /// Output channels; depthwise layers inherit their input channel count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
}

impl LayerSpec {
    pub fn new(name: impl Into<String>, kind: LayerKind, inputs: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            weight_key: None,
            kernel: None,
            filters: None,
            stride: None,
            padding: None,
        }
    }

    /// Convolution layer whose weight key equals its name.
    pub fn conv(name: &str, kind: LayerKind, input: &str, kernel: usize, filters: Option<usize>, stride: usize, padding: usize) -> Self {
        Self {
            weight_key: Some(name.to_string()),
            kernel: Some(kernel),
            filters,
            stride: Some(stride),
            padding: Some(padding),
            ..Self::new(name, kind, &[input])
        }
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(1)
    }

    pub fn padding(&self) -> usize {
        self.padding.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    #[serde(default)]
    pub name: String,
    pub input_shape: (usize, usize, usize),
    pub layers: Vec<LayerSpec>,
}

impl NetworkGraph {
    /// Validates names, arity, ordering and conv geometry.
    pub fn new(name: impl Into<String>, input_shape: (usize, usize, usize), layers: Vec<LayerSpec>) -> Result<Self> {
        let g = Self { name: name.into(), input_shape, layers };
        g.validate()?;
        Ok(g)
    }

    pub fn mobilenet_v2() -> Self {
        Self::from_json(MOBILENET_V2_TOPOLOGY).expect("bundled topology is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: NetworkGraph = serde_json::from_str(text).map_err(|e| NetError::Topology(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    fn validate(&self) -> Result<()> {
        let (h, w, c) = self.input_shape;
        if h == 0 || w == 0 || c == 0 {
            return Err(NetError::Topology(format!("input shape {:?} must be positive", self.input_shape)));
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let bad = |msg: String| NetError::Topology(format!("layer '{}': {msg}", layer.name));
            if seen.contains_key(layer.name.as_str()) {
                return Err(bad("duplicate layer name".into()));
            }
            if layer.inputs.len() != layer.kind.arity() {
                return Err(bad(format!("{:?} takes {} inputs, got {}", layer.kind, layer.kind.arity(), layer.inputs.len())));
            }
            for input in &layer.inputs {
                if !seen.contains_key(input.as_str()) {
                    return Err(bad(format!("input '{input}' is not defined by an earlier layer")));
                }
            }
            if layer.kind.is_conv() {
                if layer.weight_key.is_none() {
                    return Err(bad("convolution needs a weight_key".into()));
                }
                match layer.kernel {
                    Some(0) | None => return Err(bad("convolution needs a positive kernel size".into())),
                    Some(k) if layer.kind == LayerKind::ConvPointwise && k != 1 => {
                        return Err(bad(format!("pointwise kernel must be 1, got {k}")))
                    }
                    _ => {}
                }
                if layer.kind != LayerKind::ConvDepthwise && !matches!(layer.filters, Some(f) if f > 0) {
                    return Err(bad("convolution needs a positive filter count".into()));
                }
                if layer.stride == Some(0) {
                    return Err(bad("stride must be positive".into()));
                }
            }
            seen.insert(&layer.name, i);
        }
        Ok(())
    }

    pub fn list_layers(&self) -> Vec<&str> {
        self.layers.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    pub fn layer(&self, name: &str) -> Result<&LayerSpec> {
        self.position(name).map(|i| &self.layers[i]).ok_or_else(|| self.unknown(name))
    }

    pub(crate) fn unknown(&self, name: &str) -> NetError {
        NetError::UnknownLayer { name: name.to_string(), available: self.list_layers().join(", ") }
    }

    /// Output `(h, w, c)` of every layer, in layer order.
    pub fn infer_shapes(&self) -> Result<Vec<(usize, usize, usize)>> {
        let mut shapes: Vec<(usize, usize, usize)> = Vec::with_capacity(self.layers.len());
        let index: HashMap<&str, usize> = self.layers.iter().enumerate().map(|(i, l)| (l.name.as_str(), i)).collect();
        for layer in &self.layers {
            let input = |k: usize| shapes[index[layer.inputs[k].as_str()]];
            let shape = match layer.kind {
                LayerKind::InputNormalize => self.input_shape,
                LayerKind::Relu6 => input(0),
                LayerKind::GlobalAvgPool => (1, 1, input(0).2),
                LayerKind::ResidualAdd => {
                    let (a, b) = (input(0), input(1));
                    if a != b {
                        return Err(NetError::Shape { layer: layer.name.clone(), detail: format!("residual inputs {a:?} vs {b:?}") });
                    }
                    a
                }
                LayerKind::ConvStandard | LayerKind::ConvDepthwise | LayerKind::ConvPointwise => {
                    let (h, w, c) = input(0);
                    let k = layer.kernel.unwrap_or(1);
                    let oh = output_extent(h, k, layer.stride(), layer.padding());
                    let ow = output_extent(w, k, layer.stride(), layer.padding());
                    let (Some(oh), Some(ow)) = (oh, ow) else {
                        return Err(NetError::Shape { layer: layer.name.clone(), detail: format!("empty output for input {h}x{w}") });
                    };
                    let oc = match layer.kind {
                        LayerKind::ConvDepthwise => {
                            if let Some(f) = layer.filters {
                                if f != c {
                                    return Err(NetError::Shape {
                                        layer: layer.name.clone(),
                                        detail: format!("depthwise filters {f} != input channels {c}"),
                                    });
                                }
                            }
                            c
                        }
                        _ => layer.filters.unwrap_or(c),
                    };
                    (oh, ow, oc)
                }
            };
            shapes.push(shape);
        }
        Ok(shapes)
    }

    /// Input shape of every layer's first input (the graph input for
    /// `input_normalize`).
    pub(crate) fn input_shapes(&self, shapes: &[(usize, usize, usize)]) -> Vec<(usize, usize, usize)> {
        self.layers
            .iter()
            .map(|l| match l.inputs.first() {
                Some(name) => shapes[self.position(name).expect("validated")],
                None => self.input_shape,
            })
            .collect()
    }

    pub fn feature_len(&self, layer_name: &str) -> Result<usize> {
        let i = self.position(layer_name).ok_or_else(|| self.unknown(layer_name))?;
        let (h, w, c) = self.infer_shapes()?[i];
        Ok(h * w * c)
    }
}

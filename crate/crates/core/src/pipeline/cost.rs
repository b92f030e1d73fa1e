use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Result;
use crate::net::{LayerKind, LayerSpec, NetworkGraph};
use crate::tensor::{cost_depthwise, cost_pointwise, cost_separable, cost_standard, LayerDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerCostKind {
    Standard,
    /// Depthwise layer fused with the pointwise projection that follows it.
    Separable,
    Pointwise,
    /// Depthwise layer without a following pointwise projection.
    Depthwise,
}

/// MACs of one convolution (or separable pair). `standard_macs` is the cost
/// of a standard convolution with the same geometry; `separable_macs` is
/// present only for separable pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub layers: Vec<String>,
    pub kind: LayerCostKind,
    pub dims: LayerDims,
    pub standard_macs: u64,
    pub separable_macs: Option<u64>,
    pub actual_macs: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCostReport {
    pub upto: String,
    pub rows: Vec<LayerCost>,
    pub total_standard_macs: u64,
    pub total_actual_macs: u64,
    pub total_ratio: f64,
}

impl NetworkCostReport {
    /// Tab-separated table with a trailing totals row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("layers\tkind\tk\tc_in\tc_out\th_out\tw_out\tstandard_macs\tseparable_macs\tactual_macs\tratio\n");
        for r in &self.rows {
            let sep = r.separable_macs.map_or(String::from("-"), |m| m.to_string());
            let d = &r.dims;
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{sep}\t{}\t{}",
                r.layers.join("+"),
                serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
                d.kernel,
                d.in_channels,
                d.out_channels,
                d.out_height,
                d.out_width,
                r.standard_macs,
                r.actual_macs,
                r.ratio
            )
            .unwrap();
        }
        writeln!(s, "total\t-\t-\t-\t-\t-\t-\t{}\t-\t{}\t{}", self.total_standard_macs, self.total_actual_macs, self.total_ratio).unwrap();
        s
    }
}

/// Pointwise layer fed by `dw`, directly or through one ReLU6.
fn projection_of(layers: &[LayerSpec], dw: usize) -> Option<&LayerSpec> {
    let name = layers[dw].name.as_str();
    let mut feeds = vec![name];
    for l in &layers[dw + 1..] {
        if l.kind == LayerKind::Relu6 && l.inputs.first().map(String::as_str) == Some(name) {
            feeds.push(l.name.as_str());
        }
        if l.kind == LayerKind::ConvPointwise && l.inputs.first().is_some_and(|i| feeds.contains(&i.as_str())) {
            return Some(l);
        }
    }
    None
}

/// Analytic MAC counts for every convolution up to and including `upto`
/// (the whole graph when `None`).
pub fn cost_report(graph: &NetworkGraph, upto: Option<&str>) -> Result<NetworkCostReport> {
    let shapes = graph.infer_shapes()?;
    let end = match upto {
        Some(name) => graph.layer(name).map(|_| graph.position(name).expect("layer exists"))?,
        None => graph.layers.len() - 1,
    };
    let layers = &graph.layers[..=end];
    let in_shape = |l: &LayerSpec| match l.inputs.first() {
        Some(src) => shapes[graph.position(src).expect("validated graph")],
        None => graph.input_shape,
    };
    let mut fused: Vec<&str> = Vec::new();
    let mut rows = Vec::new();
    for (i, l) in layers.iter().enumerate() {
        if !l.kind.is_conv() || fused.contains(&l.name.as_str()) {
            continue;
        }
        let (_, _, c_in) = in_shape(l);
        let (h, w, c_out) = shapes[i];
        let k = l.kernel.unwrap_or(1) as u64;
        let row = match l.kind {
            LayerKind::ConvDepthwise => match projection_of(layers, i) {
                Some(p) => {
                    fused.push(p.name.as_str());
                    let c_o = shapes[graph.position(&p.name).expect("validated graph")].2;
                    let dims = LayerDims::new(k, c_in as u64, c_o as u64, h as u64, w as u64);
                    let c = cost_separable(&dims)?;
                    LayerCost {
                        layers: vec![l.name.clone(), p.name.clone()],
                        kind: LayerCostKind::Separable,
                        dims,
                        standard_macs: c.standard_macs,
                        separable_macs: Some(c.separable_macs),
                        actual_macs: c.separable_macs,
                        ratio: c.ratio,
                    }
                }
                None => {
                    let dims = LayerDims::new(k, c_in as u64, c_out as u64, h as u64, w as u64);
                    let m = cost_depthwise(&dims)?;
                    standalone(l, LayerCostKind::Depthwise, dims, m)
                }
            },
            LayerKind::ConvPointwise => {
                let dims = LayerDims::new(1, c_in as u64, c_out as u64, h as u64, w as u64);
                standalone(l, LayerCostKind::Pointwise, dims, cost_pointwise(&dims)?)
            }
            _ => {
                let dims = LayerDims::new(k, c_in as u64, c_out as u64, h as u64, w as u64);
                standalone(l, LayerCostKind::Standard, dims, cost_standard(&dims)?)
            }
        };
        rows.push(row);
    }
    let total_standard_macs = rows.iter().map(|r| r.standard_macs).sum::<u64>();
    let total_actual_macs = rows.iter().map(|r| r.actual_macs).sum::<u64>();
    let total_ratio = if total_standard_macs == 0 { 1.0 } else { total_actual_macs as f64 / total_standard_macs as f64 };
    Ok(NetworkCostReport { upto: layers[end].name.clone(), rows, total_standard_macs, total_actual_macs, total_ratio })
}

fn standalone(l: &LayerSpec, kind: LayerCostKind, dims: LayerDims, macs: u64) -> LayerCost {
    LayerCost { layers: vec![l.name.clone()], kind, dims, standard_macs: macs, separable_macs: None, actual_macs: macs, ratio: 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(name: &str, kind: LayerKind, input: &str, k: usize, filters: Option<usize>) -> LayerSpec {
        let mut l = LayerSpec::new(name, kind, &[input]);
        l.weight_key = Some(name.into());
        l.kernel = Some(k);
        l.filters = filters;
        l.padding = Some(k / 2);
        l
    }

    #[test]
    fn single_standard_layer() {
        let g = NetworkGraph::new(
            "one",
            (8, 8, 3),
            vec![LayerSpec::new("in", LayerKind::InputNormalize, &[]), conv("c", LayerKind::ConvStandard, "in", 3, Some(4))],
        )
        .unwrap();
        let r = cost_report(&g, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].separable_macs, None);
        assert_eq!(r.rows[0].ratio, 1.0);
        assert_eq!(r.rows[0].standard_macs, 9 * 3 * 4 * 64);
    }

    #[test]
    fn separable_block_ratio() {
        let g = NetworkGraph::new(
            "sep",
            (14, 14, 96),
            vec![
                LayerSpec::new("in", LayerKind::InputNormalize, &[]),
                conv("dw", LayerKind::ConvDepthwise, "in", 3, None),
                LayerSpec::new("dw_relu", LayerKind::Relu6, &["dw"]),
                conv("pw", LayerKind::ConvPointwise, "dw_relu", 1, Some(96)),
            ],
        )
        .unwrap();
        let r = cost_report(&g, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        let row = &r.rows[0];
        assert_eq!(row.kind, LayerCostKind::Separable);
        assert!((row.ratio - (1.0 / 96.0 + 1.0 / 9.0)).abs() < 1e-12);
        assert_eq!(row.separable_macs, Some(9 * 96 * 196 + 96 * 96 * 196));
        assert_eq!(r.total_actual_macs, row.actual_macs);
    }

    #[test]
    fn mobilenet_totals_add_up() {
        let g = NetworkGraph::mobilenet_v2();
        let r = cost_report(&g, Some("block_11_add")).unwrap();
        assert_eq!(r.total_standard_macs, r.rows.iter().map(|x| x.standard_macs).sum::<u64>());
        assert_eq!(r.total_actual_macs, r.rows.iter().map(|x| x.actual_macs).sum::<u64>());
        assert!(r.rows.iter().filter(|x| x.kind == LayerCostKind::Separable).count() >= 12);
        for row in r.rows.iter().filter(|x| x.kind == LayerCostKind::Separable) {
            let expected = 1.0 / row.dims.out_channels as f64 + 1.0 / (row.dims.kernel * row.dims.kernel) as f64;
            assert!((row.ratio - expected).abs() < 1e-12);
        }
        assert!(cost_report(&g, Some("nope")).is_err());
    }
}

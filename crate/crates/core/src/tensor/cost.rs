//! Multiply-accumulate counts for standard and depthwise-separable layers.
//!
//! Bias additions and activations are not counted; only kernel taps.

use serde::{Deserialize, Serialize};

use super::{Result, TensorError};

/// Geometry of one convolution layer as seen by the cost model: square
/// kernel side `k`, channel counts and output spatial size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDims {
    pub kernel: u64,
    pub in_channels: u64,
    pub out_channels: u64,
    pub out_height: u64,
    pub out_width: u64,
}

impl LayerDims {
    pub fn new(kernel: u64, in_channels: u64, out_channels: u64, out_height: u64, out_width: u64) -> Self {
        Self { kernel, in_channels, out_channels, out_height, out_width }
    }

    fn validate(&self) -> Result<()> {
        if self.kernel == 0 || self.in_channels == 0 || self.out_channels == 0 || self.out_height == 0 || self.out_width == 0 {
            return Err(TensorError::InvalidArgument(format!("cost model arguments must be positive: {self:?}")));
        }
        Ok(())
    }

    fn spatial(&self) -> Result<u64> {
        checked_product(&[self.out_height, self.out_width])
    }
}

/// MAC counts of a depthwise-separable layer next to its standard equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub standard_macs: u64,
    pub depthwise_macs: u64,
    pub pointwise_macs: u64,
    pub separable_macs: u64,
    pub ratio: f64,
}

fn checked_product(factors: &[u64]) -> Result<u64> {
    factors
        .iter()
        .try_fold(1u64, |acc, &f| acc.checked_mul(f))
        .ok_or_else(|| TensorError::InvalidArgument(format!("MAC count overflows u64: {factors:?}")))
}

/// `k^2 * c_i * c_o * h_o * w_o`
pub fn cost_standard(d: &LayerDims) -> Result<u64> {
    d.validate()?;
    checked_product(&[d.kernel, d.kernel, d.in_channels, d.out_channels, d.spatial()?])
}

/// `k^2 * c_i * h_o * w_o`
pub fn cost_depthwise(d: &LayerDims) -> Result<u64> {
    d.validate()?;
    checked_product(&[d.kernel, d.kernel, d.in_channels, d.spatial()?])
}

/// `c_i * c_o * h_o * w_o`
pub fn cost_pointwise(d: &LayerDims) -> Result<u64> {
    d.validate()?;
    checked_product(&[d.in_channels, d.out_channels, d.spatial()?])
}

pub fn cost_separable(d: &LayerDims) -> Result<CostReport> {
    let standard_macs = cost_standard(d)?;
    let depthwise_macs = cost_depthwise(d)?;
    let pointwise_macs = cost_pointwise(d)?;
    let separable_macs = depthwise_macs
        .checked_add(pointwise_macs)
        .ok_or_else(|| TensorError::InvalidArgument("separable MAC count overflows u64".into()))?;
    Ok(CostReport { standard_macs, depthwise_macs, pointwise_macs, separable_macs, ratio: separable_macs as f64 / standard_macs as f64 })
}

/// Closed-form separable/standard cost ratio `1/c_o + 1/k^2`.
pub fn cost_ratio(kernel: u64, out_channels: u64) -> Result<f64> {
    if kernel == 0 || out_channels == 0 {
        return Err(TensorError::InvalidArgument(format!("cost_ratio needs positive k and c_o, got k={kernel}, c_o={out_channels}")));
    }
    Ok(1.0 / out_channels as f64 + 1.0 / (kernel * kernel) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Walks the loop nest of a stride-1 convolution and counts every
    /// multiply-accumulate: standard, then depthwise + pointwise.
    fn counted_macs(d: &LayerDims) -> (u64, u64, u64) {
        let (mut std, mut dw, mut pw) = (0, 0, 0);
        for _y in 0..d.out_height {
            for _x in 0..d.out_width {
                for _o in 0..d.out_channels {
                    for _ky in 0..d.kernel {
                        for _kx in 0..d.kernel {
                            for _i in 0..d.in_channels {
                                std += 1;
                            }
                        }
                    }
                }
                for _i in 0..d.in_channels {
                    for _ky in 0..d.kernel {
                        for _kx in 0..d.kernel {
                            dw += 1;
                        }
                    }
                    for _o in 0..d.out_channels {
                        pw += 1;
                    }
                }
            }
        }
        (std, dw, pw)
    }

    #[test]
    fn small_layer_counts() {
        let d = LayerDims::new(3, 2, 4, 2, 2);
        assert_eq!(counted_macs(&d), (288, 72, 32));
        assert_eq!(cost_standard(&d).unwrap(), 288);
        assert_eq!(cost_depthwise(&d).unwrap(), 72);
        assert_eq!(cost_pointwise(&d).unwrap(), 32);
        let r = cost_separable(&d).unwrap();
        assert_eq!(r.separable_macs, 104);
        assert_eq!(r.ratio, 104.0 / 288.0);
        assert!((r.ratio - 13.0 / 36.0).abs() < 1e-15);
        assert!((cost_ratio(3, 4).unwrap() - 13.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_substitutions() {
        assert_eq!(cost_ratio(1, 1).unwrap(), 2.0);
        let r = cost_ratio(3, 96).unwrap();
        assert!((r - 0.121528).abs() < 1e-6);
        let counted = counted_macs(&LayerDims::new(3, 96, 96, 14, 14));
        let measured = (counted.1 + counted.2) as f64 / counted.0 as f64;
        assert!((r - measured).abs() < 1e-12);
    }

    #[test]
    fn zero_arguments_rejected() {
        assert!(cost_ratio(0, 3).is_err());
        assert!(cost_ratio(3, 0).is_err());
        assert!(cost_standard(&LayerDims::new(3, 0, 1, 1, 1)).is_err());
        assert!(cost_separable(&LayerDims::new(3, 1, 1, 0, 1)).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        assert!(cost_standard(&LayerDims::new(u64::MAX / 2, 3, 3, 3, 3)).is_err());
    }
}

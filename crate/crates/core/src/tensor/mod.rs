//! Dense rank-3 feature maps, convolution kernels and the MAC cost model.
//!
//! Tensors are stored row-major in `(height, width, channels)` order, so the
//! channel index is the fastest-moving one. All kernels in this module are
//! direct loops arranged so that the innermost loop runs over contiguous
//! channels.

mod conv;
mod cost;
mod ops;

pub use conv::{conv2d_depthwise, conv2d_pointwise, conv2d_standard, output_extent, ConvKind, ConvWeights};
pub use cost::{cost_depthwise, cost_pointwise, cost_ratio, cost_separable, cost_standard, CostReport, LayerDims};
pub use ops::{global_avg_pool, relu6, residual_add, resize_bilinear, softmax};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor dimensions must be positive, got {height}x{width}x{channels}")]
    ZeroDim { height: usize, width: usize, channels: usize },
    #[error("expected {expected} values for shape, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("channel mismatch: input has {input} channels, weights expect {expected}")]
    ChannelMismatch { input: usize, expected: usize },
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("convolution output would be empty ({0})")]
    EmptyOutput(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Rank-3 feature map in `(h, w, c)` row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f32>,
}

impl Tensor {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        check_dims(height, width, channels)?;
        let expected = height * width * channels;
        if values.len() != expected {
            return Err(TensorError::LengthMismatch { expected, actual: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite(i));
        }
        Ok(Self { height, width, channels, values })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::filled(height, width, channels, 0.0)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        check_dims(height, width, channels)?;
        if !value.is_finite() {
            return Err(TensorError::NonFinite(0));
        }
        Ok(Self { height, width, channels, values: vec![value; height * width * channels] })
    }

    /// Builds a tensor from 8-bit pixels laid out `(h, w, c)`.
    pub fn from_u8(height: usize, width: usize, channels: usize, pixels: &[u8]) -> Result<Self> {
        Self::new(height, width, channels, pixels.iter().map(|&p| p as f32).collect())
    }

    // Used by kernels that are known to produce finite, correctly sized output.
    pub(crate) fn from_parts(height: usize, width: usize, channels: usize, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), height * width * channels);
        Self { height, width, channels, values }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.values[self.index(y, x, c)]
    }

    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f32) {
        let i = self.index(y, x, c);
        self.values[i] = value;
    }

    /// Channel slice of the pixel at `(y, x)`.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f32] {
        let start = (y * self.width + x) * self.channels;
        &self.values[start..start + self.channels]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Tensor {
        Tensor::from_parts(self.height, self.width, self.channels, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Replicates a single-channel image to three channels; other tensors are
    /// returned unchanged.
    pub fn to_rgb(&self) -> Tensor {
        if self.channels != 1 {
            return self.clone();
        }
        let values = self.values.iter().flat_map(|&v| [v, v, v]).collect();
        Tensor::from_parts(self.height, self.width, 3, values)
    }

    /// Luma conversion (ITU-R BT.601 weights) for three-channel images;
    /// single-channel tensors are returned unchanged.
    pub fn to_gray(&self) -> Result<Tensor> {
        match self.channels {
            1 => Ok(self.clone()),
            3 => {
                let values = self.values.chunks_exact(3).map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect();
                Ok(Tensor::from_parts(self.height, self.width, 1, values))
            }
            c => Err(TensorError::InvalidArgument(format!("cannot convert {c}-channel tensor to gray"))),
        }
    }

    /// Copies the rectangle `[y, y+h) x [x, x+w)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Tensor> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(TensorError::InvalidArgument(format!("crop ({x},{y},{w},{h}) outside {}x{} image", self.width, self.height)));
        }
        let mut values = Vec::with_capacity(w * h * self.channels);
        for row in y..y + h {
            let start = self.index(row, x, 0);
            values.extend_from_slice(&self.values[start..start + w * self.channels]);
        }
        Ok(Tensor::from_parts(h, w, self.channels, values))
    }
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 || channels == 0 {
        return Err(TensorError::ZeroDim { height, width, channels });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_validates_length_and_finiteness() {
        assert!(Tensor::new(2, 2, 1, vec![0.0; 4]).is_ok());
        assert_eq!(Tensor::new(2, 2, 1, vec![0.0; 3]), Err(TensorError::LengthMismatch { expected: 4, actual: 3 }));
        assert_eq!(Tensor::new(1, 1, 2, vec![0.0, f32::NAN]), Err(TensorError::NonFinite(1)));
        assert!(matches!(Tensor::zeros(0, 1, 1), Err(TensorError::ZeroDim { .. })));
    }

    #[test]
    fn row_major_hwc_indexing() {
        let t = Tensor::new(2, 3, 2, (0..12).map(|v| v as f32).collect()).unwrap();
        assert_eq!(t.get(0, 0, 1), 1.0);
        assert_eq!(t.get(0, 1, 0), 2.0);
        assert_eq!(t.get(1, 0, 0), 6.0);
        assert_eq!(t.pixel(1, 2), &[10.0, 11.0]);
    }

    #[test]
    fn crop_and_rgb() {
        let t = Tensor::new(3, 3, 1, (0..9).map(|v| v as f32).collect()).unwrap();
        let c = t.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.values(), &[4.0, 5.0, 7.0, 8.0]);
        assert!(t.crop(2, 2, 2, 1).is_err());
        let rgb = c.to_rgb();
        assert_eq!(rgb.shape(), (2, 2, 3));
        assert_eq!(rgb.pixel(0, 1), &[5.0, 5.0, 5.0]);
        assert!((rgb.to_gray().unwrap().get(0, 1, 0) - 5.0).abs() < 1e-5);
    }
}

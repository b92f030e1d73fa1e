use super::{Result, Tensor, TensorError};

/// Filter layout of a [`ConvWeights`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    /// Full kernel, weights indexed `(d, j, c_in, c_out)`.
    Standard,
    /// One filter per channel (multiplier 1), weights indexed `(d, j, c)`.
    Depthwise,
}

/// Convolution kernel, bias and geometry.
///
/// Padding is symmetric zero padding; with `stride = 1` and `padding = 0` the
/// output is the plain triple sum over kernel rows, columns and input channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    kind: ConvKind,
    kernel_h: usize,
    kernel_w: usize,
    in_channels: usize,
    out_channels: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
    stride: usize,
    padding: usize,
}

impl ConvWeights {
    pub fn standard(
        kernel_h: usize,
        kernel_w: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        Self::build(ConvKind::Standard, kernel_h, kernel_w, in_channels, out_channels, weights, bias)
    }

    pub fn depthwise(kernel_h: usize, kernel_w: usize, channels: usize, weights: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        Self::build(ConvKind::Depthwise, kernel_h, kernel_w, channels, channels, weights, bias)
    }

    /// 1x1 standard kernel from a `c_in x c_out` row-major matrix.
    pub fn pointwise(in_channels: usize, out_channels: usize, weights: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        Self::standard(1, 1, in_channels, out_channels, weights, bias)
    }

    fn build(
        kind: ConvKind,
        kernel_h: usize,
        kernel_w: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
    ) -> Result<Self> {
        if kernel_h == 0 || kernel_w == 0 || in_channels == 0 || out_channels == 0 {
            return Err(TensorError::InvalidWeights(format!(
                "kernel {kernel_h}x{kernel_w}, channels {in_channels}->{out_channels} must all be positive"
            )));
        }
        let expected = match kind {
            ConvKind::Standard => kernel_h * kernel_w * in_channels * out_channels,
            ConvKind::Depthwise => kernel_h * kernel_w * in_channels,
        };
        if weights.len() != expected {
            return Err(TensorError::InvalidWeights(format!("expected {expected} kernel values, got {}", weights.len())));
        }
        if bias.len() != out_channels {
            return Err(TensorError::InvalidWeights(format!("expected {out_channels} bias values, got {}", bias.len())));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(TensorError::InvalidWeights("non-finite weight".into()));
        }
        Ok(Self { kind, kernel_h, kernel_w, in_channels, out_channels, weights, bias, stride: 1, padding: 0 })
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(TensorError::InvalidWeights("stride must be positive".into()));
        }
        self.stride = stride;
        Ok(self)
    }

    pub fn with_padding(mut self, padding: usize) -> Self {
        self.padding = padding;
        self
    }

    pub fn kind(&self) -> ConvKind {
        self.kind
    }
    pub fn kernel_h(&self) -> usize {
        self.kernel_h
    }
    pub fn kernel_w(&self) -> usize {
        self.kernel_w
    }
    pub fn in_channels(&self) -> usize {
        self.in_channels
    }
    pub fn out_channels(&self) -> usize {
        self.out_channels
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn padding(&self) -> usize {
        self.padding
    }
    pub fn weights(&self) -> &[f32] {
        &self.weights
    }
    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    /// Output `(h, w)` for an input of the given spatial size.
    pub fn output_hw(&self, in_h: usize, in_w: usize) -> Result<(usize, usize)> {
        let h = output_extent(in_h, self.kernel_h, self.stride, self.padding);
        let w = output_extent(in_w, self.kernel_w, self.stride, self.padding);
        match (h, w) {
            (Some(h), Some(w)) => Ok((h, w)),
            _ => Err(TensorError::EmptyOutput(format!(
                "input {in_h}x{in_w}, kernel {}x{}, stride {}, padding {}",
                self.kernel_h, self.kernel_w, self.stride, self.padding
            ))),
        }
    }
}

/// `floor((input + 2*padding - kernel) / stride) + 1`, or `None` when the
/// padded input is smaller than the kernel.
pub fn output_extent(input: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = input + 2 * padding;
    if stride == 0 || kernel == 0 || padded < kernel {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

#[inline]
fn source_coord(out: usize, tap: usize, stride: usize, padding: usize, extent: usize) -> Option<usize> {
    let pos = (out * stride + tap).checked_sub(padding)?;
    (pos < extent).then_some(pos)
}

pub fn conv2d_standard(input: &Tensor, w: &ConvWeights) -> Result<Tensor> {
    if w.kind != ConvKind::Standard {
        return Err(TensorError::InvalidWeights("depthwise weights passed to standard convolution".into()));
    }
    if input.channels() != w.in_channels {
        return Err(TensorError::ChannelMismatch { input: input.channels(), expected: w.in_channels });
    }
    let (ho, wo) = w.output_hw(input.height(), input.width())?;
    let (ci, co) = (w.in_channels, w.out_channels);
    let mut out = Vec::with_capacity(ho * wo * co);
    for oy in 0..ho {
        for ox in 0..wo {
            let base = out.len();
            out.extend_from_slice(&w.bias);
            let acc = &mut out[base..base + co];
            for d in 0..w.kernel_h {
                let Some(iy) = source_coord(oy, d, w.stride, w.padding, input.height()) else { continue };
                for j in 0..w.kernel_w {
                    let Some(ix) = source_coord(ox, j, w.stride, w.padding, input.width()) else { continue };
                    let px = input.pixel(iy, ix);
                    let taps = &w.weights[(d * w.kernel_w + j) * ci * co..][..ci * co];
                    for (&v, row) in px.iter().zip(taps.chunks_exact(co)) {
                        for (a, &k) in acc.iter_mut().zip(row) {
                            *a += v * k;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_parts(ho, wo, co, out))
}

pub fn conv2d_depthwise(input: &Tensor, w: &ConvWeights) -> Result<Tensor> {
    if w.kind != ConvKind::Depthwise {
        return Err(TensorError::InvalidWeights("standard weights passed to depthwise convolution".into()));
    }
    if input.channels() != w.in_channels {
        return Err(TensorError::ChannelMismatch { input: input.channels(), expected: w.in_channels });
    }
    let (ho, wo) = w.output_hw(input.height(), input.width())?;
    let c = w.in_channels;
    let mut out = Vec::with_capacity(ho * wo * c);
    for oy in 0..ho {
        for ox in 0..wo {
            let base = out.len();
            out.extend_from_slice(&w.bias);
            let acc = &mut out[base..base + c];
            for d in 0..w.kernel_h {
                let Some(iy) = source_coord(oy, d, w.stride, w.padding, input.height()) else { continue };
                for j in 0..w.kernel_w {
                    let Some(ix) = source_coord(ox, j, w.stride, w.padding, input.width()) else { continue };
                    let px = input.pixel(iy, ix);
                    let taps = &w.weights[(d * w.kernel_w + j) * c..][..c];
                    for ((a, &v), &k) in acc.iter_mut().zip(px).zip(taps) {
                        *a += v * k;
                    }
                }
            }
        }
    }
    Ok(Tensor::from_parts(ho, wo, c, out))
}

/// Per-pixel channel mixing. Accumulates in the same order as
/// [`conv2d_standard`] with a 1x1 kernel, so the two agree bit for bit.
pub fn conv2d_pointwise(input: &Tensor, w: &ConvWeights) -> Result<Tensor> {
    if w.kind != ConvKind::Standard || w.kernel_h != 1 || w.kernel_w != 1 {
        return Err(TensorError::InvalidWeights(format!(
            "pointwise convolution needs a 1x1 standard kernel, got {}x{} {:?}",
            w.kernel_h, w.kernel_w, w.kind
        )));
    }
    if input.channels() != w.in_channels {
        return Err(TensorError::ChannelMismatch { input: input.channels(), expected: w.in_channels });
    }
    let (ho, wo) = w.output_hw(input.height(), input.width())?;
    let co = w.out_channels;
    let mut out = Vec::with_capacity(ho * wo * co);
    for oy in 0..ho {
        let iy = source_coord(oy, 0, w.stride, w.padding, input.height());
        for ox in 0..wo {
            let base = out.len();
            out.extend_from_slice(&w.bias);
            let (Some(iy), Some(ix)) = (iy, source_coord(ox, 0, w.stride, w.padding, input.width())) else { continue };
            let acc = &mut out[base..base + co];
            for (&v, row) in input.pixel(iy, ix).iter().zip(w.weights.chunks_exact(co)) {
                for (a, &k) in acc.iter_mut().zip(row) {
                    *a += v * k;
                }
            }
        }
    }
    Ok(Tensor::from_parts(ho, wo, co, out))
}

use super::{Result, Tensor, TensorError};

pub fn relu6(input: &Tensor) -> Tensor {
    input.map(|v| v.clamp(0.0, 6.0))
}

pub fn residual_add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(TensorError::ShapeMismatch(a.shape(), b.shape()));
    }
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
    let (h, w, c) = a.shape();
    Ok(Tensor::from_parts(h, w, c, values))
}

/// Per-channel spatial mean, returned as a `1 x 1 x c` tensor.
pub fn global_avg_pool(input: &Tensor) -> Tensor {
    let c = input.channels();
    let mut sums = vec![0.0f64; c];
    for px in input.values().chunks_exact(c) {
        for (s, &v) in sums.iter_mut().zip(px) {
            *s += v as f64;
        }
    }
    let n = (input.height() * input.width()) as f64;
    Tensor::from_parts(1, 1, c, sums.into_iter().map(|s| (s / n) as f32).collect())
}

/// Bilinear resampling with half-pixel centres and border clamping.
pub fn resize_bilinear(input: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    if out_h == 0 || out_w == 0 {
        return Err(TensorError::InvalidArgument(format!("resize target {out_h}x{out_w} must be positive")));
    }
    let (in_h, in_w, c) = input.shape();
    let rows: Vec<_> = (0..out_h).map(|y| sample_axis(y, in_h, out_h)).collect();
    let cols: Vec<_> = (0..out_w).map(|x| sample_axis(x, in_w, out_w)).collect();
    let mut out = Vec::with_capacity(out_h * out_w * c);
    for &(y0, y1, fy) in &rows {
        for &(x0, x1, fx) in &cols {
            let (p00, p01) = (input.pixel(y0, x0), input.pixel(y0, x1));
            let (p10, p11) = (input.pixel(y1, x0), input.pixel(y1, x1));
            for ch in 0..c {
                let top = p00[ch] as f64 * (1.0 - fx) + p01[ch] as f64 * fx;
                let bottom = p10[ch] as f64 * (1.0 - fx) + p11[ch] as f64 * fx;
                out.push((top * (1.0 - fy) + bottom * fy) as f32);
            }
        }
    }
    Ok(Tensor::from_parts(out_h, out_w, c, out))
}

// (lower index, upper index, upper weight)
fn sample_axis(out: usize, in_len: usize, out_len: usize) -> (usize, usize, f64) {
    let scale = in_len as f64 / out_len as f64;
    let src = ((out as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
    let lo = src.floor() as usize;
    let hi = (lo + 1).min(in_len - 1);
    (lo, hi, src - lo as f64)
}

/// Numerically stable softmax over a score vector.
pub fn softmax(scores: &[f32]) -> Vec<f32> {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = scores.iter().map(|&s| ((s - max) as f64).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| (e / total) as f32).collect()
}

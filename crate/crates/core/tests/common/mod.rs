//! Reference implementations shared by the integration tests. Each one is
//! written from the definitions, without calling the code it checks.
#![allow(dead_code)]

use emoscreen::analytics::{Emotion, EvolutionMatrix};

/// Zero-padded read of an `h x w x c` row-major buffer.
fn at(x: &[f32], h: usize, w: usize, c: usize, y: isize, xx: isize, ch: usize) -> f64 {
    if y < 0 || xx < 0 || y as usize >= h || xx as usize >= w {
        0.0
    } else {
        x[(y as usize * w + xx as usize) * c + ch] as f64
    }
}

pub struct Geometry {
    pub h: usize,
    pub w: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl Geometry {
    pub fn out(&self) -> (usize, usize) {
        ((self.h + 2 * self.pad - self.k) / self.stride + 1, (self.w + 2 * self.pad - self.k) / self.stride + 1)
    }
}

/// Standard convolution; kernel indexed `[ky][kx][ci][co]`.
pub fn conv_standard(x: &[f32], g: &Geometry, ci: usize, co: usize, kernel: &[f32], bias: &[f32]) -> Vec<f64> {
    let (ho, wo) = g.out();
    let mut out = vec![0.0; ho * wo * co];
    for oy in 0..ho {
        for ox in 0..wo {
            for o in 0..co {
                let mut s = bias[o] as f64;
                for ky in 0..g.k {
                    for kx in 0..g.k {
                        for i in 0..ci {
                            let y = (oy * g.stride + ky) as isize - g.pad as isize;
                            let xx = (ox * g.stride + kx) as isize - g.pad as isize;
                            s += at(x, g.h, g.w, ci, y, xx, i) * kernel[((ky * g.k + kx) * ci + i) * co + o] as f64;
                        }
                    }
                }
                out[(oy * wo + ox) * co + o] = s;
            }
        }
    }
    out
}

/// Depthwise convolution; kernel indexed `[ky][kx][c]`.
pub fn conv_depthwise(x: &[f32], g: &Geometry, c: usize, kernel: &[f32], bias: &[f32]) -> Vec<f64> {
    let (ho, wo) = g.out();
    let mut out = vec![0.0; ho * wo * c];
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let mut s = bias[ch] as f64;
                for ky in 0..g.k {
                    for kx in 0..g.k {
                        let y = (oy * g.stride + ky) as isize - g.pad as isize;
                        let xx = (ox * g.stride + kx) as isize - g.pad as isize;
                        s += at(x, g.h, g.w, c, y, xx, ch) * kernel[(ky * g.k + kx) * c + ch] as f64;
                    }
                }
                out[(oy * wo + ox) * c + ch] = s;
            }
        }
    }
    out
}

/// Pointwise convolution as a per-pixel matrix product with a `ci x co` matrix.
pub fn conv_pointwise(x: &[f32], pixels: usize, ci: usize, co: usize, m: &[f32], bias: &[f32]) -> Vec<f64> {
    let mut out = Vec::with_capacity(pixels * co);
    for p in 0..pixels {
        for o in 0..co {
            let dot: f64 = (0..ci).map(|i| x[p * ci + i] as f64 * m[i * co + o] as f64).sum();
            out.push(bias[o] as f64 + dot);
        }
    }
    out
}

/// Largest `|a - b| / max(|b|, 1)`.
pub fn max_rel_err(a: &[f32], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| (x as f64 - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

/// MobileNetV2 inverted-residual settings `(expansion, channels, repeats, first stride)`.
pub const MOBILENET_V2_SETTINGS: [(usize, usize, usize, usize); 7] =
    [(1, 16, 1, 1), (6, 24, 2, 2), (6, 32, 3, 2), (6, 64, 4, 2), (6, 96, 3, 1), (6, 160, 3, 2), (6, 320, 1, 1)];

/// `(name, h, w, c)` of every residual add for a `side x side` input.
pub fn mobilenet_v2_adds(side: usize) -> Vec<(String, usize, usize, usize)> {
    let mut s = side.div_ceil(2);
    let mut block = 0;
    let mut adds = Vec::new();
    for (_, c, n, stride) in MOBILENET_V2_SETTINGS {
        for r in 0..n {
            if r == 0 && stride == 2 {
                s = s.div_ceil(2);
            }
            if r > 0 {
                adds.push((format!("block_{block}_add"), s, s, c));
            }
            block += 1;
        }
    }
    adds
}

/// Occurrence counts of `e` per frame, from matrix argmax with first-max ties.
pub fn counts(ms: &[&EvolutionMatrix], e: Emotion, n: usize) -> Vec<u64> {
    (0..n)
        .map(|j| {
            ms.iter()
                .filter(|m| {
                    let col = m.column(j).values();
                    let mut best = 0;
                    for i in 1..6 {
                        if col[i] > col[best] {
                            best = i;
                        }
                    }
                    best == e.index()
                })
                .count() as u64
        })
        .collect()
}

/// Brute-force window choice over exact group differences summed across
/// `emotions`: returns `(start, numerator sum)` of the earliest best window.
pub fn exhaustive_window(healthy: &[&EvolutionMatrix], impaired: &[&EvolutionMatrix], emotions: &[Emotion], width: usize) -> (usize, u64) {
    let n = healthy.iter().chain(impaired).map(|m| m.n_frames()).min().unwrap();
    let (th, ti) = (healthy.len() as u64, impaired.len() as u64);
    let mut diff = vec![0u64; n];
    for &e in emotions {
        let (a, b) = (counts(healthy, e, n), counts(impaired, e, n));
        for j in 0..n {
            diff[j] += (a[j] * ti).abs_diff(b[j] * th);
        }
    }
    let mut best = (0, diff[..width].iter().sum());
    for start in 1..=n - width {
        let s: u64 = diff[start..start + width].iter().sum();
        if s > best.1 {
            best = (start, s);
        }
    }
    best
}

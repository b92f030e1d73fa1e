use serde::{Deserialize, Serialize};

use super::{FaceError, Result};
use crate::tensor::Tensor;

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Window {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        px >= self.x as f64 && px <= (self.x + self.w) as f64 && py >= self.y as f64 && py <= (self.y + self.h) as f64
    }

    pub fn iou(&self, other: &Window) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w).saturating_sub(self.x.max(other.x));
        let iy = (self.y + self.h).min(other.y + other.h).saturating_sub(self.y.max(other.y));
        let inter = (ix * iy) as f64;
        let union = (self.area() + other.area()) as f64 - inter;
        if union == 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Summed-area tables of pixel values and squared pixel values, with a zero
/// first row and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    height: usize,
    width: usize,
    sums: Vec<f64>,
    squares: Vec<f64>,
}

impl IntegralImage {
    pub fn new(gray: &Tensor) -> Result<Self> {
        if gray.channels() != 1 {
            return Err(FaceError::NotGray(gray.channels()));
        }
        let (h, w) = (gray.height(), gray.width());
        let stride = w + 1;
        let mut sums = vec![0.0; (h + 1) * stride];
        let mut squares = vec![0.0; (h + 1) * stride];
        for y in 0..h {
            let (mut row, mut row_sq) = (0.0, 0.0);
            for x in 0..w {
                let v = gray.get(y, x, 0) as f64;
                row += v;
                row_sq += v * v;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
                squares[(y + 1) * stride + x + 1] = squares[y * stride + x + 1] + row_sq;
            }
        }
        Ok(Self { height: h, width: w, sums, squares })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Cumulative sum of all pixels strictly above and left of `(y, x)`.
    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.sums[y * (self.width + 1) + x]
    }

    pub fn contains(&self, r: &Window) -> bool {
        r.x + r.w <= self.width && r.y + r.h <= self.height
    }

    fn corners(table: &[f64], stride: usize, r: &Window) -> f64 {
        let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.w, r.y + r.h);
        table[y1 * stride + x1] - table[y0 * stride + x1] - table[y1 * stride + x0] + table[y0 * stride + x0]
    }

    /// Pixel sum over `r` from four table lookups.
    pub fn rect_sum(&self, r: &Window) -> Result<f64> {
        if !self.contains(r) {
            return Err(FaceError::WindowOutOfBounds(*r, self.width, self.height));
        }
        Ok(Self::corners(&self.sums, self.width + 1, r))
    }

    /// Mean and standard deviation of the pixels in `r` (which must be in bounds).
    pub(crate) fn mean_std(&self, r: &Window) -> (f64, f64) {
        let n = r.area() as f64;
        let mean = Self::corners(&self.sums, self.width + 1, r) / n;
        let var = Self::corners(&self.squares, self.width + 1, r) / n - mean * mean;
        (mean, var.max(0.0).sqrt())
    }

    pub(crate) fn sum_unchecked(&self, r: &Window) -> f64 {
        Self::corners(&self.sums, self.width + 1, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_corner() {
        let ii = IntegralImage::new(&Tensor::filled(3, 3, 1, 1.0).unwrap()).unwrap();
        assert_eq!(ii.at(3, 3), 9.0);
        assert_eq!(ii.at(0, 2), 0.0);
        assert_eq!(ii.at(2, 0), 0.0);
        assert_eq!(ii.rect_sum(&Window::new(1, 1, 2, 2)).unwrap(), 4.0);
    }

    #[test]
    fn single_pixel_grid() {
        let ii = IntegralImage::new(&Tensor::new(1, 1, 1, vec![7.0]).unwrap()).unwrap();
        assert_eq!([ii.at(0, 0), ii.at(0, 1), ii.at(1, 0), ii.at(1, 1)], [0.0, 0.0, 0.0, 7.0]);
    }

    #[test]
    fn rejects_colour_and_out_of_bounds() {
        assert_eq!(IntegralImage::new(&Tensor::zeros(2, 2, 3).unwrap()).unwrap_err(), FaceError::NotGray(3));
        let ii = IntegralImage::new(&Tensor::zeros(2, 2, 1).unwrap()).unwrap();
        assert!(ii.rect_sum(&Window::new(1, 0, 2, 1)).is_err());
    }

    #[test]
    fn variance_of_checkerboard() {
        let t = Tensor::new(2, 2, 1, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let ii = IntegralImage::new(&t).unwrap();
        let (m, s) = ii.mean_std(&Window::new(0, 0, 2, 2));
        assert_eq!((m, s), (1.0, 1.0));
    }

    #[test]
    fn iou_cases() {
        let a = Window::new(0, 0, 10, 10);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&Window::new(10, 0, 10, 10)), 0.0);
        assert!((a.iou(&Window::new(5, 0, 10, 10)) - 50.0 / 150.0).abs() < 1e-12);
    }
}

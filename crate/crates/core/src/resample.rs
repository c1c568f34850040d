//! Bicubic resampling.
//!
//! Point-sampled cubic convolution with `a = -0.75` (the OpenCV `INTER_CUBIC`
//! kernel), half-pixel-centered coordinate mapping and replicated borders.
//! Downsampling does not pre-filter.

use crate::error::Result;
use crate::raster::{check_dims, RasterImage, CHANNELS};
use crate::scalar::Scalar;

pub const CUBIC_A: f64 = -0.75;

/// Output size used for training-ready datasets: 1280 wide, 1080 high.
pub const DEFAULT_OUTPUT_WIDTH: usize = 1280;
pub const DEFAULT_OUTPUT_HEIGHT: usize = 1080;

/// Cubic convolution kernel.
pub fn cubic_kernel(x: f64) -> f64 {
    let a = CUBIC_A;
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Source taps and weights for every output coordinate along one axis.
struct AxisTaps {
    index: Vec<[usize; 4]>,
    weight: Vec<[f64; 4]>,
}

fn axis_taps(src_len: usize, dst_len: usize) -> AxisTaps {
    let scale = src_len as f64 / dst_len as f64;
    let last = src_len as isize - 1;
    let mut index = Vec::with_capacity(dst_len);
    let mut weight = Vec::with_capacity(dst_len);
    for d in 0..dst_len {
        let s = (d as f64 + 0.5) * scale - 0.5;
        let base = s.floor();
        let t = s - base;
        let base = base as isize;
        let mut idx = [0usize; 4];
        let mut wts = [0.0; 4];
        for k in 0..4 {
            let off = k as isize - 1;
            idx[k] = (base + off).clamp(0, last) as usize;
            wts[k] = cubic_kernel(t - off as f64);
        }
        index.push(idx);
        weight.push(wts);
    }
    AxisTaps { index, weight }
}

/// Resamples to `out_height x out_width`. Same-size calls return an exact copy.
pub fn resize_bicubic<T: Scalar>(
    image: &RasterImage<T>,
    out_height: usize,
    out_width: usize,
) -> Result<RasterImage<T>> {
    check_dims(out_height, out_width)?;
    if image.dims() == (out_height, out_width) {
        return Ok(image.clone());
    }
    let (h, w) = image.dims();
    let xs = axis_taps(w, out_width);
    let ys = axis_taps(h, out_height);

    let planes: [Vec<T>; CHANNELS] = std::array::from_fn(|c| {
        let src = image.channel(c);
        // horizontal pass: h x out_width
        let mut tmp = vec![T::zero(); h * out_width];
        for r in 0..h {
            let row = &src[r * w..(r + 1) * w];
            for (x, (idx, wts)) in xs.index.iter().zip(&xs.weight).enumerate() {
                let mut acc = T::zero();
                for k in 0..4 {
                    acc = acc + row[idx[k]] * T::lit(wts[k]);
                }
                tmp[r * out_width + x] = acc;
            }
        }
        // vertical pass
        let mut out = vec![T::zero(); out_height * out_width];
        for (y, (idx, wts)) in ys.index.iter().zip(&ys.weight).enumerate() {
            let dst = &mut out[y * out_width..(y + 1) * out_width];
            for k in 0..4 {
                let src_row = &tmp[idx[k] * out_width..(idx[k] + 1) * out_width];
                let wk = T::lit(wts[k]);
                for (d, s) in dst.iter_mut().zip(src_row) {
                    *d = *d + *s * wk;
                }
            }
        }
        out
    });
    RasterImage::from_planes_clamped(out_height, out_width, planes)
}

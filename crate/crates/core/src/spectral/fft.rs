use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{ChannelSpectrum, SpatialChannel};
use crate::error::Result;
use crate::raster::{check_dims, Grid};
use crate::scalar::Scalar;

/// Planned 2-D transform for one grid size. Reusable across channels and images.
pub struct Fft2d<T: Scalar> {
    height: usize,
    width: usize,
    rows: Arc<dyn Fft<T>>,
    cols: Arc<dyn Fft<T>>,
    rows_inv: Arc<dyn Fft<T>>,
    cols_inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Fft2d<T> {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        check_dims(height, width)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            height,
            width,
            rows: planner.plan_fft_forward(width),
            cols: planner.plan_fft_forward(height),
            rows_inv: planner.plan_fft_inverse(width),
            cols_inv: planner.plan_fft_inverse(height),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Centered forward transform of a real row-major channel.
    pub fn forward_real(&self, channel: &[T]) -> ChannelSpectrum<T> {
        ChannelSpectrum::from_raw(self.height, self.width, &self.forward_raw(channel))
    }

    /// Forward transform with DC at index 0.
    pub(crate) fn forward_raw(&self, channel: &[T]) -> Vec<Complex<T>> {
        assert_eq!(channel.len(), self.height * self.width, "channel size mismatch");
        let mut buf: Vec<Complex<T>> = channel.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.process(&mut buf, &*self.rows, &*self.cols);
        buf
    }

    /// Normalized inverse transform; keeps the real part and reports the
    /// largest imaginary magnitude that was dropped.
    pub fn inverse_real(&self, spectrum: &ChannelSpectrum<T>) -> SpatialChannel<T> {
        assert_eq!(spectrum.dims(), self.dims(), "spectrum size mismatch");
        self.inverse_raw(spectrum.to_raw())
    }

    /// Inverse of a DC-at-0 buffer, as in [`inverse_real`](Self::inverse_real).
    pub(crate) fn inverse_raw(&self, mut buf: Vec<Complex<T>>) -> SpatialChannel<T> {
        self.process(&mut buf, &*self.rows_inv, &*self.cols_inv);
        let scale = T::one() / T::from_count(self.height * self.width);
        let mut max_imaginary = T::zero();
        let values = buf
            .iter()
            .map(|z| {
                max_imaginary = max_imaginary.max((z.im * scale).abs());
                z.re * scale
            })
            .collect();
        SpatialChannel {
            values: Grid::new(self.height, self.width, values).expect("planned dims are valid"),
            max_imaginary,
        }
    }

    fn process(&self, buf: &mut [Complex<T>], rows: &dyn Fft<T>, cols: &dyn Fft<T>) {
        let (h, w) = (self.height, self.width);
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];

        if w > 1 {
            rows.process_with_scratch(buf, &mut scratch[..rows.get_inplace_scratch_len()]);
        }
        if h > 1 {
            let mut transposed = transpose(buf, h, w);
            cols.process_with_scratch(&mut transposed, &mut scratch[..cols.get_inplace_scratch_len()]);
            buf.copy_from_slice(&transpose(&transposed, w, h));
        }
    }
}

/// Transposes a row-major `rows x cols` buffer, in cache-sized tiles.
fn transpose<T: Copy + Default>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    const TILE: usize = 32;
    let mut dst = vec![T::default(); src.len()];
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
    dst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_roundtrip() {
        let v: Vec<u32> = (0..35).collect();
        let t = transpose(&v, 5, 7);
        assert_eq!(t[1], 7);
        assert_eq!(transpose(&t, 7, 5), v);
    }
}

//! Fourier domain adaptation.
//!
//! A channel's spectrum is stored with the zero frequency at the grid center:
//! raw DFT index `k` lands at `(k + n / 2) mod n`, so centered frequency `m`
//! ranges over `-(n / 2) ..= (n - 1) / 2`. The low-frequency mask, the amplitude
//! swap and the transfer itself all work on that centered layout.

mod fft;
mod mask;
mod transfer;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::raster::{check_dims, Grid};
use crate::scalar::Scalar;

pub use fft::Fft2d;
pub use mask::{build_low_freq_mask, FrequencyMask};
pub use transfer::{
    adapt_channel, fda_transfer, fda_transfer_with_diagnostics, swap_low_frequencies,
    FdaOutput, DEFAULT_BETA, BETA_GRID,
};

/// Complex spectrum of one channel, center-origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpectrum<T> {
    height: usize,
    width: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelSpectrum<T> {
    /// Wraps center-origin coefficients in row-major order.
    pub fn from_centered(height: usize, width: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        check_dims(height, width)?;
        if coeffs.len() != height * width {
            return Err(Error::Dimension(format!(
                "spectrum {height}x{width} needs {} coefficients, got {}",
                height * width,
                coeffs.len()
            )));
        }
        Ok(Self {
            height,
            width,
            coeffs,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::from_centered(height, width, vec![Complex::new(T::zero(), T::zero()); height * width])
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Coefficient at centered frequency `(m, n)`; both wrap modulo the grid size.
    pub fn at(&self, m: isize, n: isize) -> Complex<T> {
        self.coeffs[self.index_of(m, n)]
    }

    /// Storage index of centered frequency `(m, n)`.
    pub fn index_of(&self, m: isize, n: isize) -> usize {
        let row = centered_to_stored(m, self.height);
        let col = centered_to_stored(n, self.width);
        row * self.width + col
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Builds the spectrum from a raw (DC at index 0) row-major DFT buffer.
    pub(crate) fn from_raw(height: usize, width: usize, raw: &[Complex<T>]) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); height * width];
        let (sh, sw) = (height / 2, width / 2);
        for r in 0..height {
            let dst_row = (r + sh) % height;
            for c in 0..width {
                coeffs[dst_row * width + (c + sw) % width] = raw[r * width + c];
            }
        }
        Self {
            height,
            width,
            coeffs,
        }
    }

    /// Inverse of [`from_raw`](Self::from_raw): DC back at index 0.
    pub(crate) fn to_raw(&self) -> Vec<Complex<T>> {
        let (h, w) = self.dims();
        let mut raw = vec![Complex::new(T::zero(), T::zero()); h * w];
        let (sh, sw) = (h / 2, w / 2);
        for r in 0..h {
            let src_row = (r + sh) % h;
            for c in 0..w {
                raw[r * w + c] = self.coeffs[src_row * w + (c + sw) % w];
            }
        }
        raw
    }
}

/// Stored row/column of a signed centered frequency.
pub fn centered_to_stored(m: isize, n: usize) -> usize {
    (m + (n / 2) as isize).rem_euclid(n as isize) as usize
}

/// Signed centered frequency held at a stored row/column.
pub fn stored_to_centered(index: usize, n: usize) -> isize {
    index as isize - (n / 2) as isize
}

/// Modulus and argument grids of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhase<T> {
    pub amplitude: Grid<T>,
    /// Values in `(-pi, pi]`.
    pub phase: Grid<T>,
}

impl<T: Scalar> AmplitudePhase<T> {
    /// Recombines `amplitude * exp(i * phase)` into a spectrum.
    pub fn recombine(&self) -> Result<ChannelSpectrum<T>> {
        if self.amplitude.dims() != self.phase.dims() {
            return Err(Error::Dimension(format!(
                "amplitude {:?} and phase {:?} differ",
                self.amplitude.dims(),
                self.phase.dims()
            )));
        }
        let (h, w) = self.amplitude.dims();
        let coeffs = self
            .amplitude
            .as_slice()
            .iter()
            .zip(self.phase.as_slice())
            .map(|(&a, &p)| Complex::from_polar(a, p))
            .collect();
        ChannelSpectrum::from_centered(h, w, coeffs)
    }
}

/// Real result of an inverse transform plus the discarded imaginary residue.
#[derive(Debug, Clone)]
pub struct SpatialChannel<T> {
    pub values: Grid<T>,
    /// Largest `|Im|` dropped when taking the real part.
    pub max_imaginary: T,
}

/// Centered 2-D DFT of a real channel.
pub fn forward_dft<T: Scalar>(channel: &Grid<T>) -> Result<ChannelSpectrum<T>> {
    if channel.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::param("channel", "contains non-finite values"));
    }
    let (h, w) = channel.dims();
    Ok(Fft2d::new(h, w)?.forward_real(channel.as_slice()))
}

/// Real part of the normalized inverse DFT of a centered spectrum.
pub fn inverse_dft<T: Scalar>(spectrum: &ChannelSpectrum<T>) -> Result<SpatialChannel<T>> {
    let (h, w) = spectrum.dims();
    Ok(Fft2d::new(h, w)?.inverse_real(spectrum))
}

/// Splits a spectrum into modulus and argument. The argument of zero is zero.
pub fn decompose<T: Scalar>(spectrum: &ChannelSpectrum<T>) -> AmplitudePhase<T> {
    let (h, w) = spectrum.dims();
    let (amplitude, phase): (Vec<T>, Vec<T>) = spectrum
        .coeffs
        .iter()
        .map(|z| (z.norm(), principal_arg(*z)))
        .unzip();
    AmplitudePhase {
        amplitude: Grid::new(h, w, amplitude).expect("spectrum dims are valid"),
        phase: Grid::new(h, w, phase).expect("spectrum dims are valid"),
    }
}

/// Argument folded into `(-pi, pi]`; `atan2(-0, x<0)` would give `-pi`.
fn principal_arg<T: Scalar>(z: Complex<T>) -> T {
    let p = z.im.atan2(z.re);
    if p <= -T::PI() {
        T::PI()
    } else {
        p
    }
}

use log::debug;
use num_complex::Complex;

use super::{decompose, AmplitudePhase, Fft2d, FrequencyMask};
use crate::error::{Error, Result};
use crate::raster::{Grid, RasterImage, CHANNELS};
use crate::resample::resize_bicubic;
use crate::scalar::Scalar;

/// Swap ratio used when producing the adapted dataset.
pub const DEFAULT_BETA: f64 = 0.15;

/// Ratios compared when choosing the swap ratio; 0 leaves the source unchanged.
pub const BETA_GRID: [f64; 4] = [0.0, 0.05, 0.10, 0.15];

/// Takes `target_amp` where the mask is set and `source_amp` elsewhere.
pub fn swap_low_frequencies<T: Scalar>(
    source_amp: &Grid<T>,
    target_amp: &Grid<T>,
    mask: &FrequencyMask,
) -> Result<Grid<T>> {
    if source_amp.dims() != target_amp.dims() || source_amp.dims() != mask.dims() {
        return Err(Error::Dimension(format!(
            "source {:?}, target {:?} and mask {:?} must share dimensions",
            source_amp.dims(),
            target_amp.dims(),
            mask.dims()
        )));
    }
    let (h, w) = source_amp.dims();
    let data = source_amp
        .as_slice()
        .iter()
        .zip(target_amp.as_slice())
        .zip(mask.selected())
        .map(|((&s, &t), &sel)| if sel { t } else { s })
        .collect();
    Grid::new(h, w, data)
}

/// Adapted spectrum of one channel before inversion: swapped amplitude,
/// source phase.
pub fn adapt_channel<T: Scalar>(
    source: &Grid<T>,
    target: &Grid<T>,
    mask: &FrequencyMask,
) -> Result<AmplitudePhase<T>> {
    let (h, w) = source.dims();
    adapt_channel_with(&Fft2d::new(h, w)?, source, target, mask)
}

fn adapt_channel_with<T: Scalar>(
    fft: &Fft2d<T>,
    source: &Grid<T>,
    target: &Grid<T>,
    mask: &FrequencyMask,
) -> Result<AmplitudePhase<T>> {
    if source.dims() != target.dims() || source.dims() != fft.dims() {
        return Err(Error::Dimension(format!(
            "source {:?} and target {:?} must share dimensions",
            source.dims(),
            target.dims()
        )));
    }
    let src = decompose(&fft.forward_real(source.as_slice()));
    let tgt = decompose(&fft.forward_real(target.as_slice()));
    Ok(AmplitudePhase {
        amplitude: swap_low_frequencies(&src.amplitude, &tgt.amplitude, mask)?,
        phase: src.phase,
    })
}

/// Source spectrum with the masked amplitudes replaced, in DC-at-0 layout.
///
/// Scaling a coefficient to the target magnitude keeps its phase, so this
/// equals recombining the swapped amplitude with the source phase without
/// a polar round trip over the whole plane. A zero source coefficient takes
/// phase 0, matching [`decompose`].
fn swap_raw<T: Scalar>(fft: &Fft2d<T>, source: &[T], target: &[T], mask: &FrequencyMask) -> Vec<Complex<T>> {
    let mut spec = fft.forward_raw(source);
    if mask.count() == 0 {
        return spec;
    }
    let tgt = fft.forward_raw(target);
    let (h, w) = mask.dims();
    let (sh, sw) = (h / 2, w / 2);
    for (i, _) in mask.selected().iter().enumerate().filter(|(_, s)| **s) {
        let (r, c) = (i / w, i % w);
        let raw = ((r + h - sh) % h) * w + (c + w - sw) % w;
        let (s, amp) = (spec[raw], tgt[raw].norm());
        let norm = s.norm();
        spec[raw] = if norm > T::zero() { s * (amp / norm) } else { Complex::new(amp, T::zero()) };
    }
    spec
}

#[derive(Debug, Clone)]
pub struct FdaOutput<T> {
    pub image: RasterImage<T>,
    /// Largest imaginary residue discarded over all three channels.
    pub max_imaginary: T,
    /// Whether the target was resampled to the source size first.
    pub target_resized: bool,
}

/// Restyles `source` with the low-frequency amplitude of `target`.
///
/// Channels are processed independently. A target of a different size is
/// first resampled to the source size with bicubic interpolation. The
/// output keeps the source dimensions and is clamped into `[0, 1]`.
pub fn fda_transfer<T: Scalar>(
    source: &RasterImage<T>,
    target: &RasterImage<T>,
    beta: f64,
) -> Result<RasterImage<T>> {
    fda_transfer_with_diagnostics(source, target, beta).map(|out| out.image)
}

pub fn fda_transfer_with_diagnostics<T: Scalar>(
    source: &RasterImage<T>,
    target: &RasterImage<T>,
    beta: f64,
) -> Result<FdaOutput<T>> {
    let (h, w) = source.dims();
    let mask = super::build_low_freq_mask(h, w, beta)?;

    let resized;
    let target_resized = target.dims() != source.dims();
    let target = if target_resized {
        resized = resize_bicubic(target, h, w)?;
        &resized
    } else {
        target
    };

    let fft = Fft2d::new(h, w)?;
    let mut max_imaginary = T::zero();
    let mut planes: [Vec<T>; CHANNELS] = Default::default();
    for (c, plane) in planes.iter_mut().enumerate() {
        let spatial = fft.inverse_raw(swap_raw(&fft, source.channel(c), target.channel(c), &mask));
        max_imaginary = max_imaginary.max(spatial.max_imaginary);
        *plane = spatial.values.into_vec();
    }
    debug!(
        "fda {h}x{w} beta={beta}: max discarded imaginary part {}",
        max_imaginary
    );
    Ok(FdaOutput {
        image: RasterImage::from_planes_clamped(h, w, planes)?,
        max_imaginary,
        target_resized,
    })
}

//! Box-aware image augmentations used to oversample yellow lights.
//!
//! Photometric transforms (brightness/contrast, blur) leave boxes alone.
//! Horizontal flip mirrors `cx`. Horizontal shear moves box corners and the
//! box becomes the clipped axis-aligned hull of the moved corners.

use log::warn;
use rand::Rng;

use super::labels::Annotation;
use crate::error::{Error, Result};
use crate::raster::{RasterImage, CHANNELS};
use crate::resample::resize_bicubic;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugSpec {
    pub horizontal_flip: f64,
    pub brightness_limit: f64,
    pub contrast_limit: f64,
    pub brightness_contrast_p: f64,
    /// Shear angle interval in degrees, sampled uniformly.
    pub shear_degrees: (f64, f64),
    pub shear_p: f64,
    /// Largest box-blur kernel; odd, `>= 1`.
    pub blur_kernel_max: usize,
    pub blur_p: f64,
}

impl Default for AugSpec {
    fn default() -> Self {
        Self {
            horizontal_flip: 0.5,
            brightness_limit: 0.2,
            contrast_limit: 0.2,
            brightness_contrast_p: 0.5,
            shear_degrees: (0.0, 20.0),
            shear_p: 0.5,
            blur_kernel_max: 7,
            blur_p: 0.5,
        }
    }
}

impl AugSpec {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("horizontal_flip", self.horizontal_flip),
            ("brightness_contrast_p", self.brightness_contrast_p),
            ("shear_p", self.shear_p),
            ("blur_p", self.blur_p),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("probability {p} outside [0, 1]")));
            }
        }
        if !(self.brightness_limit >= 0.0 && self.contrast_limit >= 0.0) {
            return Err(Error::param("brightness_limit", "limits must be >= 0"));
        }
        let (lo, hi) = self.shear_degrees;
        if !(lo <= hi && lo > -90.0 && hi < 90.0) {
            return Err(Error::param("shear_degrees", format!("[{lo}, {hi}] must be ordered and inside (-90, 90)")));
        }
        if self.blur_kernel_max == 0 || self.blur_kernel_max % 2 == 0 {
            return Err(Error::param(
                "blur_kernel_max",
                format!("{} must be odd and >= 1", self.blur_kernel_max),
            ));
        }
        Ok(())
    }

    fn any_possible(&self) -> bool {
        self.horizontal_flip > 0.0
            || self.brightness_contrast_p > 0.0
            || self.shear_p > 0.0
            || (self.blur_p > 0.0 && self.blur_kernel_max >= 3)
    }
}

/// Concrete transform choices for one application, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugPlan {
    pub flip: bool,
    /// `(contrast gain, brightness offset)`: `v -> gain * v + offset`.
    pub brightness_contrast: Option<(f64, f64)>,
    pub shear_degrees: Option<f64>,
    pub blur_kernel: Option<usize>,
}

impl AugPlan {
    pub fn is_empty(&self) -> bool {
        !self.flip
            && self.brightness_contrast.is_none()
            && self.shear_degrees.is_none()
            && self.blur_kernel.is_none()
    }

    pub fn is_photometric_only(&self) -> bool {
        !self.flip && self.shear_degrees.is_none()
    }
}

fn sample_once<R: Rng>(spec: &AugSpec, rng: &mut R) -> AugPlan {
    let flip = rng.random_bool(spec.horizontal_flip);
    let brightness_contrast = rng.random_bool(spec.brightness_contrast_p).then(|| {
        let gain = 1.0 + symmetric(rng, spec.contrast_limit);
        let offset = symmetric(rng, spec.brightness_limit);
        (gain, offset)
    });
    let shear_degrees = rng.random_bool(spec.shear_p).then(|| {
        let (lo, hi) = spec.shear_degrees;
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    });
    let blur_kernel = (rng.random_bool(spec.blur_p) && spec.blur_kernel_max >= 3).then(|| {
        let choices = (spec.blur_kernel_max - 1) / 2; // kernels 3, 5, ..., max
        3 + 2 * rng.random_range(0..choices)
    });
    AugPlan {
        flip,
        brightness_contrast,
        shear_degrees,
        blur_kernel,
    }
}

fn symmetric<R: Rng>(rng: &mut R, limit: f64) -> f64 {
    if limit == 0.0 {
        0.0
    } else {
        rng.random_range(-limit..=limit)
    }
}

/// Draws each transform with its probability. With `require_any`, redraws
/// until at least one transform is active.
pub fn sample_plan<R: Rng>(spec: &AugSpec, rng: &mut R, require_any: bool) -> Result<AugPlan> {
    spec.validate()?;
    if require_any && !spec.any_possible() {
        return Err(Error::param("augmentation", "every transform has probability 0"));
    }
    loop {
        let plan = sample_once(spec, rng);
        if !require_any || !plan.is_empty() {
            return Ok(plan);
        }
    }
}

/// Output of an augmentation: transformed image, surviving boxes and how many were dropped.
#[derive(Debug, Clone)]
pub struct Augmented<T> {
    pub image: RasterImage<T>,
    pub annotations: Vec<Annotation>,
    pub dropped: usize,
}

pub fn apply_plan<T: Scalar>(
    image: &RasterImage<T>,
    annotations: &[Annotation],
    plan: &AugPlan,
) -> Augmented<T> {
    let mut img = image.clone();
    let mut anns = annotations.to_vec();
    let mut dropped = 0;

    if plan.flip {
        img = img.flip_horizontal();
        anns = anns.iter().map(Annotation::flipped_horizontal).collect();
    }
    if let Some((gain, offset)) = plan.brightness_contrast {
        let (g, o) = (T::lit(gain), T::lit(offset));
        img = img.map(|v| v * g + o);
    }
    if let Some(deg) = plan.shear_degrees {
        let (h, w) = img.dims();
        img = shear_image(&img, deg);
        let before = anns.len();
        anns = anns
            .iter()
            .filter_map(|a| shear_annotation(a, deg, h, w))
            .collect();
        dropped += before - anns.len();
        if dropped > 0 {
            warn!("shear of {deg:.2} degrees dropped {dropped} degenerate box(es)");
        }
    }
    if let Some(k) = plan.blur_kernel {
        img = box_blur(&img, k);
    }
    Augmented {
        image: img,
        annotations: anns,
        dropped,
    }
}

/// Samples a plan (each transform with its own probability) and applies it.
pub fn augment_image<T: Scalar, R: Rng>(
    image: &RasterImage<T>,
    annotations: &[Annotation],
    spec: &AugSpec,
    rng: &mut R,
) -> Result<Augmented<T>> {
    let plan = sample_plan(spec, rng, false)?;
    Ok(apply_plan(image, annotations, &plan))
}

/// Horizontal shear about the image's middle row, in pixel units:
/// `x' = x + tan(deg) * (y - H / 2)`.
pub fn shear_point(x: f64, y: f64, degrees: f64, height: usize) -> (f64, f64) {
    let k = degrees.to_radians().tan();
    (x + k * (y - height as f64 / 2.0), y)
}

/// Moves the four corners through the shear and returns the clipped hull;
/// `None` if nothing of the box stays inside the image.
pub fn shear_annotation(a: &Annotation, degrees: f64, height: usize, width: usize) -> Option<Annotation> {
    let (x1, y1, x2, y2) = a.corners();
    let (wf, hf) = (width as f64, height as f64);
    let corners = [(x1, y1), (x2, y1), (x1, y2), (x2, y2)].map(|(x, y)| {
        let (sx, sy) = shear_point(x * wf, y * hf, degrees, height);
        (sx / wf, sy / hf)
    });
    let min_x = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let max_x = corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let min_y = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let max_y = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    Annotation::from_corners_clipped(a.class, min_x, min_y, max_x, max_y)
}

/// Inverse-mapped bilinear warp; samples outside the source read as black.
fn shear_image<T: Scalar>(image: &RasterImage<T>, degrees: f64) -> RasterImage<T> {
    let (h, w) = image.dims();
    let k = degrees.to_radians().tan();
    let planes: [Vec<T>; CHANNELS] = std::array::from_fn(|c| {
        let src = image.channel(c);
        let sample = |r: isize, x: isize| -> f64 {
            if r < 0 || x < 0 || r as usize >= h || x as usize >= w {
                0.0
            } else {
                src[r as usize * w + x as usize].as_f64()
            }
        };
        let mut out = Vec::with_capacity(h * w);
        for r in 0..h {
            let yc = r as f64 + 0.5;
            let shift = k * (yc - h as f64 / 2.0);
            for x in 0..w {
                // source pixel-index coordinate of this output pixel center
                let sx = x as f64 - shift;
                let x0 = sx.floor();
                let t = sx - x0;
                let x0 = x0 as isize;
                let v = sample(r as isize, x0) * (1.0 - t) + sample(r as isize, x0 + 1) * t;
                out.push(T::lit(v));
            }
        }
        out
    });
    RasterImage::from_planes_clamped(h, w, planes).expect("warp keeps dimensions")
}

fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Separable mean filter of odd size `k` with mirrored (101) borders.
pub fn box_blur<T: Scalar>(image: &RasterImage<T>, k: usize) -> RasterImage<T> {
    if k <= 1 {
        return image.clone();
    }
    let (h, w) = image.dims();
    let half = (k / 2) as isize;
    let norm = T::one() / T::from_count(k);
    let planes: [Vec<T>; CHANNELS] = std::array::from_fn(|c| {
        let src = image.channel(c);
        let mut tmp = vec![T::zero(); h * w];
        for r in 0..h {
            for x in 0..w {
                let mut acc = T::zero();
                for d in -half..=half {
                    acc = acc + src[r * w + reflect101(x as isize + d, w)];
                }
                tmp[r * w + x] = acc * norm;
            }
        }
        let mut out = vec![T::zero(); h * w];
        for r in 0..h {
            for x in 0..w {
                let mut acc = T::zero();
                for d in -half..=half {
                    acc = acc + tmp[reflect101(r as isize + d, h) * w + x];
                }
                out[r * w + x] = acc * norm;
            }
        }
        out
    });
    RasterImage::from_planes_clamped(h, w, planes).expect("blur keeps dimensions")
}

/// Bicubic resize; normalized boxes carry over unchanged.
pub fn resize_with_labels<T: Scalar>(
    image: &RasterImage<T>,
    annotations: &[Annotation],
    out_height: usize,
    out_width: usize,
) -> Result<(RasterImage<T>, Vec<Annotation>)> {
    Ok((resize_bicubic(image, out_height, out_width)?, annotations.to_vec()))
}

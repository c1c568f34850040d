//! Real-valued grids and three-channel images.
//!
//! Images live in planar layout: each color channel is a contiguous row-major
//! `height * width` plane. Intensities are kept in `[0, 1]`; 8-bit files map
//! through `v / 255` on load and `round(v * 255)` on save.

use std::path::Path;

use image::{ImageBuffer, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHANNELS: usize = 3;

/// Row-major 2-D grid of reals: one image channel, an amplitude map or a phase map.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::Dimension(format!(
                "grid {height}x{width} needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![T::zero(); height * width])
    }

    pub fn from_fn(height: usize, width: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        check_dims(height, width)?;
        let mut f = f;
        let data = (0..height * width).map(|i| f(i / width, i % width)).collect();
        Ok(Self {
            height,
            width,
            data,
        })
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

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Largest absolute elementwise difference; dimensions must agree.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims(), other.dims(), "grid dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

/// H x W x 3 intensity image with every value finite and inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage<T> {
    height: usize,
    width: usize,
    planes: [Vec<T>; CHANNELS],
}

impl<T: Scalar> RasterImage<T> {
    /// Builds an image from three planes, rejecting non-finite or out-of-range values.
    pub fn from_planes(height: usize, width: usize, planes: [Vec<T>; CHANNELS]) -> Result<Self> {
        check_dims(height, width)?;
        for (c, plane) in planes.iter().enumerate() {
            if plane.len() != height * width {
                return Err(Error::Dimension(format!(
                    "channel {c} has {} values, expected {}",
                    plane.len(),
                    height * width
                )));
            }
            if let Some(v) = plane
                .iter()
                .find(|v| !v.is_finite() || **v < T::zero() || **v > T::one())
            {
                return Err(Error::param(
                    "intensity",
                    format!("channel {c} holds {v}, outside [0, 1]"),
                ));
            }
        }
        Ok(Self {
            height,
            width,
            planes,
        })
    }

    /// Like [`from_planes`](Self::from_planes) but clamps every value into `[0, 1]` (NaN to 0).
    pub fn from_planes_clamped(
        height: usize,
        width: usize,
        mut planes: [Vec<T>; CHANNELS],
    ) -> Result<Self> {
        for plane in planes.iter_mut() {
            plane.iter_mut().for_each(|v| *v = v.clamp_unit());
        }
        Self::from_planes(height, width, planes)
    }

    pub fn filled(height: usize, width: usize, value: T) -> Result<Self> {
        let plane = vec![value; height * width];
        Self::from_planes(height, width, [plane.clone(), plane.clone(), plane])
    }

    /// Samples `f(channel, row, col)`, clamping the result into `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        check_dims(height, width)?;
        let planes = std::array::from_fn(|c| {
            (0..height * width)
                .map(|i| f(c, i / width, i % width))
                .collect()
        });
        Self::from_planes_clamped(height, width, planes)
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

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> T {
        self.planes[channel][row * self.width + col]
    }

    pub fn channel(&self, channel: usize) -> &[T] {
        &self.planes[channel]
    }

    pub fn channel_grid(&self, channel: usize) -> Grid<T> {
        Grid {
            height: self.height,
            width: self.width,
            data: self.planes[channel].clone(),
        }
    }

    pub fn planes(&self) -> &[Vec<T>; CHANNELS] {
        &self.planes
    }

    pub fn into_planes(self) -> [Vec<T>; CHANNELS] {
        self.planes
    }

    /// Applies `f` to every intensity and clamps the result.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        let planes = std::array::from_fn(|c| {
            self.planes[c].iter().map(|&v| f(v).clamp_unit()).collect()
        });
        Self {
            height: self.height,
            width: self.width,
            planes,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dims(), other.dims(), "image dimensions differ");
        self.planes
            .iter()
            .zip(&other.planes)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }

    /// Mirrors columns. Resampling-free, so applying it twice is exact.
    pub fn flip_horizontal(&self) -> Self {
        let w = self.width;
        let planes = std::array::from_fn(|c| {
            let mut out = self.planes[c].clone();
            for row in out.chunks_mut(w) {
                row.reverse();
            }
            out
        });
        Self {
            height: self.height,
            width: self.width,
            planes,
        }
    }

    pub fn from_rgb8(img: &RgbImage) -> Result<Self> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        check_dims(h, w)?;
        let scale = T::lit(255.0);
        let mut planes: [Vec<T>; CHANNELS] = std::array::from_fn(|_| Vec::with_capacity(h * w));
        for px in img.pixels() {
            for (c, plane) in planes.iter_mut().enumerate() {
                plane.push(T::lit(f64::from(px[c])) / scale);
            }
        }
        Ok(Self {
            height: h,
            width: w,
            planes,
        })
    }

    pub fn to_rgb8(&self) -> RgbImage {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            let i = y as usize * self.width + x as usize;
            Rgb(std::array::from_fn(|c| quantize(self.planes[c][i])))
        })
    }

    /// Loads an 8-bit RGB file (PNG or JPEG; other color types are converted).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_rgb8(&img.into_rgb8())
    }

    /// Saves as 8-bit RGB; the format follows the file extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_rgb8().save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `round(v * 255)` clamped to `[0, 255]`.
#[inline]
pub fn quantize<T: Scalar>(v: T) -> u8 {
    let scaled = (v.as_f64() * 255.0).round();
    if scaled.is_nan() {
        0
    } else {
        scaled.clamp(0.0, 255.0) as u8
    }
}

pub(crate) fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!(
            "grid must be at least 1x1, got {height}x{width}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_sized_and_out_of_range() {
        assert!(matches!(Grid::<f64>::zeros(0, 3), Err(Error::Dimension(_))));
        let bad = [vec![0.5], vec![1.5], vec![0.0]];
        assert!(RasterImage::<f64>::from_planes(1, 1, bad).is_err());
        let nan = [vec![f64::NAN], vec![0.0], vec![0.0]];
        assert!(RasterImage::<f64>::from_planes(1, 1, nan).is_err());
    }

    #[test]
    fn rgb8_roundtrip_is_exact() {
        let img = RgbImage::from_fn(5, 3, |x, y| Rgb([(x * 40) as u8, (y * 90) as u8, 7]));
        let raster = RasterImage::<f64>::from_rgb8(&img).unwrap();
        assert_eq!(raster.dims(), (3, 5));
        assert_eq!(raster.to_rgb8(), img);
    }

    #[test]
    fn quantize_rounds_and_clamps() {
        assert_eq!(quantize(0.0f64), 0);
        assert_eq!(quantize(1.0f64), 255);
        assert_eq!(quantize(2.0f64), 255);
        assert_eq!(quantize(-1.0f64), 0);
        assert_eq!(quantize(0.5f64), 128);
        assert_eq!(quantize(f64::NAN), 0);
    }

    #[test]
    fn flip_is_an_involution() {
        let img = RasterImage::<f64>::from_fn(4, 5, |c, r, x| (c + r * 5 + x) as f64 / 40.0).unwrap();
        let flipped = img.flip_horizontal();
        assert_eq!(flipped.get(0, 1, 0), img.get(0, 1, 4));
        assert_eq!(flipped.flip_horizontal(), img);
    }
}

use rand::Rng;

use crate::error::{Error, Result};
use crate::raster::{RasterImage, CHANNELS};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

/// Streak intensity before blending, on the 8-bit scale.
pub const DEFAULT_STREAK_LEVEL: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainParams {
    /// Number of streaks.
    pub noise: usize,
    /// Inclusive streak length range in pixels.
    pub length_range: (u32, u32),
    /// Half-open angle range `[lo, hi)` in whole degrees from vertical.
    pub angle_range: (i32, i32),
    /// Streak thickness in pixels, `>= 1`.
    pub thickness: u32,
    /// Streak opacity in `[0, 1]`.
    pub alpha: f64,
    /// Streak intensity in `[0, 1]`.
    pub intensity: f64,
    pub seed: u64,
}

impl Default for RainParams {
    fn default() -> Self {
        Self {
            noise: 500,
            length_range: (50, 60),
            angle_range: (-50, 51),
            thickness: 3,
            alpha: 0.7,
            intensity: DEFAULT_STREAK_LEVEL / 255.0,
            seed: 0,
        }
    }
}

impl RainParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.length_range;
        if lo > hi {
            return Err(Error::param("length_range", format!("[{lo}, {hi}] is empty")));
        }
        let (alo, ahi) = self.angle_range;
        if alo >= ahi {
            return Err(Error::param("angle_range", format!("[{alo}, {ahi}) is empty")));
        }
        if self.thickness < 1 {
            return Err(Error::param("thickness", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param("alpha", format!("{} is outside [0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err(Error::param(
                "intensity",
                format!("{} is outside [0, 1]", self.intensity),
            ));
        }
        Ok(())
    }
}

/// One rain streak: a segment from `start` to `end` in `(x, y)` pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streak {
    pub start: (i64, i64),
    pub end: (i64, i64),
    pub length: u32,
    /// Degrees from vertical; positive leans right going down.
    pub angle: i32,
}

/// Draws the streak geometry for an image of the given size.
pub fn generate_streaks(height: usize, width: usize, params: &RainParams) -> Result<Vec<Streak>> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let (lo, hi) = params.length_range;
    let (alo, ahi) = params.angle_range;
    let streaks = (0..params.noise)
        .map(|_| {
            let x = rng.random_range(0..width as i64);
            let y = rng.random_range(0..height as i64);
            let length = rng.random_range(lo..=hi);
            let angle = rng.random_range(alo..ahi);
            let theta = f64::from(angle).to_radians();
            let dx = (f64::from(length) * theta.sin()).round() as i64;
            let dy = (f64::from(length) * theta.cos()).round() as i64;
            Streak {
                start: (x, y),
                end: (x + dx, y + dy),
                length,
                angle,
            }
        })
        .collect();
    Ok(streaks)
}

/// Integer line points from `a` to `b`, both ends included.
fn line_points(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - x).abs();
    let dy = -(b.1 - y).abs();
    let sx = if x < b.0 { 1 } else { -1 };
    let sy = if y < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut pts = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        pts.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    pts
}

/// Disc offsets covering `dx^2 + dy^2 <= (thickness / 2)^2`.
fn disc_offsets(thickness: u32) -> Vec<(i64, i64)> {
    let r = f64::from(thickness) / 2.0;
    let reach = r.floor() as i64;
    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if ((dx * dx + dy * dy) as f64) <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Pixels `(row, col)` covered by a thickened streak, clipped to the image,
/// sorted and free of duplicates.
pub fn rasterize_streak(streak: &Streak, height: usize, width: usize, thickness: u32) -> Vec<(usize, usize)> {
    let disc = disc_offsets(thickness);
    let mut pixels: Vec<(usize, usize)> = line_points(streak.start, streak.end)
        .into_iter()
        .flat_map(|(x, y)| disc.iter().map(move |(dx, dy)| (x + dx, y + dy)))
        .filter(|&(x, y)| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
        .map(|(x, y)| (y as usize, x as usize))
        .collect();
    pixels.sort_unstable();
    pixels.dedup();
    pixels
}

/// Renders `noise` streaks alpha-blended in generation order; each streak
/// blends each of its pixels once.
pub fn apply_rain<T: Scalar>(image: &RasterImage<T>, params: &RainParams) -> Result<RasterImage<T>> {
    params.validate()?;
    if params.noise == 0 || params.alpha == 0.0 {
        return Ok(image.clone());
    }
    let (h, w) = image.dims();
    let streaks = generate_streaks(h, w, params)?;
    let alpha = T::lit(params.alpha);
    let keep = T::one() - alpha;
    let color = T::lit(params.intensity) * alpha;
    let mut planes: [Vec<T>; CHANNELS] = image.planes().clone();
    for streak in &streaks {
        for (r, c) in rasterize_streak(streak, h, w, params.thickness) {
            let i = r * w + c;
            for plane in planes.iter_mut() {
                plane[i] = plane[i] * keep + color;
            }
        }
    }
    RasterImage::from_planes_clamped(h, w, planes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_includes_both_ends() {
        let pts = line_points((0, 0), (3, -2));
        assert_eq!(pts.first(), Some(&(0, 0)));
        assert_eq!(pts.last(), Some(&(3, -2)));
        assert_eq!(pts.len(), 4);
        assert_eq!(line_points((2, 2), (2, 2)), vec![(2, 2)]);
    }

    #[test]
    fn disc_sizes() {
        assert_eq!(disc_offsets(1).len(), 1);
        assert_eq!(disc_offsets(2).len(), 5);
        assert_eq!(disc_offsets(3).len(), 9);
    }

    #[test]
    fn streaks_respect_ranges() {
        let params = RainParams::default();
        let streaks = generate_streaks(100, 80, &params).unwrap();
        assert_eq!(streaks.len(), 500);
        for s in &streaks {
            assert!((50..=60).contains(&s.length));
            assert!((-50..51).contains(&s.angle));
            assert!(s.end.1 >= s.start.1, "streaks fall downward");
        }
    }

    #[test]
    fn identity_limits() {
        let img = RasterImage::<f64>::from_fn(20, 30, |c, r, x| ((c + r + x) % 5) as f64 / 5.0).unwrap();
        let none = RainParams { noise: 0, ..Default::default() };
        assert_eq!(apply_rain(&img, &none).unwrap(), img);
        let clear = RainParams { alpha: 0.0, ..Default::default() };
        assert_eq!(apply_rain(&img, &clear).unwrap(), img);
    }

    #[test]
    fn seeded_output_is_deterministic() {
        let img = RasterImage::<f64>::filled(40, 40, 0.2).unwrap();
        let p = RainParams { noise: 30, seed: 9, ..Default::default() };
        assert_eq!(apply_rain(&img, &p).unwrap(), apply_rain(&img, &p).unwrap());
        let q = RainParams { seed: 10, ..p };
        assert_ne!(apply_rain(&img, &p).unwrap(), apply_rain(&img, &q).unwrap());
    }

    #[test]
    fn invalid_params() {
        for p in [
            RainParams { length_range: (60, 50), ..Default::default() },
            RainParams { angle_range: (5, 5), ..Default::default() },
            RainParams { thickness: 0, ..Default::default() },
            RainParams { alpha: 1.2, ..Default::default() },
        ] {
            assert!(p.validate().is_err());
        }
    }
}

use super::{centered_to_stored, stored_to_centered};
use crate::error::{Error, Result};
use crate::raster::check_dims;

/// Guards `floor(beta * n)` against products such as `0.15 * 20 = 2.9999...`.
const FLOOR_EPS: f64 = 1e-9;

/// Centered binary selector of the low-frequency block.
///
/// A cell at centered frequency `(m, n)` is selected iff `beta > 0`,
/// `|m| <= floor(beta * height)` and `|n| <= floor(beta * width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask {
    height: usize,
    width: usize,
    beta: f64,
    selected: Vec<bool>,
}

impl FrequencyMask {
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

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Selection flags in stored (center-origin) row-major order.
    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    /// Whether centered frequency `(m, n)` is selected; indices wrap.
    pub fn is_selected(&self, m: isize, n: isize) -> bool {
        let r = centered_to_stored(m, self.height);
        let c = centered_to_stored(n, self.width);
        self.selected[r * self.width + c]
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|s| **s).count()
    }

    /// Half-widths `(floor(beta * H), floor(beta * W))` of the selected block.
    pub fn half_extent(&self) -> (usize, usize) {
        (half_extent(self.beta, self.height), half_extent(self.beta, self.width))
    }
}

fn half_extent(beta: f64, n: usize) -> usize {
    (beta * n as f64 + FLOOR_EPS).floor() as usize
}

/// Builds the low-frequency mask; `beta` must lie in `[0, 1)`.
pub fn build_low_freq_mask(height: usize, width: usize, beta: f64) -> Result<FrequencyMask> {
    check_dims(height, width)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::param(
            "beta",
            format!("{beta} is outside the valid range [0, 1)"),
        ));
    }
    let (rh, rw) = (half_extent(beta, height), half_extent(beta, width));
    let selected = (0..height * width)
        .map(|i| {
            let m = stored_to_centered(i / width, height).unsigned_abs();
            let n = stored_to_centered(i % width, width).unsigned_abs();
            beta > 0.0 && m <= rh && n <= rw
        })
        .collect();
    Ok(FrequencyMask {
        height,
        width,
        beta,
        selected,
    })
}

use crate::error::{Error, Result};
use crate::raster::{RasterImage, CHANNELS};
use crate::scalar::Scalar;

/// Scene depth proxy used for the transmission map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthModel {
    /// `d = 1` everywhere.
    #[default]
    Uniform,
    /// `d = (H - row) / H`: 1 on the top row, `1 / H` on the bottom row.
    VerticalGradient,
}

impl DepthModel {
    pub fn depth(self, row: usize, height: usize) -> f64 {
        match self {
            DepthModel::Uniform => 1.0,
            DepthModel::VerticalGradient => (height - row) as f64 / height as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DepthModel::Uniform => "uniform",
            DepthModel::VerticalGradient => "vertical_gradient",
        }
    }
}

impl std::str::FromStr for DepthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(DepthModel::Uniform),
            "vertical_gradient" | "vertical-gradient" => Ok(DepthModel::VerticalGradient),
            other => Err(Error::param(
                "depth",
                format!("unknown depth model `{other}` (expected uniform or vertical_gradient)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogParams {
    /// Extinction strength, `>= 0`.
    pub lambda: f64,
    /// Airlight intensity on the 8-bit scale, `[0, 255]`.
    pub airlight: f64,
    pub depth: DepthModel,
}

impl Default for FogParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            airlight: 150.0,
            depth: DepthModel::Uniform,
        }
    }
}

impl FogParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", format!("{} must be finite and >= 0", self.lambda)));
        }
        if !(0.0..=255.0).contains(&self.airlight) {
            return Err(Error::param(
                "airlight",
                format!("{} is outside [0, 255]", self.airlight),
            ));
        }
        Ok(())
    }
}

/// Atmospheric scattering blend: `out = in * t + (airlight / 255) * (1 - t)`
/// with transmission `t = exp(-lambda * d)`.
pub fn apply_fog<T: Scalar>(image: &RasterImage<T>, params: &FogParams) -> Result<RasterImage<T>> {
    params.validate()?;
    if params.lambda == 0.0 {
        return Ok(image.clone());
    }
    let (h, w) = image.dims();
    let airlight = T::lit(params.airlight / 255.0);
    let transmission: Vec<T> = (0..h)
        .map(|row| T::lit((-params.lambda * params.depth.depth(row, h)).exp()))
        .collect();
    let planes: [Vec<T>; CHANNELS] = std::array::from_fn(|c| {
        image
            .channel(c)
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let t = transmission[i / w];
                v * t + airlight * (T::one() - t)
            })
            .collect()
    });
    RasterImage::from_planes_clamped(h, w, planes)
}

//! Synthetic adverse weather: fog by transmission/airlight blending and
//! rain by alpha-blended streaks. Both are pure functions of image and
//! parameters; they never touch annotations.

mod fog;
mod rain;

pub use fog::{apply_fog, DepthModel, FogParams};
pub use rain::{
    apply_rain, generate_streaks, rasterize_streak, RainParams, Streak, DEFAULT_STREAK_LEVEL,
};

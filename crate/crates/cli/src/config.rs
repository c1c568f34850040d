//! Layered pipeline configuration.
//!
//! Values come from built-in defaults, then an optional config file, then
//! command-line flags. The file format is `key = value` lines under
//! `[section]` headers, `#` comments. Keys are addressed as `section.key`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fdakit::dataset::AugSpec;
use fdakit::pseudo::PseudoLabelPolicy;
use fdakit::weather::{DepthModel, FogParams, RainParams};

use crate::error::{CliError, CliResult};

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "FDAKIT_CONFIG";

/// Every known key with its default. Empty means unset.
const DEFAULTS: &[(&str, &str)] = &[
    ("general.seed", "0"),
    ("general.jobs", "0"),
    ("paths.manifest", ""),
    ("paths.out", ""),
    ("paths.sources", ""),
    ("paths.taxonomies", ""),
    ("paths.targets", ""),
    ("paths.image", ""),
    ("paths.target_image", ""),
    ("paths.preds", ""),
    ("paths.gts", ""),
    ("paths.pseudo", ""),
    ("fda.beta", "0.15"),
    ("fda.resize", "false"),
    ("fda.order", "resize-then-fda"),
    ("preview.betas", "0.05,0.10,0.15"),
    ("fog.lambda", "1"),
    ("fog.airlight", "150"),
    ("fog.depth", "uniform"),
    ("rain.noise", "500"),
    ("rain.length_min", "50"),
    ("rain.length_max", "60"),
    ("rain.angle_min", "-50"),
    ("rain.angle_max", "51"),
    ("rain.thickness", "3"),
    ("rain.alpha", "0.7"),
    ("rain.intensity", "200"),
    ("augment.flip_p", "0.5"),
    ("augment.brightness_limit", "0.2"),
    ("augment.contrast_limit", "0.2"),
    ("augment.brightness_contrast_p", "0.5"),
    ("augment.shear_min", "0"),
    ("augment.shear_max", "20"),
    ("augment.shear_p", "0.5"),
    ("augment.blur_max", "7"),
    ("augment.blur_p", "0.5"),
    ("rebalance.target", "0.13"),
    ("split.train", "0.7"),
    ("split.val", "0.2"),
    ("split.test", "0.1"),
    ("output.width", "1280"),
    ("output.height", "1080"),
    ("ssl.confidence", "0.5"),
    ("ssl.labeled_fraction", "0.5"),
];

/// Raw string values by `section.key`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.into();
                Ok(())
            }
            None => Err(CliError::Validation(format!("unknown config key `{key}`"))),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// Applies a config file's text on top of the current values.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> CliResult<()> {
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1))
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            self.set(&key, v.trim())
                .map_err(|e| CliError::Validation(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.merge_text(&text, &path.display().to_string())
    }

    /// The full configuration in file form, sections in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (key, value) in &self.values {
            let (section, name) = key.split_once('.').unwrap_or(("", key));
            if section != current {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{section}]\n"));
                current = section;
            }
            out.push_str(&format!("{name} = {value}\n"));
        }
        out
    }

    fn parse<T: FromStr>(&self, key: &str) -> CliResult<T> {
        let raw = self.get(key);
        raw.parse()
            .map_err(|_| CliError::Validation(format!("{key}: cannot parse `{raw}`")))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        let raw = self.get(key);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }
}

/// Which of FDA and the output resize runs first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdaOrder {
    ResizeThenFda,
    FdaThenResize,
}

impl FromStr for FdaOrder {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "resize-then-fda" => Ok(FdaOrder::ResizeThenFda),
            "fda-then-resize" => Ok(FdaOrder::FdaThenResize),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// `(tag, directory)` pairs.
    pub sources: Vec<(String, PathBuf)>,
    /// `(tag, taxonomy file)` overrides of the built-in mappings.
    pub taxonomies: Vec<(String, PathBuf)>,
    pub targets: Option<PathBuf>,
    pub image: Option<PathBuf>,
    pub target_image: Option<PathBuf>,
    pub preds: Option<PathBuf>,
    pub gts: Option<PathBuf>,
    pub pseudo: Option<PathBuf>,
}

/// Typed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub seed: u64,
    /// Worker threads; 0 means all available cores.
    pub jobs: usize,
    pub beta: f64,
    pub fda_resize: bool,
    pub fda_order: FdaOrder,
    pub preview_betas: Vec<f64>,
    pub fog: FogParams,
    pub rain: RainParams,
    pub augment: AugSpec,
    pub yellow_fraction: f64,
    pub split_ratios: [f64; 3],
    pub output_size: (usize, usize),
    pub ssl: PseudoLabelPolicy,
}

fn check_beta(key: &str, beta: f64) -> CliResult<f64> {
    if (0.0..1.0).contains(&beta) {
        Ok(beta)
    } else {
        Err(CliError::Validation(format!(
            "{key}: {beta} is outside the valid range [0, 1) for beta"
        )))
    }
}

fn tagged_list(raw: &str, key: &str) -> CliResult<Vec<(String, PathBuf)>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(t, p)| (t.trim().to_string(), PathBuf::from(p.trim())))
                .filter(|(t, _)| !t.is_empty())
                .ok_or_else(|| CliError::Validation(format!("{key}: expected `tag=path`, got `{item}`")))
        })
        .collect()
}

impl PipelineConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let paths = Paths {
            manifest: raw.path("paths.manifest"),
            out: raw.path("paths.out"),
            sources: tagged_list(raw.get("paths.sources"), "paths.sources")?,
            taxonomies: tagged_list(raw.get("paths.taxonomies"), "paths.taxonomies")?,
            targets: raw.path("paths.targets"),
            image: raw.path("paths.image"),
            target_image: raw.path("paths.target_image"),
            preds: raw.path("paths.preds"),
            gts: raw.path("paths.gts"),
            pseudo: raw.path("paths.pseudo"),
        };
        let beta = check_beta("fda.beta", raw.parse("fda.beta")?)?;
        let preview_betas = raw
            .get("preview.betas")
            .split(',')
            .map(|s| {
                let b: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Validation(format!("preview.betas: cannot parse `{s}`")))?;
                check_beta("preview.betas", b)
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let fda_order = raw.parse::<FdaOrder>("fda.order").map_err(|_| {
            CliError::Validation(format!(
                "fda.order: `{}` is not resize-then-fda or fda-then-resize",
                raw.get("fda.order")
            ))
        })?;

        let depth: DepthModel = raw
            .get("fog.depth")
            .parse()
            .map_err(|e: fdakit::Error| CliError::Validation(format!("fog.depth: {e}")))?;
        let fog = FogParams {
            lambda: raw.parse("fog.lambda")?,
            airlight: raw.parse("fog.airlight")?,
            depth,
        };
        let rain = RainParams {
            noise: raw.parse("rain.noise")?,
            length_range: (raw.parse("rain.length_min")?, raw.parse("rain.length_max")?),
            angle_range: (raw.parse("rain.angle_min")?, raw.parse("rain.angle_max")?),
            thickness: raw.parse("rain.thickness")?,
            alpha: raw.parse("rain.alpha")?,
            intensity: raw.parse::<f64>("rain.intensity")? / 255.0,
            seed: 0,
        };
        let augment = AugSpec {
            horizontal_flip: raw.parse("augment.flip_p")?,
            brightness_limit: raw.parse("augment.brightness_limit")?,
            contrast_limit: raw.parse("augment.contrast_limit")?,
            brightness_contrast_p: raw.parse("augment.brightness_contrast_p")?,
            shear_degrees: (raw.parse("augment.shear_min")?, raw.parse("augment.shear_max")?),
            shear_p: raw.parse("augment.shear_p")?,
            blur_kernel_max: raw.parse("augment.blur_max")?,
            blur_p: raw.parse("augment.blur_p")?,
        };
        let ssl = PseudoLabelPolicy {
            confidence_threshold: raw.parse("ssl.confidence")?,
            labeled_fraction: raw.parse("ssl.labeled_fraction")?,
            seed: raw.parse("general.seed")?,
        };
        let cfg = Self {
            paths,
            seed: raw.parse("general.seed")?,
            jobs: raw.parse("general.jobs")?,
            beta,
            fda_resize: raw.parse("fda.resize")?,
            fda_order,
            preview_betas,
            fog,
            rain,
            augment,
            yellow_fraction: raw.parse("rebalance.target")?,
            split_ratios: [raw.parse("split.train")?, raw.parse("split.val")?, raw.parse("split.test")?],
            output_size: (raw.parse("output.height")?, raw.parse("output.width")?),
            ssl,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks shared by every command, first offending field first.
    fn validate(&self) -> CliResult<()> {
        let named = |section: &str, e: fdakit::Error| match e {
            fdakit::Error::Parameter { name, message } => CliError::Validation(format!("{section}.{name}: {message}")),
            e => CliError::Validation(format!("{section}: {e}")),
        };
        self.fog.validate().map_err(|e| named("fog", e))?;
        self.rain.validate().map_err(|e| named("rain", e))?;
        self.augment.validate().map_err(|e| named("augment", e))?;
        self.ssl.validate().map_err(|e| named("ssl", e))?;
        if !(self.yellow_fraction > 0.0 && self.yellow_fraction < 1.0) {
            return Err(CliError::Validation(format!(
                "rebalance.target: {} must lie in (0, 1)",
                self.yellow_fraction
            )));
        }
        fdakit::dataset::split_counts(3, self.split_ratios).map_err(|e| named("split", e))?;
        if self.output_size.0 == 0 || self.output_size.1 == 0 {
            return Err(CliError::Validation("output.width/output.height: must be positive".into()));
        }
        Ok(())
    }

    /// A path that the command needs and that must already exist.
    pub fn require_existing(&self, key: &str, value: &Option<PathBuf>) -> CliResult<PathBuf> {
        let p = self.require(key, value)?;
        if !p.exists() {
            return Err(CliError::Validation(format!("{key}: {} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn require(&self, key: &str, value: &Option<PathBuf>) -> CliResult<PathBuf> {
        value
            .clone()
            .ok_or_else(|| CliError::Validation(format!("{key} is required")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = PipelineConfig::from_raw(&RawConfig::default()).unwrap();
        assert_eq!(cfg.beta, 0.15);
        assert_eq!(cfg.fog, FogParams::default());
        assert_eq!(RainParams { seed: 0, ..cfg.rain }, RainParams::default());
        assert_eq!(cfg.augment, AugSpec::default());
        assert_eq!(cfg.split_ratios, [0.7, 0.2, 0.1]);
        assert_eq!(cfg.output_size, (1080, 1280));
    }

    #[test]
    fn file_sections_and_roundtrip() {
        let mut raw = RawConfig::default();
        raw.merge_text("# comment\n[fda]\nbeta = 0.05\n\n[general]\nseed=7\n", "t").unwrap();
        assert_eq!(raw.get("fda.beta"), "0.05");
        assert_eq!(raw.get("general.seed"), "7");
        let mut back = RawConfig::default();
        back.merge_text(&raw.to_text(), "snapshot").unwrap();
        assert_eq!(back, raw);
    }

    #[test]
    fn errors_name_the_field() {
        let mut raw = RawConfig::default();
        assert!(raw.merge_text("[fda]\nbogus = 1\n", "t").unwrap_err().to_string().contains("fda.bogus"));
        raw.set("fda.beta", "1.5").unwrap();
        let msg = PipelineConfig::from_raw(&raw).unwrap_err().to_string();
        assert!(msg.contains("beta") && msg.contains("[0, 1)"), "{msg}");
        let mut raw = RawConfig::default();
        raw.set("rain.alpha", "2").unwrap();
        assert!(PipelineConfig::from_raw(&raw).unwrap_err().to_string().contains("alpha"));
        let mut raw = RawConfig::default();
        raw.set("paths.sources", "lisa").unwrap();
        assert!(PipelineConfig::from_raw(&raw).unwrap_err().to_string().contains("paths.sources"));
    }
}

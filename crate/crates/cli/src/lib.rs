//! Command-line driver for the fdakit pipeline.
//!
//! Exit status: 0 success, 1 usage, 2 validation, 3 I/O, 4 data contract.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;

pub use config::{PipelineConfig, RawConfig, CONFIG_ENV};
pub use error::{CliError, CliResult};

/// File written into every output directory.
pub const RECORD_FILE: &str = "run.cfg";

#[derive(Debug, Parser)]
#[command(name = "fdakit", version, about = "Traffic light dataset pipeline: FDA, weather, rebalancing, metrics")]
struct Cli {
    /// Config file (`key = value` under `[section]` headers); defaults to $FDAKIT_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set rain.noise=200`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed; every random choice derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Merge source datasets into one three-class dataset.
    Merge(MergeArgs),
    /// Per-class image presence of a manifest.
    Stats(StatsArgs),
    /// Add augmented yellow-light copies up to a target fraction.
    Rebalance(RebalanceArgs),
    /// Assign train/val/test and write resized split directories.
    Split(SplitArgs),
    /// Add synthetic fog.
    Fog(FogArgs),
    /// Add synthetic rain.
    Rain(RainArgs),
    /// Restyle images with the low-frequency amplitude of random targets.
    Fda(FdaArgs),
    /// Side-by-side sheet of an image and its adaptations at several betas.
    Preview(PreviewArgs),
    /// Turn detector predictions into pseudo-labels.
    PseudoFilter(PseudoFilterArgs),
    /// Build labeled, unlabeled and mixed manifests for semi-supervised training.
    SslCompile(SslCompileArgs),
    /// Precision, recall, mAP50 and mAP50-95 of predictions against labels.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct MergeArgs {
    /// Source dataset as TAG=DIR with DIR/images and DIR/labels. Repeatable.
    #[arg(long = "source", value_name = "TAG=DIR")]
    sources: Vec<String>,
    /// Taxonomy file for a source as TAG=FILE; lisa and s2tld have built-ins.
    #[arg(long = "taxonomy", value_name = "TAG=FILE")]
    taxonomies: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RebalanceArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Target yellow image fraction.
    #[arg(long)]
    target: Option<f64>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    train: Option<f64>,
    #[arg(long)]
    val: Option<f64>,
    #[arg(long)]
    test: Option<f64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
}

#[derive(Debug, Args)]
struct FogArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Airlight on the 8-bit scale.
    #[arg(long)]
    airlight: Option<f64>,
    /// uniform or vertical_gradient.
    #[arg(long)]
    depth: Option<String>,
}

#[derive(Debug, Args)]
struct RainArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of streaks per image.
    #[arg(long)]
    noise: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    thickness: Option<u32>,
}

#[derive(Debug, Args)]
struct FdaArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Directory of target-domain images.
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also resize outputs to output.width x output.height.
    #[arg(long)]
    resize: bool,
    /// resize-then-fda or fda-then-resize.
    #[arg(long)]
    order: Option<String>,
}

#[derive(Debug, Args)]
struct PreviewArgs {
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// Comma-separated betas.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PseudoFilterArgs {
    /// Directory of prediction files (`class cx cy w h confidence`).
    #[arg(long)]
    preds: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    confidence: Option<f64>,
}

#[derive(Debug, Args)]
struct SslCompileArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory of pseudo-label files; enables mixed.tsv.
    #[arg(long)]
    pseudo: Option<PathBuf>,
    /// Share of train records keeping ground truth.
    #[arg(long)]
    fraction: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    preds: Option<PathBuf>,
    #[arg(long)]
    gts: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Collects `(config key, value)` pairs for the flags that were given.
#[derive(Default)]
struct Overrides(Vec<(&'static str, String)>);

impl Overrides {
    fn opt<T: ToString>(&mut self, key: &'static str, v: &Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.to_string()));
        }
        self
    }

    fn path(&mut self, key: &'static str, v: &Option<PathBuf>) -> &mut Self {
        let s = v.as_ref().map(|p| p.display().to_string());
        self.opt(key, &s)
    }

    fn list(&mut self, key: &'static str, v: &[String]) -> &mut Self {
        if !v.is_empty() {
            self.0.push((key, v.join(",")));
        }
        self
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Merge(_) => "merge",
            Command::Stats(_) => "stats",
            Command::Rebalance(_) => "rebalance",
            Command::Split(_) => "split",
            Command::Fog(_) => "fog",
            Command::Rain(_) => "rain",
            Command::Fda(_) => "fda",
            Command::Preview(_) => "preview",
            Command::PseudoFilter(_) => "pseudo-filter",
            Command::SslCompile(_) => "ssl-compile",
            Command::Eval(_) => "eval",
        }
    }

    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        match self {
            Command::Merge(a) => {
                o.list("paths.sources", &a.sources)
                    .list("paths.taxonomies", &a.taxonomies)
                    .path("paths.out", &a.out);
            }
            Command::Stats(a) => {
                o.path("paths.manifest", &a.manifest).path("paths.out", &a.out);
            }
            Command::Rebalance(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.out", &a.out)
                    .opt("rebalance.target", &a.target);
            }
            Command::Split(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.out", &a.out)
                    .opt("split.train", &a.train)
                    .opt("split.val", &a.val)
                    .opt("split.test", &a.test)
                    .opt("output.width", &a.width)
                    .opt("output.height", &a.height);
            }
            Command::Fog(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.out", &a.out)
                    .opt("fog.lambda", &a.lambda)
                    .opt("fog.airlight", &a.airlight)
                    .opt("fog.depth", &a.depth);
            }
            Command::Rain(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.out", &a.out)
                    .opt("rain.noise", &a.noise)
                    .opt("rain.alpha", &a.alpha)
                    .opt("rain.thickness", &a.thickness);
            }
            Command::Fda(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.targets", &a.targets)
                    .path("paths.out", &a.out)
                    .opt("fda.beta", &a.beta)
                    .opt("fda.order", &a.order)
                    .opt("fda.resize", &a.resize.then_some(true));
            }
            Command::Preview(a) => {
                o.path("paths.image", &a.image)
                    .path("paths.target_image", &a.target)
                    .path("paths.out", &a.out)
                    .opt("preview.betas", &a.betas);
            }
            Command::PseudoFilter(a) => {
                o.path("paths.preds", &a.preds)
                    .path("paths.out", &a.out)
                    .opt("ssl.confidence", &a.confidence);
            }
            Command::SslCompile(a) => {
                o.path("paths.manifest", &a.manifest)
                    .path("paths.out", &a.out)
                    .path("paths.pseudo", &a.pseudo)
                    .opt("ssl.labeled_fraction", &a.fraction);
            }
            Command::Eval(a) => {
                o.path("paths.preds", &a.preds)
                    .path("paths.gts", &a.gts)
                    .path("paths.out", &a.out);
            }
        }
        o
    }
}

/// Defaults, then the config file, then `--set`, then dedicated flags.
fn resolve(cli: &Cli) -> CliResult<RawConfig> {
    let mut raw = RawConfig::default();
    let file = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    if let Some(path) = file {
        raw.merge_file(&path)?;
    }
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        raw.set(k.trim(), v.trim())?;
    }
    let mut o = cli.command.overrides();
    o.opt("general.seed", &cli.seed).opt("general.jobs", &cli.jobs);
    for (k, v) in o.0 {
        raw.set(k, v)?;
    }
    Ok(raw)
}

fn init_logging() {
    let env = env_logger::Env::default().default_filter_or("warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|raw| {
        let cfg = PipelineConfig::from_raw(&raw)?;
        commands::dispatch(cli.command.name(), &cfg, &raw)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fdakit {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use fdakit::dataset::{
    class_statistics, list_images, materialize_copy, merge_datasets, plan_rebalance, resize_with_labels,
    serialize_labels, split_dataset, yellow_flags, Manifest, ManifestRecord, Provenance, SourceDataset, Split,
    TaxonomyMap,
};
use fdakit::metrics::{
    evaluate, format_report_table, iou_thresholds_50_95, load_evaluation_pair, parse_predictions, pr_curves_to_tsv,
    report_to_tsv, text_files_by_stem,
};
use fdakit::pseudo::{audit_log, compile_mixed_manifest, filter_with_audit, partition_train, FilterAudit};
use fdakit::raster::RasterImage;
use fdakit::resample::resize_bicubic;
use fdakit::seed::{derive_seed, rng_from_seed};
use fdakit::spectral::fda_transfer;
use fdakit::weather::{apply_fog, apply_rain, RainParams};
use fdakit::Image;
use rand::Rng;

use crate::config::{FdaOrder, PipelineConfig, RawConfig};
use crate::error::{CliError, CliResult};
use crate::RECORD_FILE;

pub fn dispatch(command: &str, cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    match command {
        "merge" => merge(cfg, raw),
        "stats" => stats(cfg, raw),
        "rebalance" => rebalance(cfg, raw),
        "split" => split(cfg, raw),
        "fog" => weather(cfg, raw, false),
        "rain" => weather(cfg, raw, true),
        "fda" => fda(cfg, raw),
        "preview" => preview(cfg, raw),
        "pseudo-filter" => pseudo_filter(cfg, raw),
        "ssl-compile" => ssl_compile(cfg, raw),
        "eval" => eval(cfg, raw),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

fn mkdir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Config snapshot plus seed and version; feeding it back with `--config`
/// repeats the run.
fn write_record(out: &Path, command: &str, cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let text = format!(
        "# fdakit {} reproducibility record\n# command = {command}\n# seed = {}\n\n{}",
        fdakit::VERSION,
        cfg.seed,
        raw.to_text()
    );
    write(&out.join(RECORD_FILE), text)
}

fn pool(cfg: &PipelineConfig) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("general.jobs: {e}")))
}

/// Maps `f` over `items` on the worker pool; results keep input order.
fn par_map<T: Sync, R: Send>(
    cfg: &PipelineConfig,
    items: &[T],
    f: impl Fn(&T) -> CliResult<R> + Sync + Send,
) -> CliResult<Vec<R>> {
    pool(cfg)?.install(|| items.par_iter().map(f).collect())
}

fn out_dir(cfg: &PipelineConfig) -> CliResult<PathBuf> {
    let out = cfg.require("paths.out", &cfg.paths.out)?;
    mkdir(&out)?;
    Ok(out)
}

fn load_manifest(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let path = cfg.require_existing("paths.manifest", &cfg.paths.manifest)?;
    Ok(Manifest::load(path)?)
}

fn unique_stems(records: &[ManifestRecord]) -> CliResult<()> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.stem()) {
            return Err(CliError::Data(format!(
                "two records share the file stem `{}`; output names would collide",
                r.stem()
            )));
        }
    }
    Ok(())
}

fn merge(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    if cfg.paths.sources.is_empty() {
        return Err(CliError::Validation("paths.sources is required (--source TAG=DIR)".into()));
    }
    let mut sources = Vec::new();
    for (tag, root) in &cfg.paths.sources {
        if !root.is_dir() {
            return Err(CliError::Validation(format!(
                "paths.sources: {} does not exist",
                root.display()
            )));
        }
        let taxonomy = match cfg.paths.taxonomies.iter().find(|(t, _)| t == tag) {
            Some((_, file)) => TaxonomyMap::load(file)?,
            None => TaxonomyMap::builtin(tag).ok_or_else(|| {
                CliError::Validation(format!(
                    "paths.taxonomies: no taxonomy for source `{tag}` (built-ins: lisa, s2tld)"
                ))
            })?,
        };
        sources.push(SourceDataset { tag: tag.clone(), root: root.clone(), taxonomy });
    }
    let out = out_dir(cfg)?;
    let manifest = merge_datasets(&sources, &out)?;
    manifest.save(out.join("manifest.tsv"))?;
    let labels = manifest.read_all_labels()?;
    let stats = class_statistics(labels.iter().map(Vec::as_slice));
    write(&out.join("stats.txt"), stats.to_string())?;
    write_record(&out, "merge", cfg, raw)?;
    print!("{stats}");
    Ok(())
}

fn stats(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let manifest = load_manifest(cfg)?;
    let labels = manifest.read_all_labels()?;
    let stats = class_statistics(labels.iter().map(Vec::as_slice));
    if cfg.paths.out.is_some() {
        let out = out_dir(cfg)?;
        write(&out.join("stats.txt"), stats.to_string())?;
        write_record(&out, "stats", cfg, raw)?;
    }
    print!("{stats}");
    Ok(())
}

fn rebalance(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let manifest = load_manifest(cfg)?;
    unique_stems(&manifest.records)?;
    let labels = manifest.read_all_labels()?;
    let plan = plan_rebalance(&yellow_flags(&labels), cfg.yellow_fraction, cfg.seed)?;
    let out = out_dir(cfg)?;
    mkdir(&out.join("images"))?;
    mkdir(&out.join("labels"))?;
    let copies = par_map(cfg, &plan, |copy| Ok(materialize_copy(&manifest, copy, &cfg.augment, &out)?))?;
    let yellow = yellow_flags(&labels).iter().filter(|y| **y).count() + copies.len();
    let mut records = manifest.records.clone();
    records.extend(copies);
    let total = records.len();
    let balanced = Manifest::new(records)?;
    balanced.save(out.join("manifest.tsv"))?;
    write_record(&out, "rebalance", cfg, raw)?;
    println!(
        "added {} augmented copies; yellow images {yellow}/{total} ({:.2}%)",
        plan.len(),
        100.0 * yellow as f64 / total as f64
    );
    Ok(())
}

fn split(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let manifest = load_manifest(cfg)?;
    unique_stems(&manifest.records)?;
    let assigned = split_dataset(&manifest, cfg.split_ratios, cfg.seed)?;
    let out = out_dir(cfg)?;
    for s in Split::ASSIGNED {
        mkdir(&out.join(s.as_str()).join("images"))?;
        mkdir(&out.join(s.as_str()).join("labels"))?;
    }
    let (h, w) = cfg.output_size;
    let records = par_map(cfg, &assigned.records, |r| {
        let dir = out.join(r.split.as_str());
        let image = RasterImage::<f64>::load(&r.image)?;
        let (resized, anns) = resize_with_labels(&image, &r.read_labels()?, h, w)?;
        let img_path = dir.join("images").join(format!("{}.png", r.stem()));
        let label_path = dir.join("labels").join(format!("{}.txt", r.stem()));
        resized.save(&img_path)?;
        write(&label_path, serialize_labels(&anns))?;
        Ok(ManifestRecord { image: img_path, label: label_path, provenance: r.provenance, split: r.split })
    })?;
    let result = Manifest::new(records)?;
    result.save(out.join("manifest.tsv"))?;
    write_record(&out, "split", cfg, raw)?;
    let [train, val, test, _] = result.split_counts();
    println!("train {train}, val {val}, test {test}");
    Ok(())
}

/// Copies the label file unchanged next to a derived image.
fn carry_label(r: &ManifestRecord, out: &Path) -> CliResult<PathBuf> {
    let dst = out.join("labels").join(format!("{}.txt", r.stem()));
    std::fs::copy(&r.label, &dst).map_err(|e| CliError::io(&r.label, e))?;
    Ok(dst)
}

fn weather(cfg: &PipelineConfig, raw: &RawConfig, rain: bool) -> CliResult<()> {
    let command = if rain { "rain" } else { "fog" };
    let manifest = load_manifest(cfg)?;
    unique_stems(&manifest.records)?;
    let out = out_dir(cfg)?;
    mkdir(&out.join("images"))?;
    mkdir(&out.join("labels"))?;
    let records = par_map(cfg, &manifest.records, |r| {
        let image = RasterImage::<f64>::load(&r.image)?;
        let result = if rain {
            let seed = derive_seed(cfg.seed, &format!("rain/{}", r.stem()));
            apply_rain(&image, &RainParams { seed, ..cfg.rain })?
        } else {
            apply_fog(&image, &cfg.fog)?
        };
        let img_path = out.join("images").join(format!("{}.png", r.stem()));
        result.save(&img_path)?;
        let label = carry_label(r, &out)?;
        Ok(ManifestRecord { image: img_path, label, provenance: Provenance::Weather, split: r.split })
    })?;
    Manifest::new(records)?.save(out.join("manifest.tsv"))?;
    write_record(&out, command, cfg, raw)?;
    println!("{command}: wrote {} images", manifest.len());
    Ok(())
}

fn fda(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let manifest = load_manifest(cfg)?;
    unique_stems(&manifest.records)?;
    let targets_dir = cfg.require_existing("paths.targets", &cfg.paths.targets)?;
    let targets = list_images(&targets_dir)?;
    if targets.is_empty() {
        return Err(CliError::Data(format!("no target images in {}", targets_dir.display())));
    }
    let out = out_dir(cfg)?;
    mkdir(&out.join("images"))?;
    mkdir(&out.join("labels"))?;
    let (h, w) = cfg.output_size;
    let results = par_map(cfg, &manifest.records, |r| {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &format!("fda/target/{}", r.stem())));
        let target_path = &targets[rng.random_range(0..targets.len())];
        let source: Image = RasterImage::load(&r.image)?;
        let target: Image = RasterImage::load(target_path)?;
        let adapted = match (cfg.fda_resize, cfg.fda_order) {
            (false, _) => fda_transfer(&source, &target, cfg.beta)?,
            (true, FdaOrder::ResizeThenFda) => fda_transfer(&resize_bicubic(&source, h, w)?, &target, cfg.beta)?,
            (true, FdaOrder::FdaThenResize) => resize_bicubic(&fda_transfer(&source, &target, cfg.beta)?, h, w)?,
        };
        let img_path = out.join("images").join(format!("{}.png", r.stem()));
        adapted.save(&img_path)?;
        let label = carry_label(r, &out)?;
        let pairing = format!("images/{}.png\t{}\n", r.stem(), target_path.display());
        Ok((ManifestRecord { image: img_path, label, provenance: Provenance::Fda, split: r.split }, pairing))
    })?;
    let (records, pairs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    write(&out.join("pairing.tsv"), format!("image\ttarget\n{}", pairs.concat()))?;
    Manifest::new(records)?.save(out.join("manifest.tsv"))?;
    write_record(&out, "fda", cfg, raw)?;
    println!("fda: adapted {} images at beta {}", manifest.len(), cfg.beta);
    Ok(())
}

/// Original on the left, then one FDA result per beta.
pub fn contact_sheet(source: &Image, target: &Image, betas: &[f64]) -> CliResult<Image> {
    let (h, w) = source.dims();
    let mut panels = vec![source.clone()];
    for &beta in betas {
        panels.push(fda_transfer(source, target, beta)?);
    }
    let n = panels.len();
    let planes: [Vec<f64>; 3] = std::array::from_fn(|c| {
        let mut plane = vec![0.0; h * w * n];
        for (k, panel) in panels.iter().enumerate() {
            let src = panel.channel(c);
            for r in 0..h {
                plane[r * w * n + k * w..r * w * n + (k + 1) * w].copy_from_slice(&src[r * w..(r + 1) * w]);
            }
        }
        plane
    });
    Ok(RasterImage::from_planes(h, w * n, planes)?)
}

fn preview(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let image = cfg.require_existing("paths.image", &cfg.paths.image)?;
    let target = cfg.require_existing("paths.target_image", &cfg.paths.target_image)?;
    let sheet = contact_sheet(&RasterImage::load(&image)?, &RasterImage::load(&target)?, &cfg.preview_betas)?;
    let out = out_dir(cfg)?;
    sheet.save(out.join("preview.png"))?;
    write_record(&out, "preview", cfg, raw)?;
    println!("preview: {} panels", cfg.preview_betas.len() + 1);
    Ok(())
}

fn pseudo_filter(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let preds_dir = cfg.require_existing("paths.preds", &cfg.paths.preds)?;
    let files: Vec<(String, PathBuf)> = text_files_by_stem(&preds_dir)?.into_iter().collect();
    let out = out_dir(cfg)?;
    mkdir(&out.join("labels"))?;
    let audits: Vec<FilterAudit> = par_map(cfg, &files, |(stem, path)| {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let preds = parse_predictions(&text, stem).map_err(|e| e.with_source_name(path.display().to_string()))?;
        let (kept, audit) = filter_with_audit(&preds, &cfg.ssl, stem);
        write(&out.join("labels").join(format!("{stem}.txt")), serialize_labels(&kept))?;
        Ok(audit)
    })?;
    write(&out.join("audit.tsv"), audit_log(&audits))?;
    write_record(&out, "pseudo-filter", cfg, raw)?;
    let kept: usize = audits.iter().map(|a| a.kept).sum();
    let dropped: usize = audits.iter().map(|a| a.dropped).sum();
    println!("pseudo-filter: kept {kept}, dropped {dropped} over {} files", audits.len());
    Ok(())
}

fn ssl_compile(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let full = load_manifest(cfg)?;
    let out = out_dir(cfg)?;
    let pick = |idx: &[usize]| Manifest { records: idx.iter().map(|&i| full.records[i].clone()).collect() };
    let (labeled, unlabeled) = match &cfg.paths.pseudo {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(CliError::Validation(format!("paths.pseudo: {} does not exist", dir.display())));
            }
            let ssl = compile_mixed_manifest(&full, &cfg.ssl, dir)?;
            ssl.mixed.save(out.join("mixed.tsv"))?;
            (ssl.labeled, ssl.unlabeled)
        }
        None => {
            let (a, b) = partition_train(&full, &cfg.ssl)?;
            (pick(&a), pick(&b))
        }
    };
    labeled.save(out.join("labeled.tsv"))?;
    unlabeled.save(out.join("unlabeled.tsv"))?;
    write_record(&out, "ssl-compile", cfg, raw)?;
    if cfg.paths.pseudo.is_none() {
        warn!("no pseudo-label directory given; mixed.tsv not written");
    }
    println!("ssl-compile: {} labeled, {} unlabeled train records", labeled.len(), unlabeled.len());
    Ok(())
}

fn eval(cfg: &PipelineConfig, raw: &RawConfig) -> CliResult<()> {
    let preds_dir = cfg.require_existing("paths.preds", &cfg.paths.preds)?;
    let gts_dir = cfg.require_existing("paths.gts", &cfg.paths.gts)?;
    let (preds, gts) = load_evaluation_pair(&preds_dir, &gts_dir)?;
    info!("evaluating {} predictions against {} boxes", preds.len(), gts.len());
    let report = evaluate(&preds, &gts, &iou_thresholds_50_95())?;
    if cfg.paths.out.is_some() {
        let out = out_dir(cfg)?;
        write(&out.join("metrics.tsv"), report_to_tsv(&report))?;
        write(&out.join("pr_curves.tsv"), pr_curves_to_tsv(&report))?;
        write_record(&out, "eval", cfg, raw)?;
    }
    print!("{}", format_report_table(&report));
    Ok(())
}

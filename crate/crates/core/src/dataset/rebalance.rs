//! Oversampling of yellow-light images up to a target image-presence fraction.

use std::path::Path;

use rand::seq::SliceRandom;

use super::augment::{apply_plan, sample_plan, AugSpec};
use super::labels::{serialize_labels, Annotation, LightClass};
use super::manifest::{Manifest, ManifestRecord, Provenance};
use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::seed::{derive_seed, rng_from_seed};

/// Fraction of yellow-containing images the rebalanced dataset aims for.
pub const DEFAULT_YELLOW_FRACTION: f64 = 0.13;

/// Smallest `k >= 0` with `(yellow + k) / (total + k) >= target`.
pub fn minimal_copies(yellow: usize, total: usize, target: f64) -> usize {
    let reached = |k: usize| (yellow + k) as f64 >= target * (total + k) as f64;
    let estimate = ((target * total as f64 - yellow as f64) / (1.0 - target)).ceil();
    let mut k = if estimate.is_finite() && estimate > 0.0 {
        estimate as usize
    } else {
        0
    };
    while !reached(k) {
        k += 1;
    }
    while k > 0 && reached(k - 1) {
        k -= 1;
    }
    k
}

/// One augmented duplicate to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedCopy {
    /// Index of the source record in the manifest.
    pub source: usize,
    /// Running copy number, used in output names.
    pub copy: usize,
    pub seed: u64,
}

/// Decides which yellow images to duplicate. Sources are visited round-robin
/// in a seeded shuffled order so copies spread evenly.
pub fn plan_rebalance(has_yellow: &[bool], target_fraction: f64, seed: u64) -> Result<Vec<PlannedCopy>> {
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::param(
            "target_fraction",
            format!("{target_fraction} must lie in (0, 1)"),
        ));
    }
    let mut yellow: Vec<usize> = has_yellow
        .iter()
        .enumerate()
        .filter_map(|(i, y)| y.then_some(i))
        .collect();
    if yellow.is_empty() {
        return Err(Error::Rebalance("no image contains a yellow light".into()));
    }
    let k = minimal_copies(yellow.len(), has_yellow.len(), target_fraction);
    yellow.shuffle(&mut rng_from_seed(derive_seed(seed, "rebalance/order")));
    Ok((0..k)
        .map(|copy| PlannedCopy {
            source: yellow[copy % yellow.len()],
            copy,
            seed: derive_seed(seed, &format!("rebalance/copy/{copy}")),
        })
        .collect())
}

/// Output image and label paths for a planned copy under `out_dir`.
pub fn copy_paths(record: &ManifestRecord, copy: &PlannedCopy, out_dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let name = format!("{}_aug{:05}", record.stem(), copy.copy);
    (
        out_dir.join("images").join(format!("{name}.png")),
        out_dir.join("labels").join(format!("{name}.txt")),
    )
}

/// Produces one augmented copy in memory. At least one transform is always applied.
pub fn augment_copy(
    image: &RasterImage<f64>,
    annotations: &[Annotation],
    spec: &AugSpec,
    copy: &PlannedCopy,
) -> Result<(RasterImage<f64>, Vec<Annotation>)> {
    let mut rng = rng_from_seed(copy.seed);
    let plan = sample_plan(spec, &mut rng, true)?;
    let out = apply_plan(image, annotations, &plan);
    Ok((out.image, out.annotations))
}

/// Reads the source, augments it and writes image and label files.
pub fn materialize_copy(
    manifest: &Manifest,
    copy: &PlannedCopy,
    spec: &AugSpec,
    out_dir: &Path,
) -> Result<ManifestRecord> {
    let record = &manifest.records[copy.source];
    let image = RasterImage::<f64>::load(&record.image)?;
    let anns = record.read_labels()?;
    let (img, out_anns) = augment_copy(&image, &anns, spec, copy)?;
    let (img_path, label_path) = copy_paths(record, copy, out_dir);
    img.save(&img_path)?;
    std::fs::write(&label_path, serialize_labels(&out_anns)).map_err(|e| Error::io(&label_path, e))?;
    Ok(ManifestRecord {
        image: img_path,
        label: label_path,
        provenance: Provenance::Augmented,
        split: record.split,
    })
}

/// Yellow-presence flags for every record.
pub fn yellow_flags(labels: &[Vec<Annotation>]) -> Vec<bool> {
    labels
        .iter()
        .map(|anns| anns.iter().any(|a| a.class == LightClass::Yellow))
        .collect()
}

/// Appends augmented yellow duplicates until the yellow image fraction
/// reaches `target_fraction`. Original records are kept as they are.
pub fn rebalance_yellow(
    manifest: &Manifest,
    target_fraction: f64,
    spec: &AugSpec,
    seed: u64,
    out_dir: &Path,
) -> Result<Manifest> {
    let labels = manifest.read_all_labels()?;
    let plan = plan_rebalance(&yellow_flags(&labels), target_fraction, seed)?;
    for sub in ["images", "labels"] {
        let dir = out_dir.join(sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let mut records = manifest.records.clone();
    for copy in &plan {
        records.push(materialize_copy(manifest, copy, spec, out_dir)?);
    }
    Manifest::new(records)
}

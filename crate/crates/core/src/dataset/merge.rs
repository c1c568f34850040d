//! Merging source datasets into one three-class dataset.
//!
//! A source directory holds `images/` and `labels/` trees with matching file
//! stems; label lines carry the source's own class name (`name cx cy w h`).

use std::path::{Path, PathBuf};

use super::labels::{parse_raw_labels, serialize_labels};
use super::manifest::{Manifest, ManifestRecord, Provenance};
use super::taxonomy::{map_raw_annotations, TaxonomyMap};
use crate::error::{Error, Result};

pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone)]
pub struct SourceDataset {
    /// Prefix for output file names, keeps stems unique across sources.
    pub tag: String,
    pub root: PathBuf,
    pub taxonomy: TaxonomyMap,
}

/// Image files directly under `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Copies every image of every source into `out_dir/images`, writes mapped
/// label files into `out_dir/labels` and returns the merged manifest.
/// Images keep their bytes; images whose boxes are all excluded stay in as
/// background images.
pub fn merge_datasets(sources: &[SourceDataset], out_dir: &Path) -> Result<Manifest> {
    let images_dir = out_dir.join("images");
    let labels_dir = out_dir.join("labels");
    for dir in [&images_dir, &labels_dir] {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut records = Vec::new();
    for src in sources {
        for image in list_images(&src.root.join("images"))? {
            let stem = image.file_stem().unwrap_or_default().to_string_lossy();
            let label = src.root.join("labels").join(format!("{stem}.txt"));
            let text = std::fs::read_to_string(&label).map_err(|e| Error::io(&label, e))?;
            let raw = parse_raw_labels(&text).map_err(|e| e.with_source_name(label.display().to_string()))?;
            let anns = map_raw_annotations(&raw, &src.taxonomy)
                .map_err(|e| Error::Taxonomy(format!("{}: {e}", label.display())))?;

            let file_name = image.file_name().unwrap_or_default().to_string_lossy();
            let out_image = images_dir.join(format!("{}_{file_name}", src.tag));
            let out_label = labels_dir.join(format!("{}_{stem}.txt", src.tag));
            std::fs::copy(&image, &out_image).map_err(|e| Error::io(&image, e))?;
            std::fs::write(&out_label, serialize_labels(&anns)).map_err(|e| Error::io(&out_label, e))?;
            records.push(ManifestRecord::new(out_image, out_label, Provenance::Original));
        }
    }
    Manifest::new(records)
}

//! Source-domain dataset construction: labels, taxonomies, manifests,
//! statistics, box-aware augmentation, yellow rebalancing and splitting.

mod augment;
mod labels;
mod manifest;
mod merge;
mod rebalance;
mod split;
mod stats;
mod taxonomy;

pub use augment::{
    apply_plan, augment_image, box_blur, resize_with_labels, sample_plan, shear_annotation,
    shear_point, AugPlan, AugSpec, Augmented,
};
pub use labels::{parse_labels, parse_raw_labels, serialize_labels, Annotation, LightClass, RawAnnotation};
pub use manifest::{Manifest, ManifestRecord, Provenance, Split};
pub use merge::{list_images, merge_datasets, SourceDataset, IMAGE_EXTENSIONS};
pub use rebalance::{
    augment_copy, copy_paths, materialize_copy, minimal_copies, plan_rebalance, rebalance_yellow,
    yellow_flags, PlannedCopy, DEFAULT_YELLOW_FRACTION,
};
pub use split::{split_counts, split_dataset, DEFAULT_SPLIT_RATIOS};
pub use stats::{class_statistics, ClassStatistics};
pub use taxonomy::{map_class, map_raw_annotations, TaxonomyMap, LISA_TAXONOMY, S2TLD_TAXONOMY};

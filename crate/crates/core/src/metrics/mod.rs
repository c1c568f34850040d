//! Detection metrics: IoU, greedy confidence-ordered matching, all-point
//! interpolated AP, and the precision / recall / mAP50 / mAP50-95 report.

mod ap;
mod boxes;
mod evaluate;
mod io;

pub use ap::{average_precision, match_detections, pr_curve, PrPoint};
pub use boxes::{iou, BBox, DetectionRecord, GroundTruthRecord};
pub use evaluate::{evaluate, iou_thresholds_50_95, AggregateMetrics, ClassMetrics, MetricsReport};
pub use io::{
    format_report_table, load_evaluation_pair, load_ground_truth_dir, load_predictions_dir,
    parse_predictions, pr_curves_to_tsv, report_to_tsv, serialize_predictions, text_files_by_stem,
};

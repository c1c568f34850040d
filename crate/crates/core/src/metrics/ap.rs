use super::boxes::{iou, BBox};
use crate::scalar::Scalar;

/// Indices ordered by descending confidence; equal confidences keep input order.
pub(crate) fn confidence_order<T: Scalar>(confidences: impl Iterator<Item = T>) -> Vec<usize> {
    let conf: Vec<T> = confidences.collect();
    let mut order: Vec<usize> = (0..conf.len()).collect();
    order.sort_by(|&a, &b| conf[b].partial_cmp(&conf[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Greedy matching within one image and class.
///
/// Predictions are visited by descending confidence; each takes the unmatched
/// ground truth with the highest IoU at or above `iou_threshold` (lowest
/// index on ties). Returns TP flags in the predictions' input order.
pub fn match_detections<T: Scalar>(preds: &[(BBox<T>, T)], gts: &[BBox<T>], iou_threshold: T) -> Vec<bool> {
    let mut used = vec![false; gts.len()];
    let mut flags = vec![false; preds.len()];
    for i in confidence_order(preds.iter().map(|p| p.1)) {
        let mut best: Option<(usize, T)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] {
                continue;
            }
            let o = iou(&preds[i].0, gt);
            if o >= iou_threshold && best.is_none_or(|(_, b)| o > b) {
                best = Some((g, o));
            }
        }
        if let Some((g, _)) = best {
            used[g] = true;
            flags[i] = true;
        }
    }
    flags
}

/// One point of the precision-recall curve, after the prediction at `rank`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint<T> {
    pub confidence: T,
    pub precision: T,
    pub recall: T,
    pub tp: usize,
    pub fp: usize,
}

/// Cumulative precision/recall over predictions sorted by descending confidence.
pub fn pr_curve<T: Scalar>(flags: &[(bool, T)], num_gt: usize) -> Vec<PrPoint<T>> {
    let mut tp = 0;
    let mut fp = 0;
    confidence_order(flags.iter().map(|f| f.1))
        .into_iter()
        .map(|i| {
            if flags[i].0 {
                tp += 1;
            } else {
                fp += 1;
            }
            PrPoint {
                confidence: flags[i].1,
                precision: T::from_count(tp) / T::from_count(tp + fp),
                recall: if num_gt == 0 {
                    T::zero()
                } else {
                    T::from_count(tp) / T::from_count(num_gt)
                },
                tp,
                fp,
            }
        })
        .collect()
}

/// All-point interpolated average precision.
///
/// The precision envelope is made non-increasing in recall and integrated
/// over the recall steps. `None` when there is neither ground truth nor a
/// prediction (the class is excluded from averages); 0 when predictions
/// exist without ground truth.
pub fn average_precision<T: Scalar>(flags: &[(bool, T)], num_gt: usize) -> Option<T> {
    if num_gt == 0 {
        return if flags.is_empty() { None } else { Some(T::zero()) };
    }
    let curve = pr_curve(flags, num_gt);
    let mut envelope: Vec<T> = curve.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = T::zero();
    let mut prev_recall = T::zero();
    for (p, env) in curve.iter().zip(envelope) {
        if p.recall > prev_recall {
            ap = ap + (p.recall - prev_recall) * env;
            prev_recall = p.recall;
        }
    }
    Some(ap)
}

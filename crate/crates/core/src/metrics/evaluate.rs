use std::collections::BTreeMap;

use super::ap::{average_precision, match_detections, pr_curve, PrPoint};
use super::boxes::{BBox, DetectionRecord, GroundTruthRecord};
use crate::dataset::LightClass;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn iou_thresholds_50_95<T: Scalar>() -> Vec<T> {
    (0..10).map(|i| T::lit(0.5 + 0.05 * i as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics<T> {
    pub class: LightClass,
    pub num_gt: usize,
    pub num_pred: usize,
    /// TP/FP counts at the reported operating point.
    pub tp: usize,
    pub fp: usize,
    /// Confidence cut of the operating point (max F1 at IoU 0.5); `None` without predictions.
    pub confidence_threshold: Option<T>,
    pub precision: T,
    pub recall: T,
    pub ap50: T,
    pub ap50_95: T,
    /// AP at each requested IoU threshold.
    pub ap_per_threshold: Vec<T>,
    /// PR curve at IoU 0.5.
    pub pr_curve: Vec<PrPoint<T>>,
    /// False when the class has neither ground truth nor predictions.
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics<T> {
    pub num_gt: usize,
    pub tp: usize,
    pub fp: usize,
    pub precision: T,
    pub recall: T,
    pub ap50: T,
    pub ap50_95: T,
    /// Number of classes contributing to the macro averages.
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    /// Red, green, yellow in that order.
    pub classes: Vec<ClassMetrics<T>>,
    pub all: AggregateMetrics<T>,
    pub iou_thresholds: Vec<T>,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn class(&self, class: LightClass) -> &ClassMetrics<T> {
        &self.classes[class.index()]
    }
}

type PerImage<T> = BTreeMap<String, (Vec<(BBox<T>, T)>, Vec<BBox<T>>)>;

/// TP flags with confidences for one class at one IoU threshold, across images.
fn class_flags<T: Scalar>(images: &PerImage<T>, threshold: T) -> Vec<(bool, T)> {
    let mut out = Vec::new();
    for (preds, gts) in images.values() {
        let flags = match_detections(preds, gts, threshold);
        out.extend(flags.into_iter().zip(preds.iter().map(|p| p.1)));
    }
    out
}

/// Max-F1 cut of the curve, only between distinct confidences.
fn operating_point<T: Scalar>(curve: &[PrPoint<T>]) -> Option<PrPoint<T>> {
    let mut best: Option<(T, PrPoint<T>)> = None;
    for (i, p) in curve.iter().enumerate() {
        if curve.get(i + 1).is_some_and(|next| next.confidence == p.confidence) {
            continue;
        }
        let denom = p.precision + p.recall;
        let f1 = if denom > T::zero() {
            T::lit(2.0) * p.precision * p.recall / denom
        } else {
            T::zero()
        };
        if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
            best = Some((f1, *p));
        }
    }
    best.map(|(_, p)| p)
}

/// Precision, recall, AP50 and AP averaged over `iou_thresholds`, per class
/// and macro-averaged. P/R are taken at the max-F1 confidence at IoU 0.5.
pub fn evaluate<T: Scalar>(
    preds: &[DetectionRecord<T>],
    gts: &[GroundTruthRecord<T>],
    iou_thresholds: &[T],
) -> Result<MetricsReport<T>> {
    if iou_thresholds.is_empty() {
        return Err(Error::param("iou_thresholds", "at least one threshold is required"));
    }
    if let Some(t) = iou_thresholds.iter().find(|t| !(**t > T::zero() && **t <= T::one())) {
        return Err(Error::param("iou_thresholds", format!("{t} outside (0, 1]")));
    }
    if let Some(p) = preds
        .iter()
        .find(|p| !(p.confidence >= T::zero() && p.confidence <= T::one()))
    {
        return Err(Error::param(
            "confidence",
            format!("{} on image `{}` outside [0, 1]", p.confidence, p.image_id),
        ));
    }

    let half = T::lit(0.5);
    let mut classes = Vec::with_capacity(3);
    for class in LightClass::ALL {
        let mut images: PerImage<T> = BTreeMap::new();
        for g in gts.iter().filter(|g| g.class == class) {
            images.entry(g.image_id.clone()).or_default().1.push(g.bbox);
        }
        for p in preds.iter().filter(|p| p.class == class) {
            images.entry(p.image_id.clone()).or_default().0.push((p.bbox, p.confidence));
        }
        let num_gt = images.values().map(|v| v.1.len()).sum();
        let num_pred = images.values().map(|v| v.0.len()).sum();

        let flags50 = class_flags(&images, half);
        let curve = pr_curve(&flags50, num_gt);
        let ap50 = average_precision(&flags50, num_gt);
        let ap_per_threshold: Vec<T> = iou_thresholds
            .iter()
            .map(|&t| average_precision(&class_flags(&images, t), num_gt).unwrap_or(T::zero()))
            .collect();
        let ap50_95 = ap_per_threshold.iter().fold(T::zero(), |a, b| a + *b)
            / T::from_count(ap_per_threshold.len());
        let op = operating_point(&curve);

        classes.push(ClassMetrics {
            class,
            num_gt,
            num_pred,
            tp: op.map_or(0, |p| p.tp),
            fp: op.map_or(0, |p| p.fp),
            confidence_threshold: op.map(|p| p.confidence),
            precision: op.map_or(T::zero(), |p| p.precision),
            recall: op.map_or(T::zero(), |p| p.recall),
            ap50: ap50.unwrap_or(T::zero()),
            ap50_95,
            ap_per_threshold,
            pr_curve: curve,
            included: ap50.is_some(),
        });
    }

    let included: Vec<&ClassMetrics<T>> = classes.iter().filter(|c| c.included).collect();
    let mean = |f: fn(&ClassMetrics<T>) -> T| {
        if included.is_empty() {
            T::zero()
        } else {
            included.iter().fold(T::zero(), |a, c| a + f(c)) / T::from_count(included.len())
        }
    };
    let all = AggregateMetrics {
        num_gt: classes.iter().map(|c| c.num_gt).sum(),
        tp: classes.iter().map(|c| c.tp).sum(),
        fp: classes.iter().map(|c| c.fp).sum(),
        precision: mean(|c| c.precision),
        recall: mean(|c| c.recall),
        ap50: mean(|c| c.ap50),
        ap50_95: mean(|c| c.ap50_95),
        classes: included.len(),
    };
    Ok(MetricsReport {
        classes,
        all,
        iou_thresholds: iou_thresholds.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(img: &str, class: LightClass, cx: f64) -> GroundTruthRecord<f64> {
        GroundTruthRecord { image_id: img.into(), class, bbox: BBox::new(cx, 0.5, 0.1, 0.2) }
    }

    fn det(g: &GroundTruthRecord<f64>, conf: f64) -> DetectionRecord<f64> {
        DetectionRecord { image_id: g.image_id.clone(), class: g.class, bbox: g.bbox, confidence: conf }
    }

    #[test]
    fn perfect_predictions_score_one() {
        let gts = vec![
            gt("a", LightClass::Red, 0.2),
            gt("a", LightClass::Green, 0.6),
            gt("b", LightClass::Yellow, 0.4),
            gt("b", LightClass::Red, 0.8),
        ];
        let preds: Vec<_> = gts.iter().map(|g| det(g, 1.0)).collect();
        let r = evaluate(&preds, &gts, &iou_thresholds_50_95()).unwrap();
        for c in &r.classes {
            assert_eq!((c.precision, c.recall, c.ap50, c.ap50_95), (1.0, 1.0, 1.0, 1.0));
        }
        assert_eq!(r.all.ap50_95, 1.0);
        assert_eq!(r.all.classes, 3);
    }

    #[test]
    fn no_predictions() {
        let gts = vec![gt("a", LightClass::Red, 0.2)];
        let r = evaluate::<f64>(&[], &gts, &iou_thresholds_50_95()).unwrap();
        let red = r.class(LightClass::Red);
        assert_eq!((red.recall, red.ap50, red.ap50_95), (0.0, 0.0, 0.0));
        assert!(red.included && !r.class(LightClass::Green).included);
        assert_eq!(r.all.classes, 1);
    }

    #[test]
    fn thresholds_are_tenfold() {
        let t = iou_thresholds_50_95::<f64>();
        assert_eq!(t.len(), 10);
        assert!((t[9] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn operating_point_skips_tied_cuts() {
        let mk = |c: f64, tp: usize, fp: usize, p: f64, r: f64| PrPoint { confidence: c, precision: p, recall: r, tp, fp };
        let curve = vec![mk(0.9, 1, 0, 1.0, 0.5), mk(0.9, 1, 1, 0.5, 0.5), mk(0.3, 2, 1, 2.0 / 3.0, 1.0)];
        let op = operating_point(&curve).unwrap();
        assert_eq!(op.tp, 2);
    }

    #[test]
    fn rejects_bad_input() {
        let g = gt("a", LightClass::Red, 0.2);
        assert!(evaluate(&[det(&g, 1.5)], &[g.clone()], &[0.5]).is_err());
        assert!(evaluate::<f64>(&[], &[g], &[]).is_err());
    }
}

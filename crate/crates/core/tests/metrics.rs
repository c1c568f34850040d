mod common;

use fdakit::dataset::LightClass;
use fdakit::metrics::{
    average_precision, evaluate, iou, iou_thresholds_50_95, match_detections, BBox, DetectionRecord,
    GroundTruthRecord, MetricsReport,
};
use fdakit::seed::rng_from_seed;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{random_scene, ref_evaluate, ref_iou, RefBox, RefGt, RefPred};

fn to_bbox(b: &RefBox) -> BBox<f64> {
    BBox::from_corners(b.x1, b.y1, b.x2, b.y2)
}

fn convert(preds: &[RefPred], gts: &[RefGt]) -> (Vec<DetectionRecord<f64>>, Vec<GroundTruthRecord<f64>>) {
    (
        preds
            .iter()
            .map(|p| DetectionRecord {
                image_id: format!("img{}", p.image),
                class: LightClass::ALL[p.class],
                bbox: to_bbox(&p.b),
                confidence: p.conf,
            })
            .collect(),
        gts.iter()
            .map(|g| GroundTruthRecord {
                image_id: format!("img{}", g.image),
                class: LightClass::ALL[g.class],
                bbox: to_bbox(&g.b),
            })
            .collect(),
    )
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn evaluate_matches_reference_on_random_scenes() {
    let mut rng = rng_from_seed(100);
    for scene in 0..300 {
        let (preds, gts) = random_scene(&mut rng, 4);
        let (p, g) = convert(&preds, &gts);
        let report = evaluate(&p, &g, &iou_thresholds_50_95()).unwrap();
        let (classes, all) = ref_evaluate(&preds, &gts);
        for (c, r) in report.classes.iter().zip(&classes) {
            assert_eq!(c.included, r.included, "scene {scene}");
            assert_eq!((c.num_gt, c.tp, c.fp), (r.num_gt, r.tp, r.fp), "scene {scene} {}", c.class);
            assert!(close(c.precision, r.precision), "scene {scene}");
            assert!(close(c.recall, r.recall), "scene {scene}");
            assert!(close(c.ap50, r.ap50), "scene {scene}: {} vs {}", c.ap50, r.ap50);
            assert!(close(c.ap50_95, r.ap50_95), "scene {scene}");
        }
        let a = &report.all;
        assert_eq!((a.num_gt, a.tp, a.fp), (all.num_gt, all.tp, all.fp));
        for (x, y) in [(a.precision, all.precision), (a.recall, all.recall), (a.ap50, all.ap50), (a.ap50_95, all.ap50_95)] {
            assert!(close(x, y), "scene {scene}");
        }
    }
}

#[test]
fn matcher_agrees_with_reference_scan() {
    let mut rng = rng_from_seed(101);
    for _ in 0..500 {
        let n_gt = rng.random_range(0..=5);
        let n_pred = rng.random_range(0..=10);
        let gts: Vec<RefBox> = (0..n_gt)
            .map(|_| RefBox::from_center(rng.random(), rng.random(), rng.random_range(0.1..0.4), rng.random_range(0.1..0.4)))
            .collect();
        let preds: Vec<(RefBox, f64)> = (0..n_pred)
            .map(|_| {
                let b = RefBox::from_center(rng.random(), rng.random(), rng.random_range(0.1..0.4), rng.random_range(0.1..0.4));
                // few distinct values so ties occur
                (b, rng.random_range(0..4) as f64 / 4.0)
            })
            .collect();
        let thr = rng.random_range(0.05..0.9);
        // reference: stable order by confidence, scan all free ground truths
        let mut order: Vec<usize> = (0..n_pred).collect();
        order.sort_by(|&a, &b| preds[b].1.total_cmp(&preds[a].1).then(a.cmp(&b)));
        let mut taken = vec![false; n_gt];
        let mut want = vec![false; n_pred];
        for i in order {
            let mut best = None;
            let mut best_iou = f64::NEG_INFINITY;
            for g in 0..n_gt {
                let o = ref_iou(&preds[i].0, &gts[g]);
                if !taken[g] && o >= thr && o > best_iou {
                    best = Some(g);
                    best_iou = o;
                }
            }
            if let Some(g) = best {
                taken[g] = true;
                want[i] = true;
            }
        }
        let lib_preds: Vec<(BBox<f64>, f64)> = preds.iter().map(|(b, c)| (to_bbox(b), *c)).collect();
        let lib_gts: Vec<BBox<f64>> = gts.iter().map(to_bbox).collect();
        assert_eq!(match_detections(&lib_preds, &lib_gts, thr), want);
    }
}

#[test]
fn hand_cases() {
    let ap = average_precision(&[(true, 0.9f64), (false, 0.8), (true, 0.7)], 2).unwrap();
    assert!((ap - 5.0 / 6.0).abs() < 1e-12);
    let p = BBox::<f64>::from_corners(0.0, 0.0, 2.0, 2.0);
    let q = BBox::from_corners(1.0, 1.0, 3.0, 3.0);
    assert!((iou(&p, &q) - 1.0 / 7.0).abs() < 1e-12);
}

fn gt(img: &str, class: LightClass, cx: f64, cy: f64) -> GroundTruthRecord<f64> {
    GroundTruthRecord { image_id: img.into(), class, bbox: BBox::new(cx, cy, 0.1, 0.2) }
}

#[test]
fn perfect_and_empty_predictions() {
    let gts = vec![
        gt("a", LightClass::Red, 0.2, 0.3),
        gt("a", LightClass::Green, 0.6, 0.3),
        gt("b", LightClass::Yellow, 0.4, 0.6),
        gt("b", LightClass::Red, 0.8, 0.6),
    ];
    let preds: Vec<DetectionRecord<f64>> = gts
        .iter()
        .map(|g| DetectionRecord { image_id: g.image_id.clone(), class: g.class, bbox: g.bbox, confidence: 1.0 })
        .collect();
    let r = evaluate(&preds, &gts, &iou_thresholds_50_95()).unwrap();
    for c in r.classes.iter() {
        assert_eq!((c.precision, c.recall, c.ap50, c.ap50_95), (1.0, 1.0, 1.0, 1.0));
    }
    assert_eq!((r.all.precision, r.all.recall, r.all.ap50, r.all.ap50_95), (1.0, 1.0, 1.0, 1.0));

    let r = evaluate(&[], &gts, &iou_thresholds_50_95()).unwrap();
    for c in &r.classes {
        assert_eq!((c.recall, c.ap50, c.ap50_95), (0.0, 0.0, 0.0));
    }
}

#[test]
fn class_without_gt_or_preds_is_excluded() {
    let gts = vec![gt("a", LightClass::Red, 0.2, 0.3)];
    let preds = vec![DetectionRecord { image_id: "a".into(), class: LightClass::Red, bbox: gts[0].bbox, confidence: 0.8 }];
    let r = evaluate(&preds, &gts, &iou_thresholds_50_95()).unwrap();
    assert_eq!(r.all.classes, 1);
    assert_eq!(r.all.ap50, 1.0);
    assert!(!r.class(LightClass::Green).included);
    // a stray prediction brings the class in with AP 0
    let mut more = preds.clone();
    more.push(DetectionRecord { image_id: "a".into(), class: LightClass::Green, bbox: gts[0].bbox, confidence: 0.3 });
    let r = evaluate(&more, &gts, &iou_thresholds_50_95()).unwrap();
    assert_eq!(r.all.classes, 2);
    assert_eq!(r.all.ap50, 0.5);
}

fn scene_records(seed: u64) -> (Vec<DetectionRecord<f64>>, Vec<GroundTruthRecord<f64>>) {
    let mut rng = rng_from_seed(seed);
    let (p, g) = random_scene(&mut rng, 3);
    convert(&p, &g)
}

fn assert_reports_close(a: &MetricsReport<f64>, b: &MetricsReport<f64>, tol: f64) -> Result<(), TestCaseError> {
    for (x, y) in a.classes.iter().zip(&b.classes) {
        prop_assert_eq!((x.tp, x.fp, x.num_gt, x.included), (y.tp, y.fp, y.num_gt, y.included));
        for (u, v) in [(x.precision, y.precision), (x.recall, y.recall), (x.ap50, y.ap50), (x.ap50_95, y.ap50_95)] {
            prop_assert!((u - v).abs() <= tol, "{} vs {}", u, v);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn report_ignores_prediction_order(seed in any::<u64>()) {
        let (mut p, g) = scene_records(seed);
        let a = evaluate(&p, &g, &iou_thresholds_50_95()).unwrap();
        p.shuffle(&mut rng_from_seed(seed ^ 1));
        let b = evaluate(&p, &g, &iou_thresholds_50_95()).unwrap();
        assert_reports_close(&a, &b, 0.0)?;
    }

    #[test]
    fn report_is_scale_invariant(seed in any::<u64>(), s in prop::sample::select(vec![0.5, 0.25, 2.0, 4.0])) {
        // powers of two keep every corner and IoU bit-exact
        let (p, g) = scene_records(seed);
        let a = evaluate(&p, &g, &iou_thresholds_50_95()).unwrap();
        let ps: Vec<_> = p.iter().map(|d| DetectionRecord { bbox: d.bbox.scaled(s), ..d.clone() }).collect();
        let gs: Vec<_> = g.iter().map(|d| GroundTruthRecord { bbox: d.bbox.scaled(s), ..d.clone() }).collect();
        let b = evaluate(&ps, &gs, &iou_thresholds_50_95()).unwrap();
        assert_reports_close(&a, &b, 0.0)?;
    }

    #[test]
    fn dropping_low_confidence_never_raises_recall(seed in any::<u64>(), cut in 0.0f64..1.0) {
        let (p, g) = scene_records(seed);
        let a = evaluate(&p, &g, &[0.5]).unwrap();
        let kept: Vec<_> = p.iter().filter(|d| d.confidence >= cut).cloned().collect();
        let b = evaluate(&kept, &g, &[0.5]).unwrap();
        for (x, y) in a.classes.iter().zip(&b.classes) {
            let full = x.pr_curve.last().map_or(0.0, |q| q.recall);
            let part = y.pr_curve.last().map_or(0.0, |q| q.recall);
            prop_assert!(part <= full);
        }
    }

    #[test]
    fn strict_thresholds_never_score_higher(seed in any::<u64>()) {
        let (p, g) = scene_records(seed);
        let r = evaluate(&p, &g, &iou_thresholds_50_95()).unwrap();
        for c in &r.classes {
            prop_assert!(c.ap50_95 <= c.ap50 + 1e-12, "{}: {} > {}", c.class, c.ap50_95, c.ap50);
        }
    }
}

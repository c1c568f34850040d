//! Brute-force reference implementations shared by the integration tests.
//! Written directly from the definitions, without the library's helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

/// Direct double-sum DFT; `out[u * w + v]` is raw frequency `(u, v)`.
pub fn dft(x: &[f64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..h {
                for z in 0..w {
                    let ang = -2.0 * PI * ((u * y) as f64 / h as f64 + (v * z) as f64 / w as f64);
                    acc += x[y * w + z] * Complex64::from_polar(1.0, ang);
                }
            }
            out[u * w + v] = acc;
        }
    }
    out
}

/// Direct inverse DFT with the 1/(HW) factor.
pub fn idft(f: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for y in 0..h {
        for z in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for u in 0..h {
                for v in 0..w {
                    let ang = 2.0 * PI * ((u * y) as f64 / h as f64 + (v * z) as f64 / w as f64);
                    acc += f[u * w + v] * Complex64::from_polar(1.0, ang);
                }
            }
            out[y * w + z] = acc / (h * w) as f64;
        }
    }
    out
}

/// Signed (centered) frequency of raw index `u` along an axis of length `n`.
pub fn signed_freq(u: usize, n: usize) -> isize {
    let half = n / 2;
    ((u + half) % n) as isize - half as isize
}

/// The low-frequency predicate evaluated on a raw index.
pub fn in_mask(u: usize, v: usize, h: usize, w: usize, beta: f64) -> bool {
    if beta <= 0.0 {
        return false;
    }
    let bh = (beta * h as f64 + 1e-9).floor() as isize;
    let bw = (beta * w as f64 + 1e-9).floor() as isize;
    signed_freq(u, h).abs() <= bh && signed_freq(v, w).abs() <= bw
}

/// Whole FDA pipeline on one channel: direct DFT, amplitude swap, direct
/// inverse, real part clamped into [0, 1].
pub fn fda_channel(src: &[f64], tgt: &[f64], h: usize, w: usize, beta: f64) -> Vec<f64> {
    let fs = dft(src, h, w);
    let ft = dft(tgt, h, w);
    let mixed: Vec<Complex64> = (0..h * w)
        .map(|i| {
            let (u, v) = (i / w, i % w);
            let amp = if in_mask(u, v, h, w, beta) { ft[i].norm() } else { fs[i].norm() };
            Complex64::from_polar(amp, fs[i].arg())
        })
        .collect();
    idft(&mixed, h, w).iter().map(|c| c.re.clamp(0.0, 1.0)).collect()
}

pub fn random_plane<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Euclidean distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

// ---- detection metrics -------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RefBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl RefBox {
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { x1: cx - w / 2.0, y1: cy - h / 2.0, x2: cx + w / 2.0, y2: cy + h / 2.0 }
    }
}

pub fn ref_iou(a: &RefBox, b: &RefBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let area = |r: &RefBox| (r.x2 - r.x1).max(0.0) * (r.y2 - r.y1).max(0.0);
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

#[derive(Debug, Clone)]
pub struct RefPred {
    pub image: usize,
    pub class: usize,
    pub b: RefBox,
    pub conf: f64,
}

#[derive(Debug, Clone)]
pub struct RefGt {
    pub image: usize,
    pub class: usize,
    pub b: RefBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefClass {
    pub included: bool,
    pub num_gt: usize,
    pub tp: usize,
    pub fp: usize,
    pub precision: f64,
    pub recall: f64,
    pub ap50: f64,
    pub ap50_95: f64,
}

/// TP flag per prediction (indexed like `preds`) for one class and threshold.
/// Greedy: each image's predictions in descending confidence take the free
/// ground truth with the largest IoU at or above the threshold.
fn ref_flags(preds: &[&RefPred], gts: &[&RefGt], thr: f64) -> Vec<bool> {
    let mut flags = vec![false; preds.len()];
    let mut images: BTreeMap<usize, ()> = BTreeMap::new();
    for p in preds {
        images.insert(p.image, ());
    }
    for &img in images.keys() {
        let mut order: Vec<usize> = (0..preds.len()).filter(|&i| preds[i].image == img).collect();
        order.sort_by(|&a, &b| preds[b].conf.total_cmp(&preds[a].conf).then(a.cmp(&b)));
        let cand: Vec<usize> = (0..gts.len()).filter(|&g| gts[g].image == img).collect();
        let mut taken = vec![false; gts.len()];
        for i in order {
            let best = cand
                .iter()
                .filter(|&&g| !taken[g])
                .map(|&g| (g, ref_iou(&preds[i].b, &gts[g].b)))
                .filter(|&(_, o)| o >= thr)
                .fold(None::<(usize, f64)>, |acc, (g, o)| match acc {
                    Some((_, bo)) if bo >= o => acc,
                    _ => Some((g, o)),
                });
            if let Some((g, _)) = best {
                taken[g] = true;
                flags[i] = true;
            }
        }
    }
    flags
}

/// (tp, fp) counts at every distinct confidence cut, highest cut first.
fn sweep(preds: &[&RefPred], flags: &[bool]) -> Vec<(usize, usize)> {
    let mut cuts: Vec<f64> = preds.iter().map(|p| p.conf).collect();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();
    cuts.iter()
        .map(|&c| {
            let tp = (0..preds.len()).filter(|&i| preds[i].conf >= c && flags[i]).count();
            let fp = (0..preds.len()).filter(|&i| preds[i].conf >= c && !flags[i]).count();
            (tp, fp)
        })
        .collect()
}

/// Area under the precision envelope: for each recall step, the best
/// precision reached at that recall or beyond.
fn ref_ap(points: &[(usize, usize)], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return 0.0;
    }
    let pr: Vec<(f64, f64)> = points
        .iter()
        .map(|&(tp, fp)| (tp as f64 / (tp + fp) as f64, tp as f64 / num_gt as f64))
        .collect();
    let mut levels: Vec<f64> = pr.iter().map(|p| p.1).filter(|&r| r > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut area = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let env = pr.iter().filter(|p| p.1 >= r).map(|p| p.0).fold(0.0, f64::max);
        area += (r - prev) * env;
        prev = r;
    }
    area
}

/// Reference evaluator. Assumes distinct confidences within each class.
pub fn ref_evaluate(preds: &[RefPred], gts: &[RefGt]) -> (Vec<RefClass>, RefClass) {
    let thresholds: Vec<f64> = (0..10).map(|i| 0.5 + 0.05 * i as f64).collect();
    let mut classes = Vec::new();
    for class in 0..3 {
        let cp: Vec<&RefPred> = preds.iter().filter(|p| p.class == class).collect();
        let cg: Vec<&RefGt> = gts.iter().filter(|g| g.class == class).collect();
        let num_gt = cg.len();
        let included = num_gt > 0 || !cp.is_empty();
        let flags50 = ref_flags(&cp, &cg, 0.5);
        let points = sweep(&cp, &flags50);
        let ap50 = ref_ap(&points, num_gt);
        let ap50_95 = thresholds
            .iter()
            .map(|&t| ref_ap(&sweep(&cp, &ref_flags(&cp, &cg, t)), num_gt))
            .sum::<f64>()
            / thresholds.len() as f64;
        // operating point: best F1, earliest cut on ties
        let mut best: Option<(f64, usize, usize)> = None;
        for &(tp, fp) in &points {
            let p = tp as f64 / (tp + fp) as f64;
            let r = if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 };
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            if best.is_none_or(|(b, _, _)| f1 > b) {
                best = Some((f1, tp, fp));
            }
        }
        let (tp, fp) = best.map_or((0, 0), |(_, tp, fp)| (tp, fp));
        classes.push(RefClass {
            included,
            num_gt,
            tp,
            fp,
            precision: if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 },
            recall: if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 },
            ap50,
            ap50_95,
        });
    }
    let inc: Vec<&RefClass> = classes.iter().filter(|c| c.included).collect();
    let mean = |f: fn(&RefClass) -> f64| {
        if inc.is_empty() {
            0.0
        } else {
            inc.iter().map(|c| f(c)).sum::<f64>() / inc.len() as f64
        }
    };
    let all = RefClass {
        included: !inc.is_empty(),
        num_gt: classes.iter().map(|c| c.num_gt).sum(),
        tp: classes.iter().map(|c| c.tp).sum(),
        fp: classes.iter().map(|c| c.fp).sum(),
        precision: mean(|c| c.precision),
        recall: mean(|c| c.recall),
        ap50: mean(|c| c.ap50),
        ap50_95: mean(|c| c.ap50_95),
    };
    (classes, all)
}

/// Random scene: up to `max_images` images with up to 5 ground truths and
/// 10 predictions each. Predictions are jittered copies of ground truths or
/// free boxes, with distinct confidences.
pub fn random_scene<R: Rng>(rng: &mut R, max_images: usize) -> (Vec<RefPred>, Vec<RefGt>) {
    let mut preds = Vec::new();
    let mut gts = Vec::new();
    let images = rng.random_range(1..=max_images);
    for image in 0..images {
        let n_gt = rng.random_range(0..=5);
        let start = gts.len();
        for _ in 0..n_gt {
            let w = rng.random_range(0.05..0.3);
            let h = rng.random_range(0.05..0.3);
            let cx = rng.random_range(w / 2.0..1.0 - w / 2.0);
            let cy = rng.random_range(h / 2.0..1.0 - h / 2.0);
            gts.push(RefGt { image, class: rng.random_range(0..3), b: RefBox::from_center(cx, cy, w, h) });
        }
        let n_pred = rng.random_range(0..=10);
        for _ in 0..n_pred {
            let (class, b) = if n_gt > 0 && rng.random_bool(0.7) {
                let g = &gts[start + rng.random_range(0..n_gt)];
                let (w, h) = (g.b.x2 - g.b.x1, g.b.y2 - g.b.y1);
                let j = rng.random_range(0.0..0.3);
                let cx = (g.b.x1 + g.b.x2) / 2.0 + rng.random_range(-j..=j) * w;
                let cy = (g.b.y1 + g.b.y2) / 2.0 + rng.random_range(-j..=j) * h;
                let s = 1.0 + rng.random_range(-j..=j);
                let class = if rng.random_bool(0.9) { g.class } else { rng.random_range(0..3) };
                (class, RefBox::from_center(cx, cy, w * s, h * s))
            } else {
                let w = rng.random_range(0.05..0.3);
                let h = rng.random_range(0.05..0.3);
                (rng.random_range(0..3), RefBox::from_center(rng.random(), rng.random(), w, h))
            };
            preds.push(RefPred { image, class, b, conf: rng.random() });
        }
    }
    (preds, gts)
}

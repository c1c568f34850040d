//! Prediction files and report rendering.
//!
//! A prediction file holds `class cx cy w h confidence` per line and shares
//! its file stem with the ground-truth label file of the same image.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::boxes::{BBox, DetectionRecord, GroundTruthRecord};
use super::evaluate::MetricsReport;
use crate::dataset::{parse_labels, LightClass};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse {
        source_name: None,
        line,
        message,
    }
}

pub fn parse_predictions(text: &str, image_id: &str) -> Result<Vec<DetectionRecord<f64>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 6 {
            return Err(parse_err(
                lineno,
                format!("expected `class cx cy w h confidence`, found {} fields", toks.len()),
            ));
        }
        let id: i64 = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid class id `{}`", toks[0])))?;
        let class = LightClass::from_id(id)
            .ok_or_else(|| Error::Taxonomy(format!("line {lineno}: class id {id} is not one of 0, 1, 2")))?;
        let mut v = [0.0; 5];
        for (slot, tok) in v.iter_mut().zip(&toks[1..]) {
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("invalid number `{tok}`")))?;
        }
        if !(0.0..=1.0).contains(&v[4]) {
            return Err(parse_err(lineno, format!("confidence {} outside [0, 1]", v[4])));
        }
        out.push(DetectionRecord {
            image_id: image_id.to_string(),
            class,
            bbox: BBox::new(v[0], v[1], v[2], v[3]),
            confidence: v[4],
        });
    }
    Ok(out)
}

pub fn serialize_predictions(preds: &[DetectionRecord<f64>]) -> String {
    preds
        .iter()
        .map(|p| {
            format!(
                "{} {:.6} {:.6} {:.6} {:.6} {:.6}\n",
                p.class.id(),
                p.bbox.cx,
                p.bbox.cy,
                p.bbox.w,
                p.bbox.h,
                p.confidence
            )
        })
        .collect()
}

/// `*.txt` files directly under `dir`, keyed and sorted by stem.
pub fn text_files_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            out.insert(stem, path);
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_predictions_dir(dir: &Path) -> Result<Vec<DetectionRecord<f64>>> {
    let mut out = Vec::new();
    for (stem, path) in text_files_by_stem(dir)? {
        out.extend(
            parse_predictions(&read(&path)?, &stem)
                .map_err(|e| e.with_source_name(path.display().to_string()))?,
        );
    }
    Ok(out)
}

pub fn load_ground_truth_dir(dir: &Path) -> Result<Vec<GroundTruthRecord<f64>>> {
    let mut out = Vec::new();
    for (stem, path) in text_files_by_stem(dir)? {
        let anns = parse_labels(&read(&path)?).map_err(|e| e.with_source_name(path.display().to_string()))?;
        out.extend(anns.iter().map(|a| GroundTruthRecord {
            image_id: stem.clone(),
            class: a.class,
            bbox: a.into(),
        }));
    }
    Ok(out)
}

/// Loads a prediction directory and a ground-truth directory; every
/// prediction file must have a matching label file.
pub fn load_evaluation_pair(
    preds_dir: &Path,
    gts_dir: &Path,
) -> Result<(Vec<DetectionRecord<f64>>, Vec<GroundTruthRecord<f64>>)> {
    let gt_files = text_files_by_stem(gts_dir)?;
    let orphans: Vec<String> = text_files_by_stem(preds_dir)?
        .into_keys()
        .filter(|s| !gt_files.contains_key(s))
        .collect();
    if !orphans.is_empty() {
        return Err(Error::Manifest(format!(
            "prediction files without ground truth: {}",
            orphans.join(", ")
        )));
    }
    Ok((load_predictions_dir(preds_dir)?, load_ground_truth_dir(gts_dir)?))
}

fn title(class: LightClass) -> &'static str {
    match class {
        LightClass::Red => "Red",
        LightClass::Green => "Green",
        LightClass::Yellow => "Yellow",
    }
}

/// Human-readable table: an `All` row then one row per class.
pub fn format_report_table(report: &MetricsReport<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8}{:>7}{:>7}{:>7}{:>11}{:>9}{:>9}{:>10}",
        "Class", "GT", "TP", "FP", "Precision", "Recall", "mAP50", "mAP50-95"
    );
    let a = &report.all;
    let _ = writeln!(
        s,
        "{:<8}{:>7}{:>7}{:>7}{:>11.3}{:>9.3}{:>9.3}{:>10.3}",
        "All", a.num_gt, a.tp, a.fp, a.precision, a.recall, a.ap50, a.ap50_95
    );
    for c in &report.classes {
        let _ = writeln!(
            s,
            "{:<8}{:>7}{:>7}{:>7}{:>11.3}{:>9.3}{:>9.3}{:>10.3}",
            title(c.class),
            c.num_gt,
            c.tp,
            c.fp,
            c.precision,
            c.recall,
            c.ap50,
            c.ap50_95
        );
    }
    s
}

/// Machine-readable export, one tab-separated row per class plus `all`.
pub fn report_to_tsv(report: &MetricsReport<f64>) -> String {
    let mut s = String::from("class\tgt\tpred\ttp\tfp\tconf_threshold\tprecision\trecall\tap50\tap50_95\tincluded\n");
    for c in &report.classes {
        let conf = c
            .confidence_threshold
            .map(|t| format!("{t:.6}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}",
            c.class, c.num_gt, c.num_pred, c.tp, c.fp, conf, c.precision, c.recall, c.ap50, c.ap50_95, c.included
        );
    }
    let a = &report.all;
    let _ = writeln!(
        s,
        "all\t{}\t{}\t{}\t{}\t-\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}",
        a.num_gt,
        report.classes.iter().map(|c| c.num_pred).sum::<usize>(),
        a.tp,
        a.fp,
        a.precision,
        a.recall,
        a.ap50,
        a.ap50_95,
        a.classes
    );
    s
}

/// Full IoU-0.5 precision-recall curves, one row per ranked prediction.
pub fn pr_curves_to_tsv(report: &MetricsReport<f64>) -> String {
    let mut s = String::from("class\trank\tconfidence\tprecision\trecall\n");
    for c in &report.classes {
        for (rank, p) in c.pr_curve.iter().enumerate() {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.6}\t{:.9}\t{:.9}",
                c.class,
                rank + 1,
                p.confidence,
                p.precision,
                p.recall
            );
        }
    }
    s
}

//! Detection scoring: greedy IoU matching, precision/recall, all-point AP and
//! mAP, and the per-image outcome taxonomy.

mod ap;
mod categories;
mod matching;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::annotations::ImageAnnotation;
use crate::detector::{Detection, DetectionSet};
use crate::error::{Error, Result};

pub use ap::{average_precision, RankedPrediction};
pub use categories::{
    aggregate_categories, categorize_image, CategoryReport, DistractorCounts, DistractorKind,
    DistractorRegion, ImageCategorization, ResultCategory,
};
pub use matching::{match_detections, Match};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Matching threshold, in `(0, 1]`.
    pub iou_threshold: f64,
    /// A single box at least this many times the object's area counts as oversize.
    pub oversize_factor: f64,
    /// Minimum IoU for a box to count as touching the object at all.
    pub hit_iou: f64,
    /// Operating point for precision, recall and the taxonomy. AP uses every prediction.
    pub score_threshold: f64,
}

impl EvalConfig {
    pub fn new(
        iou_threshold: f64,
        oversize_factor: f64,
        hit_iou: f64,
        score_threshold: f64,
    ) -> Result<Self> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(Error::domain(format!(
                "iou threshold must lie in (0, 1], got {iou_threshold}"
            )));
        }
        if !(oversize_factor > 1.0 && oversize_factor.is_finite()) {
            return Err(Error::domain(format!(
                "oversize factor must exceed 1, got {oversize_factor}"
            )));
        }
        if !(hit_iou > 0.0 && hit_iou < iou_threshold) {
            return Err(Error::domain(format!(
                "hit IoU must lie in (0, {iou_threshold}), got {hit_iou}"
            )));
        }
        if !(0.0..=1.0).contains(&score_threshold) {
            return Err(Error::domain(format!(
                "score threshold must lie in [0, 1], got {score_threshold}"
            )));
        }
        Ok(EvalConfig {
            iou_threshold,
            oversize_factor,
            hit_iou,
            score_threshold,
        })
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_threshold: 0.5,
            oversize_factor: 2.0,
            hit_iou: 0.1,
            score_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub map: f64,
    pub per_class_ap: BTreeMap<String, f64>,
    pub precision: f64,
    pub recall: f64,
    pub counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<CategoryReport>,
}

/// Scores predictions against ground truth. Both sides must cover the same image ids.
///
/// mAP averages AP over the classes present in the ground truth; it is 0 when
/// the ground truth holds no boxes at all.
pub fn evaluate(
    preds: &[DetectionSet],
    gt: &[ImageAnnotation],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let by_id = pair_by_id(preds, gt)?;

    let mut n_gt: BTreeMap<&str, usize> = BTreeMap::new();
    for a in gt {
        for b in &a.boxes {
            *n_gt.entry(b.class_name.as_str()).or_default() += 1;
        }
    }

    let mut ranked: HashMap<&str, Vec<RankedPrediction>> = HashMap::new();
    let mut counts = Counts::default();
    for (a, dets) in gt.iter().zip(&by_id) {
        for m in match_detections(dets, &a.boxes, cfg) {
            if m.detection.score >= cfg.score_threshold {
                if m.is_true_positive() {
                    counts.tp += 1;
                } else {
                    counts.fp += 1;
                }
            }
            if let Some((&class, _)) = n_gt.get_key_value(m.detection.label.as_str()) {
                ranked.entry(class).or_default().push(RankedPrediction {
                    score: m.detection.score,
                    true_positive: m.is_true_positive(),
                });
            }
        }
    }
    let total_gt: usize = n_gt.values().sum();
    counts.fn_ = total_gt - counts.tp;

    let mut per_class_ap = BTreeMap::new();
    for (&class, &n) in &n_gt {
        let preds = ranked.get(class).map(Vec::as_slice).unwrap_or(&[]);
        per_class_ap.insert(class.to_string(), average_precision(preds, n)?);
    }
    let map = if per_class_ap.is_empty() {
        0.0
    } else {
        per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64
    };
    let predicted = counts.tp + counts.fp;
    Ok(EvalReport {
        map,
        per_class_ap,
        precision: if predicted == 0 {
            0.0
        } else {
            counts.tp as f64 / predicted as f64
        },
        recall: if total_gt == 0 {
            0.0
        } else {
            counts.tp as f64 / total_gt as f64
        },
        counts,
        categories: None,
    })
}

/// Runs the taxonomy over a dataset of single-object images.
///
/// Ground-truth boxes whose class names a person region (`head_face`, `hand`,
/// `body`) are distractors; exactly one other box must remain per image.
/// Predictions below `cfg.score_threshold` are ignored.
pub fn categorize_dataset(
    preds: &[DetectionSet],
    gt: &[ImageAnnotation],
    cfg: &EvalConfig,
) -> Result<CategoryReport> {
    let by_id = pair_by_id(preds, gt)?;
    let mut per_image = Vec::with_capacity(gt.len());
    for (a, dets) in gt.iter().zip(&by_id) {
        let mut objects = Vec::new();
        let mut distractors = Vec::new();
        for b in &a.boxes {
            match DistractorKind::from_class_name(&b.class_name) {
                Some(kind) => distractors.push(DistractorRegion { bbox: b.bbox, kind }),
                None => objects.push(b.clone()),
            }
        }
        let kept: Vec<Detection> = dets
            .iter()
            .filter(|d| d.score >= cfg.score_threshold)
            .cloned()
            .collect();
        let c = categorize_image(&kept, &objects, &distractors, cfg)
            .map_err(|e| Error::domain(format!("image {}: {e}", a.image_id)))?;
        per_image.push(c);
    }
    Ok(aggregate_categories(&per_image))
}

/// Predictions aligned with `gt` order.
fn pair_by_id<'a>(
    preds: &'a [DetectionSet],
    gt: &[ImageAnnotation],
) -> Result<Vec<&'a [Detection]>> {
    let mut pred_map: HashMap<&str, &[Detection]> = HashMap::new();
    for p in preds {
        if pred_map
            .insert(p.image_id.as_str(), &p.detections)
            .is_some()
        {
            return Err(Error::DuplicateImageId(p.image_id.clone()));
        }
    }
    let mut gt_ids = BTreeSet::new();
    for a in gt {
        if !gt_ids.insert(a.image_id.as_str()) {
            return Err(Error::DuplicateImageId(a.image_id.clone()));
        }
    }
    let missing_from_pred: Vec<String> = gt_ids
        .iter()
        .filter(|id| !pred_map.contains_key(*id))
        .map(|s| s.to_string())
        .collect();
    let mut missing_from_gt: Vec<String> = pred_map
        .keys()
        .filter(|id| !gt_ids.contains(*id))
        .map(|s| s.to_string())
        .collect();
    missing_from_gt.sort();
    if !missing_from_pred.is_empty() || !missing_from_gt.is_empty() {
        return Err(Error::IdMismatch {
            missing_from_pred,
            missing_from_gt,
        });
    }
    Ok(gt.iter().map(|a| pred_map[a.image_id.as_str()]).collect())
}

/// Wraps annotation files as predictions with full confidence.
pub fn annotations_as_predictions(annotations: &[ImageAnnotation]) -> Vec<DetectionSet> {
    annotations
        .iter()
        .map(|a| DetectionSet {
            image_id: a.image_id.clone(),
            dims: a.dims,
            detections: a
                .boxes
                .iter()
                .map(|b| Detection {
                    bbox: b.bbox,
                    score: 1.0,
                    label: b.class_name.clone(),
                })
                .collect(),
        })
        .collect()
}

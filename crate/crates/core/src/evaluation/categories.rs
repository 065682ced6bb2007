//! Per-image outcome taxonomy for single-object test images.
//!
//! Every image receives one primary category (correct, not detected, multiple
//! times, partly, correct + other parts). Boxes that miss the object are
//! tallied separately, as background or as a hit on a person region.

use std::fmt;

use serde::Serialize;

use super::EvalConfig;
use crate::annotations::LabeledBox;
use crate::detector::Detection;
use crate::error::{Error, Result};
use crate::geometry::{contains, iou, BBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistractorKind {
    HeadFace,
    Hand,
    Body,
}

impl DistractorKind {
    /// Recognises ground-truth class names that mark person regions.
    pub fn from_class_name(name: &str) -> Option<Self> {
        match name
            .to_ascii_lowercase()
            .replace(['/', '-', ' '], "_")
            .as_str()
        {
            "head_face" | "head" | "face" => Some(DistractorKind::HeadFace),
            "hand" => Some(DistractorKind::Hand),
            "body" => Some(DistractorKind::Body),
            _ => None,
        }
    }
}

impl fmt::Display for DistractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistractorKind::HeadFace => "head_face",
            DistractorKind::Hand => "hand",
            DistractorKind::Body => "body",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistractorRegion {
    pub bbox: BBox,
    pub kind: DistractorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResultCategory {
    Correct,
    NotDetected,
    MultipleTimes,
    PartlySingleBox,
    CorrectPlusOtherParts,
    Background,
    DistractorRegion(DistractorKind),
}

impl ResultCategory {
    /// Whether this is a per-image category rather than a per-box tally.
    pub fn is_primary(&self) -> bool {
        !matches!(
            self,
            ResultCategory::Background | ResultCategory::DistractorRegion(_)
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DistractorCounts {
    pub head_face: usize,
    pub hand: usize,
    pub body: usize,
}

impl DistractorCounts {
    fn bump(&mut self, kind: DistractorKind) {
        match kind {
            DistractorKind::HeadFace => self.head_face += 1,
            DistractorKind::Hand => self.hand += 1,
            DistractorKind::Body => self.body += 1,
        }
    }

    pub fn get(&self, kind: DistractorKind) -> usize {
        match kind {
            DistractorKind::HeadFace => self.head_face,
            DistractorKind::Hand => self.hand,
            DistractorKind::Body => self.body,
        }
    }

    pub fn total(&self) -> usize {
        self.head_face + self.hand + self.body
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageCategorization {
    /// Always a primary category.
    pub primary: ResultCategory,
    pub background_boxes: usize,
    pub distractor_boxes: DistractorCounts,
}

impl ImageCategorization {
    pub fn extra_boxes(&self) -> usize {
        self.background_boxes + self.distractor_boxes.total()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryReport {
    pub correct: usize,
    pub not_detected: usize,
    pub multiple_times: usize,
    pub partly: usize,
    pub correct_plus_other: usize,
    pub background_boxes: usize,
    pub distractor_boxes: DistractorCounts,
    pub total_images: usize,
}

impl CategoryReport {
    pub fn count(&self, category: ResultCategory) -> usize {
        match category {
            ResultCategory::Correct => self.correct,
            ResultCategory::NotDetected => self.not_detected,
            ResultCategory::MultipleTimes => self.multiple_times,
            ResultCategory::PartlySingleBox => self.partly,
            ResultCategory::CorrectPlusOtherParts => self.correct_plus_other,
            ResultCategory::Background => self.background_boxes,
            ResultCategory::DistractorRegion(k) => self.distractor_boxes.get(k),
        }
    }

    pub fn primary_total(&self) -> usize {
        self.correct
            + self.not_detected
            + self.multiple_times
            + self.partly
            + self.correct_plus_other
    }
}

/// Places one image on the decision ladder.
///
/// A prediction "hits" the object when its IoU with it reaches `cfg.hit_iou`.
/// No hit is not-detected; two or more is multiple-times. A single hit that
/// misses part of the object but overlaps well is partly; one that contains the
/// object while being at least `oversize_factor` times its area is correct +
/// other parts; otherwise good overlap is correct. Non-hits are tallied, and a
/// correct image with any tallied box becomes correct + other parts.
pub fn categorize_image(
    preds: &[Detection],
    gt: &[LabeledBox],
    distractors: &[DistractorRegion],
    cfg: &EvalConfig,
) -> Result<ImageCategorization> {
    let object = match gt {
        [one] => &one.bbox,
        [] => {
            return Err(Error::domain(
                "categorization needs one ground-truth object, got none",
            ))
        }
        many => {
            return Err(Error::domain(format!(
                "categorization needs exactly one ground-truth object, got {}",
                many.len()
            )))
        }
    };

    let mut hits = Vec::new();
    let mut out = ImageCategorization {
        primary: ResultCategory::NotDetected,
        background_boxes: 0,
        distractor_boxes: DistractorCounts::default(),
    };
    for p in preds {
        let v = iou(&p.bbox, object).unwrap_or(0.0);
        if v >= cfg.hit_iou {
            hits.push((p, v));
            continue;
        }
        let best: Option<(DistractorKind, f64)> = distractors
            .iter()
            .map(|r| (r.kind, iou(&p.bbox, &r.bbox).unwrap_or(0.0)))
            .filter(|&(_, v)| v >= cfg.hit_iou)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((kind, _)) => out.distractor_boxes.bump(kind),
            None => out.background_boxes += 1,
        }
    }

    out.primary = match hits.as_slice() {
        [] => ResultCategory::NotDetected,
        [(hit, v)] => {
            let covers = contains(&hit.bbox, object);
            if !covers && *v >= cfg.iou_threshold {
                ResultCategory::PartlySingleBox
            } else if covers && hit.bbox.area() >= cfg.oversize_factor * object.area() {
                ResultCategory::CorrectPlusOtherParts
            } else if *v >= cfg.iou_threshold {
                ResultCategory::Correct
            } else {
                ResultCategory::PartlySingleBox
            }
        }
        _ => ResultCategory::MultipleTimes,
    };
    if out.primary == ResultCategory::Correct && out.extra_boxes() > 0 {
        out.primary = ResultCategory::CorrectPlusOtherParts;
    }
    Ok(out)
}

pub fn aggregate_categories<'a>(
    images: impl IntoIterator<Item = &'a ImageCategorization>,
) -> CategoryReport {
    let mut r = CategoryReport::default();
    for c in images {
        r.total_images += 1;
        match c.primary {
            ResultCategory::Correct => r.correct += 1,
            ResultCategory::NotDetected => r.not_detected += 1,
            ResultCategory::MultipleTimes => r.multiple_times += 1,
            ResultCategory::PartlySingleBox => r.partly += 1,
            ResultCategory::CorrectPlusOtherParts => r.correct_plus_other += 1,
            // never produced as primary by categorize_image
            ResultCategory::Background | ResultCategory::DistractorRegion(_) => {}
        }
        r.background_boxes += c.background_boxes;
        r.distractor_boxes.head_face += c.distractor_boxes.head_face;
        r.distractor_boxes.hand += c.distractor_boxes.hand;
        r.distractor_boxes.body += c.distractor_boxes.body;
    }
    r
}

//! Automatic single-object annotation.
//!
//! Training data is collapsed to the one class `object`; at annotation time a
//! class-agnostic detector's boxes are filtered by score, optionally merged into
//! one box and padded, then labelled with the name the operator supplied.

mod split;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::annotations::{
    render_dataset, write_files, AnnotationFormat, ClassMap, Dataset, ImageAnnotation, LabeledBox,
};
use crate::detector::{read_ppm, DetectionSet, RasterImage, OBJECT_LABEL};
use crate::error::{Error, Result};
use crate::geometry::{apply_slack, merge_boxes, PostProcessConfig};

pub use split::{split_dataset, write_split_lists, SplitConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotateConfig {
    pub operator_label: String,
    pub score_threshold: f64,
    pub post: PostProcessConfig,
    pub output_format: AnnotationFormat,
}

impl AnnotateConfig {
    pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

    pub fn new(
        operator_label: impl Into<String>,
        score_threshold: f64,
        post: PostProcessConfig,
        output_format: AnnotationFormat,
    ) -> Result<Self> {
        let operator_label = operator_label.into();
        crate::annotations::validate_class_name(&operator_label)?;
        if !(0.0..=1.0).contains(&score_threshold) {
            return Err(Error::domain(format!(
                "score threshold must lie in [0, 1], got {score_threshold}"
            )));
        }
        Ok(AnnotateConfig {
            operator_label,
            score_threshold,
            post,
            output_format,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnnotateOutcome {
    Annotated(ImageAnnotation),
    /// No detection reached the score threshold; no file is emitted.
    NoDetection {
        image_id: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub annotated: usize,
    pub no_detection: usize,
    pub no_detection_ids: Vec<String>,
}

/// Relabels every box as `object`.
pub fn collapse_labels(a: &ImageAnnotation) -> ImageAnnotation {
    let mut out = a.clone();
    for b in &mut out.boxes {
        b.class_name = OBJECT_LABEL.to_string();
    }
    out
}

/// Turns one image's detections into at most one labelled box.
pub fn annotate_image(dets: &DetectionSet, cfg: &AnnotateConfig) -> Result<AnnotateOutcome> {
    let mut survivors: Vec<_> = dets
        .detections
        .iter()
        .filter(|d| d.score >= cfg.score_threshold)
        .collect();
    if survivors.is_empty() {
        return Ok(AnnotateOutcome::NoDetection {
            image_id: dets.image_id.clone(),
        });
    }
    survivors.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.bbox.lex_cmp(&b.bbox))
    });

    let chosen = if cfg.post.merge_enabled {
        let boxes: Vec<_> = survivors.iter().map(|d| d.bbox).collect();
        merge_boxes(&boxes)?
    } else {
        survivors[0].bbox
    };
    let padded = if cfg.post.clamp_to_image {
        apply_slack(&chosen, cfg.post.slack_px, dets.dims)
    } else {
        chosen.expand(cfg.post.slack_px)
    };

    let mut a = ImageAnnotation::new(dets.image_id.clone(), dets.dims);
    a.boxes.push(LabeledBox {
        bbox: padded,
        class_name: cfg.operator_label.clone(),
        difficult: false,
    });
    Ok(AnnotateOutcome::Annotated(a))
}

/// Annotates every image and writes one file per annotated image (a single
/// `annotations.json` for COCO) into `out_dir`.
///
/// Duplicate ids are rejected before anything is written.
pub fn run_batch(
    sets: &[DetectionSet],
    cfg: &AnnotateConfig,
    out_dir: &Path,
) -> Result<BatchSummary> {
    let mut seen = HashSet::new();
    if let Some(dup) = sets.iter().find(|s| !seen.insert(s.image_id.as_str())) {
        return Err(Error::DuplicateImageId(dup.image_id.clone()));
    }

    let outcomes: Vec<AnnotateOutcome> = sets
        .par_iter()
        .map(|s| annotate_image(s, cfg))
        .collect::<Result<_>>()?;

    let mut summary = BatchSummary::default();
    let mut annotated = Vec::new();
    for outcome in outcomes {
        match outcome {
            AnnotateOutcome::Annotated(a) => annotated.push(a),
            AnnotateOutcome::NoDetection { image_id } => summary.no_detection_ids.push(image_id),
        }
    }
    summary.annotated = annotated.len();
    summary.no_detection = summary.no_detection_ids.len();
    summary.no_detection_ids.sort();
    for id in &summary.no_detection_ids {
        log::info!("{id}: no detection above threshold {}", cfg.score_threshold);
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    if !annotated.is_empty() {
        let dataset = Dataset::new(annotated, ClassMap::new([cfg.operator_label.as_str()])?)?;
        write_files(out_dir, &render_dataset(&dataset, cfg.output_format)?)?;
    }
    Ok(summary)
}

/// Loads every `*.ppm` in `dir`, keyed by file stem, sorted by name.
pub fn load_ppm_dir(dir: &Path) -> Result<Vec<(String, RasterImage)>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
        {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .par_iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let img = read_ppm(&bytes).map_err(|e| match e {
                Error::Parse { context, message } => Error::Parse {
                    context: format!("{} ({context})", p.display()),
                    message,
                },
                other => other,
            })?;
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((id, img))
        })
        .collect()
}

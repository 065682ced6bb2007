//! YOLO text labels: `class_idx cx cy w h`, all normalized to the image size.

use std::fmt::Write as _;

use super::{fit_to_image, ClassMap, ImageAnnotation, LabeledBox};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageDims};

pub fn parse_yolo(
    image_id: &str,
    lines: &str,
    dims: ImageDims,
    classes: &ClassMap,
) -> Result<ImageAnnotation> {
    let (w_px, h_px) = (f64::from(dims.width), f64::from(dims.height));
    let mut boxes = Vec::new();
    for (n, line) in lines.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let context = format!("YOLO {image_id} line {}", n + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                &context,
                format!(
                    "expected 5 fields `class cx cy w h`, found {}",
                    fields.len()
                ),
            ));
        }
        let idx: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(&context, format!("invalid class index `{}`", fields[0])))?;
        let class_name = classes.name(idx).ok_or_else(|| {
            Error::parse(
                &context,
                format!("class index {idx} outside the {}-class map", classes.len()),
            )
        })?;
        let mut values = [0.0f64; 4];
        for (slot, raw) in values.iter_mut().zip(&fields[1..]) {
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::parse(&context, format!("invalid number `{raw}`")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::parse(&context, format!("value {v} outside [0, 1]")));
            }
            *slot = v;
        }
        let [cx, cy, w, h] = values;
        let (cx, cy, half_w, half_h) = (cx * w_px, cy * h_px, w * w_px / 2.0, h * h_px / 2.0);
        let bbox = BBox::new(cx - half_w, cy - half_h, cx + half_w, cy + half_h)
            .map_err(|e| Error::parse(&context, e.to_string()))?;
        boxes.push(LabeledBox {
            bbox: fit_to_image(bbox, dims, &context)?,
            class_name: class_name.to_string(),
            difficult: false,
        });
    }
    Ok(ImageAnnotation::new(image_id, dims).with_boxes(boxes))
}

pub fn write_yolo(a: &ImageAnnotation, classes: &ClassMap) -> Result<String> {
    let (w_px, h_px) = (f64::from(a.dims.width), f64::from(a.dims.height));
    let mut out = String::new();
    for b in &a.boxes {
        let idx = classes
            .index_of(&b.class_name)
            .ok_or_else(|| Error::UnknownClass(b.class_name.clone()))?;
        let bb = &b.bbox;
        let cx = (bb.x_min + bb.x_max) / 2.0 / w_px;
        let cy = (bb.y_min + bb.y_max) / 2.0 / h_px;
        let w = bb.width() / w_px;
        let h = bb.height() / h_px;
        let _ = writeln!(out, "{idx} {cx:.6} {cy:.6} {w:.6} {h:.6}");
    }
    Ok(out)
}

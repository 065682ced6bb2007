//! JSON Lines detection stream, one image per line:
//!
//! ```text
//! {"schema_version":1,"image":{"id":"img1","width":100,"height":100},
//!  "detections":[{"bbox":[x_min,y_min,x_max,y_max],"score":0.9,"label":"object"}]}
//! ```

use serde::{Deserialize, Serialize};

use super::{Detection, DetectionSet};
use crate::error::{Error, Result};
use crate::geometry::{clamp_to_image, BBox, ImageDims};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    schema_version: u32,
    image: Image,
    detections: Vec<WireDetection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Image {
    id: String,
    width: u32,
    height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireDetection {
    bbox: [f64; 4],
    score: f64,
    label: String,
}

/// Parses a whole stream. Blank lines are skipped; errors carry the 1-based line number.
pub fn parse_detections(stream: &str) -> Result<Vec<DetectionSet>> {
    stream
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_line(l).map_err(|message| Error::Schema {
                line: i + 1,
                message,
            })
        })
        .collect()
}

fn parse_line(text: &str) -> std::result::Result<DetectionSet, String> {
    let line: Line = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if line.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            line.schema_version
        ));
    }
    if line.image.id.is_empty() {
        return Err("image.id must be nonempty".into());
    }
    let dims = ImageDims::new(line.image.width, line.image.height).map_err(|e| e.to_string())?;
    let detections = line
        .detections
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            let [x0, y0, x1, y1] = d.bbox;
            let bbox = BBox::new(x0, y0, x1, y1)
                .and_then(|b| clamp_to_image(&b, dims))
                .map_err(|e| format!("detection {k}: {e}"))?;
            Detection::new(bbox, d.score, d.label).map_err(|e| format!("detection {k}: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(DetectionSet {
        image_id: line.image.id,
        dims,
        detections,
    })
}

/// Serializes sets in order, one newline-terminated line each.
pub fn write_detections(sets: &[DetectionSet]) -> String {
    let mut out = String::new();
    for set in sets {
        let line = Line {
            schema_version: SCHEMA_VERSION,
            image: Image {
                id: set.image_id.clone(),
                width: set.dims.width,
                height: set.dims.height,
            },
            detections: set
                .detections
                .iter()
                .map(|d| WireDetection {
                    bbox: d.bbox.to_array(),
                    score: d.score,
                    label: d.label.clone(),
                })
                .collect(),
        };
        // plain structs of strings and finite numbers always serialize
        out.push_str(&serde_json::to_string(&line).expect("detection line serializes"));
        out.push('\n');
    }
    out
}

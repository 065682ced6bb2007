//! Colour-distance foreground mask followed by connected-component labelling.

use rayon::prelude::*;

use super::{
    BackgroundModel, Connectivity, Detection, DetectionSet, RasterImage, Rgb, OBJECT_LABEL,
};
use crate::error::{Error, Result};
use crate::geometry::BBox;

struct Component {
    area: usize,
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
}

/// Detects every foreground blob of at least `min_area_px` pixels.
///
/// Score is the blob's fill ratio of its own bounding box. Output is sorted by
/// descending score, then by box corners, so it does not depend on scan order.
pub fn baseline_detect(image_id: &str, img: &RasterImage, model: &BackgroundModel) -> DetectionSet {
    let dims = img.dims();
    let (w, h) = (dims.width as usize, dims.height as usize);
    let tol_sq = model.tolerance * model.tolerance;
    let mask: Vec<bool> = img
        .samples()
        .chunks_exact(3)
        .map(|p| f64::from(Rgb([p[0], p[1], p[2]]).distance_sq(&model.reference_color)) > tol_sq)
        .collect();

    let neighbours: &[(isize, isize)] = match model.connectivity {
        Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        Connectivity::Eight => &[
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ],
    };

    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    for start in 0..w * h {
        if !mask[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let (sx, sy) = ((start % w) as u32, (start / w) as u32);
        let mut c = Component {
            area: 0,
            x_min: sx,
            y_min: sy,
            x_max: sx,
            y_max: sy,
        };
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            c.area += 1;
            c.x_min = c.x_min.min(x as u32);
            c.x_max = c.x_max.max(x as u32);
            c.y_min = c.y_min.min(y as u32);
            c.y_max = c.y_max.max(y as u32);
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask[j] && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        if c.area >= model.min_area_px {
            components.push(c);
        }
    }

    let mut detections: Vec<Detection> = components
        .into_iter()
        .map(|c| {
            // pixel (x, y) covers [x, x+1) × [y, y+1)
            let bbox = BBox {
                x_min: f64::from(c.x_min),
                y_min: f64::from(c.y_min),
                x_max: f64::from(c.x_max) + 1.0,
                y_max: f64::from(c.y_max) + 1.0,
            };
            Detection {
                score: c.area as f64 / bbox.area(),
                bbox,
                label: OBJECT_LABEL.to_string(),
            }
        })
        .collect();
    detections.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.bbox.lex_cmp(&b.bbox))
    });

    DetectionSet {
        image_id: image_id.to_string(),
        dims,
        detections,
    }
}

/// Per-channel median over the pixels within `border_px` of any image edge.
///
/// For an even number of border pixels the lower median is taken.
pub fn estimate_background(img: &RasterImage, border_px: u32) -> Result<Rgb> {
    let dims = img.dims();
    if border_px == 0 || 2 * u64::from(border_px) >= u64::from(dims.width.min(dims.height)) {
        return Err(Error::domain(format!(
            "border of {border_px} px must be at least 1 and less than half of the {dims} image"
        )));
    }
    let (w, h) = (dims.width, dims.height);
    let mut hist = [[0usize; 256]; 3];
    let mut n = 0usize;
    for y in 0..h {
        let edge_row = y < border_px || y >= h - border_px;
        for x in 0..w {
            if edge_row || x < border_px || x >= w - border_px {
                let p = img.pixel(x, y);
                for (c, &v) in p.0.iter().enumerate() {
                    hist[c][v as usize] += 1;
                }
                n += 1;
            }
        }
    }
    let rank = (n - 1) / 2;
    let mut out = [0u8; 3];
    for (c, channel) in hist.iter().enumerate() {
        let mut seen = 0usize;
        for (v, &count) in channel.iter().enumerate() {
            seen += count;
            if seen > rank {
                out[c] = v as u8;
                break;
            }
        }
    }
    Ok(Rgb(out))
}

/// Runs the baseline over a batch in parallel; output order equals input order.
///
/// With `auto_background_border`, each image's reference colour is replaced by
/// its own border estimate.
pub fn detect_batch(
    images: &[(String, RasterImage)],
    model: &BackgroundModel,
    auto_background_border: Option<u32>,
) -> Result<Vec<DetectionSet>> {
    images
        .par_iter()
        .map(|(id, img)| {
            let mut m = *model;
            if let Some(border) = auto_background_border {
                m.reference_color = estimate_background(img, border)?;
            }
            Ok(baseline_detect(id, img, &m))
        })
        .collect()
}

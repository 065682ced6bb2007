//! Axis-aligned box arithmetic.
//!
//! Coordinates are continuous pixel *edges*: origin at the top-left image
//! corner, x to the right, y downward. A pixel at integer index `(x, y)`
//! covers `[x, x+1) × [y, y+1)`, so a box's area is the real-interval product
//! with no `+1` pixel counting. Integer conventions of particular file formats
//! are converted at the format boundary.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    /// Builds a box, rejecting non-finite or inverted coordinates.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) {
            return Err(Error::domain(format!("non-finite box coordinates {b}")));
        }
        if x_min > x_max || y_min > y_max {
            return Err(Error::domain(format!("inverted box {b}")));
        }
        Ok(b)
    }

    /// COCO-style `[x, y, w, h]`.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        BBox::new(x, y, x + w, y + h)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    /// Moves every side outward by `margin` with no clamping.
    pub fn expand(&self, margin: f64) -> BBox {
        BBox {
            x_min: self.x_min - margin,
            y_min: self.y_min - margin,
            x_max: self.x_max + margin,
            y_max: self.y_max + margin,
        }
    }

    /// Lexicographic key `(x_min, y_min, x_max, y_max)` used for deterministic tie-breaks.
    pub(crate) fn lex_cmp(&self, other: &BBox) -> std::cmp::Ordering {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(ImageDims { width, height })
    }

    /// The box covering the whole image.
    pub fn bounds(&self) -> BBox {
        BBox {
            x_min: 0.0,
            y_min: 0.0,
            x_max: f64::from(self.width),
            y_max: f64::from(self.height),
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

impl fmt::Display for ImageDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Box refinement applied after detection: optional merge of all surviving
/// boxes, then a fixed outward margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostProcessConfig {
    pub merge_enabled: bool,
    pub slack_px: f64,
    /// When false the slack is applied without clipping to the image.
    pub clamp_to_image: bool,
}

impl PostProcessConfig {
    pub fn new(merge_enabled: bool, slack_px: f64, clamp_to_image: bool) -> Result<Self> {
        if !(slack_px >= 0.0 && slack_px.is_finite()) {
            return Err(Error::domain(format!(
                "slack must be a finite value >= 0, got {slack_px}"
            )));
        }
        Ok(PostProcessConfig {
            merge_enabled,
            slack_px,
            clamp_to_image,
        })
    }
}

impl Default for PostProcessConfig {
    fn default() -> Self {
        PostProcessConfig {
            merge_enabled: true,
            slack_px: 0.0,
            clamp_to_image: true,
        }
    }
}

/// Intersection over union. Disjoint or edge-touching boxes give 0.
pub fn iou(a: &BBox, b: &BBox) -> Result<f64> {
    let (area_a, area_b) = (a.area(), b.area());
    if area_a <= 0.0 && area_b <= 0.0 {
        return Err(Error::domain(format!(
            "IoU undefined for two zero-area boxes {a} and {b}"
        )));
    }
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return Ok(0.0);
    }
    let union = area_a + area_b - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

pub fn contains(outer: &BBox, inner: &BBox) -> bool {
    outer.x_min <= inner.x_min
        && outer.y_min <= inner.y_min
        && outer.x_max >= inner.x_max
        && outer.y_max >= inner.y_max
}

/// The smallest box containing every input.
pub fn merge_boxes(boxes: &[BBox]) -> Result<BBox> {
    let (first, rest) = boxes
        .split_first()
        .ok_or_else(|| Error::domain("cannot merge an empty list of boxes"))?;
    Ok(rest.iter().fold(*first, |acc, b| BBox {
        x_min: acc.x_min.min(b.x_min),
        y_min: acc.y_min.min(b.y_min),
        x_max: acc.x_max.max(b.x_max),
        y_max: acc.y_max.max(b.y_max),
    }))
}

/// Grows `b` by `slack_px` on each side, then clips to the image.
///
/// Never fails: a box that ends up outside the image collapses onto its border.
pub fn apply_slack(b: &BBox, slack_px: f64, dims: ImageDims) -> BBox {
    clip(&b.expand(slack_px.max(0.0)), dims)
}

/// Clips `b` to `[0, width] × [0, height]`.
///
/// A box with no point inside the closed image rectangle, or a positive-area
/// box that would collapse to zero area, is rejected as corrupt.
pub fn clamp_to_image(b: &BBox, dims: ImageDims) -> Result<BBox> {
    let (w, h) = (f64::from(dims.width), f64::from(dims.height));
    let outside = b.x_min > w || b.y_min > h || b.x_max < 0.0 || b.y_max < 0.0;
    let clipped = clip(b, dims);
    if outside || (b.area() > 0.0 && clipped.area() <= 0.0) {
        return Err(Error::domain(format!(
            "box {b} lies entirely outside the {dims} image"
        )));
    }
    Ok(clipped)
}

fn clip(b: &BBox, dims: ImageDims) -> BBox {
    let (w, h) = (f64::from(dims.width), f64::from(dims.height));
    BBox {
        x_min: b.x_min.clamp(0.0, w),
        y_min: b.y_min.clamp(0.0, h),
        x_max: b.x_max.clamp(0.0, w),
        y_max: b.y_max.clamp(0.0, h),
    }
}

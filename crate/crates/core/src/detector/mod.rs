//! Detections: the wire format shared with external detectors, and a
//! deterministic colour-threshold detector for homogeneous backgrounds.

mod baseline;
mod ppm;
mod wire;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageDims};

pub use baseline::{baseline_detect, detect_batch, estimate_background};
pub use ppm::{read_ppm, read_ppm_dims, write_ppm};
pub use wire::{parse_detections, write_detections, SCHEMA_VERSION};

/// The only label produced by class-agnostic detection.
pub const OBJECT_LABEL: &str = "object";

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    /// Confidence in `[0, 1]`.
    pub score: f64,
    pub label: String,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64, label: impl Into<String>) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::domain(format!("score {score} outside [0, 1]")));
        }
        Ok(Detection {
            bbox,
            score,
            label: label.into(),
        })
    }
}

/// One detector output for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    pub image_id: String,
    pub dims: ImageDims,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const WHITE: Rgb = Rgb([255, 255, 255]);

    pub fn distance_sq(&self, other: &Rgb) -> u32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| {
                let d = i32::from(a) - i32::from(b);
                (d * d) as u32
            })
            .sum()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02X}{:02X}{:02X}", self.0[0], self.0[1], self.0[2])
    }
}

/// `RRGGBB`, optionally prefixed with `#`.
impl FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        let bad = || Error::parse("colour", format!("`{s}` is not an RRGGBB hex colour"));
        if hex.len() != 6 || !hex.is_ascii() {
            return Err(bad());
        }
        let mut out = [0u8; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        Ok(Rgb(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::domain(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

/// Pixels farther than `tolerance` (Euclidean RGB distance) from
/// `reference_color` are foreground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundModel {
    pub reference_color: Rgb,
    pub tolerance: f64,
    pub min_area_px: usize,
    pub connectivity: Connectivity,
}

impl BackgroundModel {
    pub const DEFAULT_TOLERANCE: f64 = 40.0;
    pub const DEFAULT_MIN_AREA: usize = 64;

    pub fn new(
        reference_color: Rgb,
        tolerance: f64,
        min_area_px: usize,
        connectivity: Connectivity,
    ) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::domain(format!(
                "tolerance must be >= 0, got {tolerance}"
            )));
        }
        if min_area_px == 0 {
            return Err(Error::domain("min_area_px must be at least 1"));
        }
        Ok(BackgroundModel {
            reference_color,
            tolerance,
            min_area_px,
            connectivity,
        })
    }
}

impl Default for BackgroundModel {
    fn default() -> Self {
        BackgroundModel {
            reference_color: Rgb::WHITE,
            tolerance: Self::DEFAULT_TOLERANCE,
            min_area_px: Self::DEFAULT_MIN_AREA,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Row-major 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    dims: ImageDims,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(dims: ImageDims, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != dims.pixel_count() * 3 {
            return Err(Error::domain(format!(
                "{dims} image needs {} samples, got {}",
                dims.pixel_count() * 3,
                pixels.len()
            )));
        }
        Ok(RasterImage { dims, pixels })
    }

    pub fn filled(dims: ImageDims, color: Rgb) -> Self {
        RasterImage {
            dims,
            pixels: color.0.repeat(dims.pixel_count()),
        }
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn samples(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        Rgb([self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]])
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: Rgb) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&color.0);
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        assert!(
            x < self.dims.width && y < self.dims.height,
            "pixel ({x}, {y}) outside {}",
            self.dims
        );
        (y as usize * self.dims.width as usize + x as usize) * 3
    }
}

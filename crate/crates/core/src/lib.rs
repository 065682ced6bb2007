//! Automatic bounding-box annotation for single objects photographed over a
//! homogeneous background.
//!
//! A class-agnostic detector (any external model through the JSON Lines
//! detection stream, or the built-in colour-threshold baseline) localizes the
//! object; the pipeline merges and pads its boxes, attaches the class name the
//! operator supplied, and writes VOC, YOLO or COCO annotations. The
//! evaluation module scores results with AP at an IoU threshold and a
//! per-image outcome taxonomy.

pub mod annotations;
pub mod cli;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod pipeline;

pub use error::{Error, Result};

//! Ground-truth and emitted annotations, and their on-disk dialects.
//!
//! Three formats are supported: Pascal-VOC XML (one file per image), YOLO
//! normalized text (one file per image plus `classes.txt`) and the detection
//! subset of COCO JSON (one file per dataset).

mod coco;
mod dataset;
mod voc;
mod yolo;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{self, BBox, ImageDims};

pub use coco::{parse_coco_subset, write_coco};
pub use dataset::{
    convert, load_dataset, render_dataset, write_files, Dataset, DimsSource, LoadOptions,
    OutputFile,
};
pub use voc::{parse_voc_xml, write_voc_xml};
pub use yolo::{parse_yolo, write_yolo};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBox {
    pub bbox: BBox,
    pub class_name: String,
    pub difficult: bool,
}

impl LabeledBox {
    pub fn new(bbox: BBox, class_name: impl Into<String>) -> Result<Self> {
        let class_name = class_name.into();
        validate_class_name(&class_name)?;
        Ok(LabeledBox {
            bbox,
            class_name,
            difficult: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnnotation {
    /// Filename stem, unique within a dataset.
    pub image_id: String,
    /// Original image filename when the source format carried one.
    pub file_name: Option<String>,
    pub dims: ImageDims,
    pub boxes: Vec<LabeledBox>,
}

impl ImageAnnotation {
    pub fn new(image_id: impl Into<String>, dims: ImageDims) -> Self {
        ImageAnnotation {
            image_id: image_id.into(),
            file_name: None,
            dims,
            boxes: Vec::new(),
        }
    }

    pub fn with_boxes(mut self, boxes: Vec<LabeledBox>) -> Self {
        self.boxes = boxes;
        self
    }

    /// The filename written into formats that record one.
    pub fn file_name_or_id(&self) -> &str {
        self.file_name.as_deref().unwrap_or(&self.image_id)
    }
}

/// Ordered class names with a bidirectional name/index mapping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl ClassMap {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut map = ClassMap::default();
        for name in names {
            let name = name.into();
            validate_class_name(&name)?;
            if map.index.contains_key(&name) {
                return Err(Error::parse(
                    "class map",
                    format!("duplicate class `{name}`"),
                ));
            }
            map.index.insert(name.clone(), map.names.len());
            map.names.push(name);
        }
        Ok(map)
    }

    /// Sorted unique class names found in `annotations`.
    pub fn from_annotations<'a>(
        annotations: impl IntoIterator<Item = &'a ImageAnnotation>,
    ) -> Self {
        let mut names: Vec<&str> = annotations
            .into_iter()
            .flat_map(|a| a.boxes.iter().map(|b| b.class_name.as_str()))
            .collect();
        names.sort_unstable();
        names.dedup();
        // names were validated when the boxes were built
        ClassMap::new(names).unwrap_or_default()
    }

    /// Reads a `classes.txt`: one name per line, blank lines ignored.
    pub fn parse_names_file(text: &str) -> Result<Self> {
        ClassMap::new(
            text.lines()
                .map(|l| l.trim_end_matches('\r'))
                .filter(|l| !l.trim().is_empty()),
        )
    }

    pub fn to_names_file(&self) -> String {
        self.names.iter().map(|n| format!("{n}\n")).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum AnnotationFormat {
    Voc,
    Yolo,
    Coco,
}

impl fmt::Display for AnnotationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnotationFormat::Voc => "voc",
            AnnotationFormat::Yolo => "yolo",
            AnnotationFormat::Coco => "coco",
        })
    }
}

impl FromStr for AnnotationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "voc" => Ok(AnnotationFormat::Voc),
            "yolo" => Ok(AnnotationFormat::Yolo),
            "coco" => Ok(AnnotationFormat::Coco),
            other => Err(Error::parse("format", format!("unknown format `{other}`"))),
        }
    }
}

pub(crate) fn validate_class_name(name: &str) -> Result<()> {
    if name.trim().is_empty() {
        return Err(Error::parse("class name", "class name must be nonempty"));
    }
    if name.contains(['\n', '\r']) {
        return Err(Error::parse(
            "class name",
            format!("class name {name:?} contains a newline"),
        ));
    }
    Ok(())
}

/// Strips the last extension from a filename, keeping any directory-free stem.
pub(crate) fn file_stem(file_name: &str) -> &str {
    let base = file_name.rsplit(['/', '\\']).next().unwrap_or(file_name);
    match base.rfind('.') {
        Some(0) | None => base,
        Some(i) => &base[..i],
    }
}

/// Clips a parsed box to its image. Fully-outside boxes are errors; partial
/// overhang beyond float noise is logged.
pub(crate) fn fit_to_image(b: BBox, dims: ImageDims, context: &str) -> Result<BBox> {
    let clipped =
        geometry::clamp_to_image(&b, dims).map_err(|e| Error::parse(context, e.to_string()))?;
    let moved = b
        .to_array()
        .iter()
        .zip(clipped.to_array().iter())
        .any(|(a, c)| (a - c).abs() > 1e-6);
    if moved {
        log::warn!("{context}: box {b} exceeds the {dims} image, clamped to {clipped}");
    }
    Ok(clipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_map_is_bidirectional() {
        let m = ClassMap::new(["apricot", "banana"]).unwrap();
        assert_eq!(m.index_of("banana"), Some(1));
        assert_eq!(m.name(0), Some("apricot"));
        assert_eq!(m.index_of("onion"), None);
        assert_eq!(ClassMap::parse_names_file(&m.to_names_file()).unwrap(), m);
    }

    #[test]
    fn class_map_rejects_duplicates_and_blank() {
        assert!(ClassMap::new(["a", "a"]).is_err());
        assert!(ClassMap::new([""]).is_err());
        assert!(ClassMap::new(["two\nlines"]).is_err());
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem("img1.jpg"), "img1");
        assert_eq!(file_stem("dir/img1.tar.gz"), "img1.tar");
        assert_eq!(file_stem("noext"), "noext");
        assert_eq!(file_stem(".hidden"), ".hidden");
    }

    #[test]
    fn format_names() {
        for f in [
            AnnotationFormat::Voc,
            AnnotationFormat::Yolo,
            AnnotationFormat::Coco,
        ] {
            assert_eq!(f.to_string().parse::<AnnotationFormat>().unwrap(), f);
        }
        assert!("csv".parse::<AnnotationFormat>().is_err());
    }
}

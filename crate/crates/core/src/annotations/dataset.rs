//! Directory-level reading and writing of annotation datasets.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::{
    parse_coco_subset, parse_voc_xml, parse_yolo, write_coco, write_voc_xml, write_yolo,
    AnnotationFormat, ClassMap, ImageAnnotation,
};
use crate::detector::read_ppm_dims;
use crate::error::{Error, Result};
use crate::geometry::ImageDims;

pub const CLASSES_FILE: &str = "classes.txt";
pub const COCO_FILE: &str = "annotations.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<ImageAnnotation>,
    pub classes: ClassMap,
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate image ids and names missing from `classes`.
    pub fn new(images: Vec<ImageAnnotation>, classes: ClassMap) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &images {
            if !seen.insert(a.image_id.as_str()) {
                return Err(Error::DuplicateImageId(a.image_id.clone()));
            }
            if let Some(b) = a
                .boxes
                .iter()
                .find(|b| classes.index_of(&b.class_name).is_none())
            {
                return Err(Error::UnknownClass(b.class_name.clone()));
            }
        }
        Ok(Dataset { images, classes })
    }
}

/// Where YOLO input gets the pixel size of each image.
#[derive(Debug, Clone)]
pub enum DimsSource {
    Uniform(ImageDims),
    /// `<dir>/<image_id>.ppm`; only the header is consulted.
    ImageDir(PathBuf),
}

impl DimsSource {
    fn dims_for(&self, image_id: &str) -> Result<ImageDims> {
        match self {
            DimsSource::Uniform(d) => Ok(*d),
            DimsSource::ImageDir(dir) => {
                let path = dir.join(format!("{image_id}.ppm"));
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                read_ppm_dims(&bytes)
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Required for YOLO input.
    pub dims: Option<DimsSource>,
    /// Class order; YOLO input falls back to `classes.txt` in the input directory,
    /// VOC input to the sorted set of names found.
    pub classes: Option<ClassMap>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

pub fn load_dataset(path: &Path, format: AnnotationFormat, opts: &LoadOptions) -> Result<Dataset> {
    match format {
        AnnotationFormat::Voc => {
            let mut images = Vec::new();
            for file in list_files(path, "xml")? {
                let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
                images.push(parse_voc_xml(&bytes).map_err(|e| in_file(&file, e))?);
            }
            let classes = match &opts.classes {
                Some(c) => c.clone(),
                None => ClassMap::from_annotations(&images),
            };
            Dataset::new(images, classes)
        }
        AnnotationFormat::Yolo => {
            let dims = opts.dims.as_ref().ok_or_else(|| {
                Error::domain("YOLO input requires image dimensions (--dims or --images)")
            })?;
            let classes = match &opts.classes {
                Some(c) => c.clone(),
                None => {
                    let p = path.join(CLASSES_FILE);
                    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    ClassMap::parse_names_file(&text)?
                }
            };
            let mut images = Vec::new();
            for file in list_files(path, "txt")? {
                if file.file_name().is_some_and(|n| n == CLASSES_FILE) {
                    continue;
                }
                let id = stem_of(&file);
                let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
                let a = parse_yolo(&id, &text, dims.dims_for(&id)?, &classes)
                    .map_err(|e| in_file(&file, e))?;
                images.push(a);
            }
            Dataset::new(images, classes)
        }
        AnnotationFormat::Coco => {
            let file = if path.is_dir() {
                path.join(COCO_FILE)
            } else {
                path.to_path_buf()
            };
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let (images, classes) = parse_coco_subset(&bytes).map_err(|e| in_file(&file, e))?;
            let classes = opts.classes.clone().unwrap_or(classes);
            Dataset::new(images, classes)
        }
    }
}

/// Serializes `dataset`, file list sorted by name.
pub fn render_dataset(dataset: &Dataset, format: AnnotationFormat) -> Result<Vec<OutputFile>> {
    let mut files = match format {
        AnnotationFormat::Voc => dataset
            .images
            .iter()
            .map(|a| OutputFile {
                name: format!("{}.xml", a.image_id),
                contents: write_voc_xml(a),
            })
            .collect(),
        AnnotationFormat::Yolo => {
            let mut files = vec![OutputFile {
                name: CLASSES_FILE.to_string(),
                contents: dataset.classes.to_names_file().into_bytes(),
            }];
            for a in &dataset.images {
                files.push(OutputFile {
                    name: format!("{}.txt", a.image_id),
                    contents: write_yolo(a, &dataset.classes)?.into_bytes(),
                });
            }
            files
        }
        AnnotationFormat::Coco => vec![OutputFile {
            name: COCO_FILE.to_string(),
            contents: write_coco(&dataset.images, &dataset.classes)?,
        }],
    };
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(files)
}

pub fn write_files(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Reads `input` in one format and renders it in another.
pub fn convert(
    input: &Path,
    from: AnnotationFormat,
    to: AnnotationFormat,
    opts: &LoadOptions,
) -> Result<Vec<OutputFile>> {
    render_dataset(&load_dataset(input, from, opts)?, to)
}

fn list_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file()
            && path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case(extension))
        {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{} ({context})", path.display()),
            message,
        },
        other => other,
    }
}

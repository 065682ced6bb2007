//! Detection subset of COCO JSON: `images`, `annotations` with `[x, y, w, h]`
//! boxes, and `categories`. Segmentation, licenses and the like are ignored on
//! input and never written.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{file_stem, fit_to_image, ClassMap, ImageAnnotation, LabeledBox};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageDims};

const CONTEXT: &str = "COCO JSON";

#[derive(Debug, Serialize, Deserialize)]
struct CocoDocument {
    images: Vec<CocoImage>,
    #[serde(default)]
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoImage {
    id: u64,
    file_name: String,
    width: u32,
    height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoCategory {
    id: u64,
    name: String,
}

/// Parses a COCO document. Images keep file order; the class map follows
/// ascending category id.
pub fn parse_coco_subset(document: &[u8]) -> Result<(Vec<ImageAnnotation>, ClassMap)> {
    let doc: CocoDocument =
        serde_json::from_slice(document).map_err(|e| Error::parse(CONTEXT, e.to_string()))?;

    let mut categories: BTreeMap<u64, &str> = BTreeMap::new();
    for c in &doc.categories {
        if categories.insert(c.id, &c.name).is_some() {
            return Err(Error::parse(
                CONTEXT,
                format!("duplicate category id {}", c.id),
            ));
        }
    }
    let classes = ClassMap::new(categories.values().copied())?;

    let mut images = Vec::with_capacity(doc.images.len());
    let mut by_id: HashMap<u64, usize> = HashMap::new();
    let mut stems: HashSet<String> = HashSet::new();
    for img in &doc.images {
        let dims = ImageDims::new(img.width, img.height)
            .map_err(|e| Error::parse(CONTEXT, format!("image {}: {e}", img.id)))?;
        let stem = file_stem(&img.file_name).to_string();
        if !stems.insert(stem.clone()) {
            return Err(Error::DuplicateImageId(stem));
        }
        if by_id.insert(img.id, images.len()).is_some() {
            return Err(Error::parse(
                CONTEXT,
                format!("duplicate image id {}", img.id),
            ));
        }
        let mut a = ImageAnnotation::new(stem, dims);
        a.file_name = Some(img.file_name.clone());
        images.push(a);
    }

    for ann in &doc.annotations {
        let context = format!("{CONTEXT} annotation {}", ann.id);
        let &slot = by_id.get(&ann.image_id).ok_or_else(|| {
            Error::parse(
                &context,
                format!("references missing image id {}", ann.image_id),
            )
        })?;
        let &name = categories.get(&ann.category_id).ok_or_else(|| {
            Error::parse(
                &context,
                format!("references missing category id {}", ann.category_id),
            )
        })?;
        let [x, y, w, h] = ann.bbox;
        if w < 0.0 || h < 0.0 {
            return Err(Error::parse(&context, format!("negative box size {w}x{h}")));
        }
        let bbox =
            BBox::from_xywh(x, y, w, h).map_err(|e| Error::parse(&context, e.to_string()))?;
        let image = &mut images[slot];
        let bbox = fit_to_image(bbox, image.dims, &context)?;
        image.boxes.push(LabeledBox {
            bbox,
            class_name: name.to_string(),
            difficult: false,
        });
    }

    Ok((images, classes))
}

/// Serializes a dataset. Image ids are assigned 1.. by sorted `image_id`,
/// annotation ids 1.. in that image order, category ids are class index + 1.
pub fn write_coco(dataset: &[ImageAnnotation], classes: &ClassMap) -> Result<Vec<u8>> {
    let mut sorted: Vec<&ImageAnnotation> = dataset.iter().collect();
    sorted.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].image_id == w[1].image_id) {
        return Err(Error::DuplicateImageId(w[0].image_id.clone()));
    }

    let mut doc = CocoDocument {
        images: Vec::with_capacity(sorted.len()),
        annotations: Vec::new(),
        categories: classes
            .names()
            .iter()
            .enumerate()
            .map(|(i, name)| CocoCategory {
                id: i as u64 + 1,
                name: name.clone(),
            })
            .collect(),
    };
    for (i, a) in sorted.iter().enumerate() {
        let image_id = i as u64 + 1;
        doc.images.push(CocoImage {
            id: image_id,
            file_name: a.file_name_or_id().to_string(),
            width: a.dims.width,
            height: a.dims.height,
        });
        for b in &a.boxes {
            let idx = classes
                .index_of(&b.class_name)
                .ok_or_else(|| Error::UnknownClass(b.class_name.clone()))?;
            doc.annotations.push(CocoAnnotation {
                id: doc.annotations.len() as u64 + 1,
                image_id,
                category_id: idx as u64 + 1,
                bbox: [b.bbox.x_min, b.bbox.y_min, b.bbox.width(), b.bbox.height()],
            });
        }
    }
    let mut out =
        serde_json::to_vec_pretty(&doc).map_err(|e| Error::parse(CONTEXT, e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

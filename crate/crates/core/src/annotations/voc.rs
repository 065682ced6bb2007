//! Pascal-VOC XML, as written by LabelImg.
//!
//! `bndbox` integers are read as 1-based inclusive pixel indices: a box
//! spanning pixels `xmin..=xmax` has continuous edges `[xmin - 1, xmax]`.

use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::{file_stem, fit_to_image, validate_class_name, ImageAnnotation, LabeledBox};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ImageDims};

const CONTEXT: &str = "VOC XML";

pub fn parse_voc_xml(document: &[u8]) -> Result<ImageAnnotation> {
    let text = std::str::from_utf8(document)
        .map_err(|e| Error::parse(CONTEXT, format!("document is not UTF-8: {e}")))?;
    let doc = Document::parse(text).map_err(|e| Error::parse(CONTEXT, e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "annotation" {
        return Err(Error::parse(
            CONTEXT,
            format!(
                "root element is <{}>, expected <annotation>",
                root.tag_name().name()
            ),
        ));
    }

    let file_name = required_text(root, "filename", "annotation/filename")?;
    let size = child(root, "size").ok_or_else(|| missing("annotation/size"))?;
    let width = parse_dimension(size, "width")?;
    let height = parse_dimension(size, "height")?;
    let dims = ImageDims::new(width, height).map_err(|e| Error::parse(CONTEXT, e.to_string()))?;

    let mut boxes = Vec::new();
    for (i, object) in root
        .children()
        .filter(|n| n.has_tag_name("object"))
        .enumerate()
    {
        let name = required_text(object, "name", "object/name")?;
        validate_class_name(&name)?;
        let difficult = match child(object, "difficult").and_then(|n| n.text()) {
            None => false,
            Some(t) => match t.trim() {
                "0" | "false" => false,
                "1" | "true" => true,
                other => {
                    return Err(Error::parse(
                        CONTEXT,
                        format!("object {i}: invalid difficult value `{other}`"),
                    ))
                }
            },
        };
        let bndbox = child(object, "bndbox").ok_or_else(|| missing("object/bndbox"))?;
        let [xmin, ymin, xmax, ymax] =
            ["xmin", "ymin", "xmax", "ymax"].map(|tag| coordinate(bndbox, tag));
        let (xmin, ymin, xmax, ymax) = (xmin?, ymin?, xmax?, ymax?);
        if xmax < xmin || ymax < ymin {
            return Err(Error::parse(
                CONTEXT,
                format!("object {i} ({name}): inverted bndbox ({xmin}, {ymin}, {xmax}, {ymax})"),
            ));
        }
        let bbox = BBox::new(xmin - 1.0, ymin - 1.0, xmax, ymax)
            .map_err(|e| Error::parse(CONTEXT, e.to_string()))?;
        let bbox = fit_to_image(bbox, dims, &format!("{CONTEXT} {file_name} object {i}"))?;
        boxes.push(LabeledBox {
            bbox,
            class_name: name,
            difficult,
        });
    }

    Ok(ImageAnnotation {
        image_id: file_stem(&file_name).to_string(),
        file_name: Some(file_name),
        dims,
        boxes,
    })
}

pub fn write_voc_xml(a: &ImageAnnotation) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<annotation>\n");
    let _ = writeln!(
        out,
        "\t<filename>{}</filename>",
        escape(a.file_name_or_id())
    );
    out.push_str("\t<size>\n");
    let _ = writeln!(out, "\t\t<width>{}</width>", a.dims.width);
    let _ = writeln!(out, "\t\t<height>{}</height>", a.dims.height);
    out.push_str("\t\t<depth>3</depth>\n");
    out.push_str("\t</size>\n");
    for b in &a.boxes {
        let (xmin, ymin, xmax, ymax) = to_voc_integers(&b.bbox);
        out.push_str("\t<object>\n");
        let _ = writeln!(out, "\t\t<name>{}</name>", escape(&b.class_name));
        let _ = writeln!(out, "\t\t<difficult>{}</difficult>", u8::from(b.difficult));
        out.push_str("\t\t<bndbox>\n");
        let _ = writeln!(out, "\t\t\t<xmin>{xmin}</xmin>");
        let _ = writeln!(out, "\t\t\t<ymin>{ymin}</ymin>");
        let _ = writeln!(out, "\t\t\t<xmax>{xmax}</xmax>");
        let _ = writeln!(out, "\t\t\t<ymax>{ymax}</ymax>");
        out.push_str("\t\t</bndbox>\n");
        out.push_str("\t</object>\n");
    }
    out.push_str("</annotation>\n");
    out.into_bytes()
}

/// Edge coordinates to 1-based inclusive indices; every box keeps at least one pixel.
fn to_voc_integers(b: &BBox) -> (i64, i64, i64, i64) {
    let xmin = b.x_min.round() as i64 + 1;
    let ymin = b.y_min.round() as i64 + 1;
    let xmax = (b.x_max.round() as i64).max(xmin);
    let ymax = (b.y_max.round() as i64).max(ymin);
    (xmin, ymin, xmax, ymax)
}

fn child<'a, 'i>(node: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(tag))
}

fn missing(path: &str) -> Error {
    Error::parse(CONTEXT, format!("missing required field `{path}`"))
}

fn required_text(node: Node<'_, '_>, tag: &str, path: &str) -> Result<String> {
    child(node, tag)
        .and_then(|n| n.text())
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| missing(path))
}

fn parse_dimension(size: Node<'_, '_>, tag: &str) -> Result<u32> {
    let text = required_text(size, tag, &format!("size/{tag}"))?;
    text.parse::<u32>().map_err(|_| {
        Error::parse(
            CONTEXT,
            format!("size/{tag}: `{text}` is not a positive integer"),
        )
    })
}

fn coordinate(bndbox: Node<'_, '_>, tag: &str) -> Result<f64> {
    let text = required_text(bndbox, tag, &format!("bndbox/{tag}"))?;
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(CONTEXT, format!("bndbox/{tag}: `{text}` is not a number")))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

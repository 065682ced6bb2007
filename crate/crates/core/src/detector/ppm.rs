//! Netpbm PPM (`P3` ASCII and `P6` binary), 8-bit only.

use super::RasterImage;
use crate::error::{Error, Result};
use crate::geometry::ImageDims;

const CONTEXT: &str = "PPM";

#[derive(Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    Binary,
}

struct Header {
    encoding: Encoding,
    dims: ImageDims,
    /// Offset of the first sample byte (binary) or the first sample token (ASCII).
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::parse(CONTEXT, format!("truncated before {what}"))
            } else {
                Error::parse(CONTEXT, format!("expected a number for {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(CONTEXT, format!("{what} out of range")))
    }
}

fn read_header(bytes: &[u8]) -> Result<Header> {
    let encoding = match bytes.get(..2) {
        Some(b"P3") => Encoding::Ascii,
        Some(b"P6") => Encoding::Binary,
        _ => return Err(Error::parse(CONTEXT, "expected magic number P3 or P6")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::parse(
            CONTEXT,
            format!("maxval {maxval} unsupported, only 255"),
        ));
    }
    let dims = ImageDims::new(width, height).map_err(|e| Error::parse(CONTEXT, e.to_string()))?;
    // exactly one whitespace byte separates maxval from binary samples
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(Error::parse(CONTEXT, "missing whitespace after maxval")),
        None if encoding == Encoding::Binary => {
            return Err(Error::parse(CONTEXT, "truncated after header"))
        }
        None => {}
    }
    Ok(Header {
        encoding,
        dims,
        data_start: cur.pos,
    })
}

/// Dimensions from the header alone.
pub fn read_ppm_dims(bytes: &[u8]) -> Result<ImageDims> {
    read_header(bytes).map(|h| h.dims)
}

pub fn read_ppm(bytes: &[u8]) -> Result<RasterImage> {
    let header = read_header(bytes)?;
    let n = header.dims.pixel_count() * 3;
    let pixels = match header.encoding {
        Encoding::Binary => {
            let data = &bytes[header.data_start..];
            if data.len() < n {
                return Err(Error::parse(
                    CONTEXT,
                    format!("truncated payload: {} of {n} samples", data.len()),
                ));
            }
            data[..n].to_vec()
        }
        Encoding::Ascii => {
            let mut cur = Cursor {
                bytes,
                pos: header.data_start,
            };
            let mut pixels = Vec::with_capacity(n);
            for i in 0..n {
                let v = cur.number(&format!("sample {i}")).map_err(|e| match e {
                    Error::Parse { message, .. } if message.starts_with("truncated") => {
                        Error::parse(CONTEXT, format!("truncated payload: {i} of {n} samples"))
                    }
                    other => other,
                })?;
                if v > 255 {
                    return Err(Error::parse(
                        CONTEXT,
                        format!("sample {i} = {v} exceeds maxval"),
                    ));
                }
                pixels.push(v as u8);
            }
            pixels
        }
    };
    RasterImage::new(header.dims, pixels)
}

/// Binary `P6` encoding.
pub fn write_ppm(img: &RasterImage) -> Vec<u8> {
    let dims = img.dims();
    let mut out = format!("P6\n{} {}\n255\n", dims.width, dims.height).into_bytes();
    out.extend_from_slice(img.samples());
    out
}

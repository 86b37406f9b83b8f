//! Binary portable graymap (P5, maxval 255) plus the `.meta` ppi sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use super::GrayImage;
use crate::error::{Error, Result};

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<(u32, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader {
                offset: start,
                reason: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(|v| (v, start))
            .ok_or_else(|| Error::MalformedHeader {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }
}

/// Decodes a P5 byte stream. The ppi is not stored in the format.
pub fn decode_pgm(bytes: &[u8], ppi: u32) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedHeader {
            offset: 0,
            reason: "missing P5 magic".into(),
        });
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let (width, _) = cur.number("width")?;
    let (height, _) = cur.number("height")?;
    let (maxval, maxval_at) = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader {
            offset: maxval_at,
            reason: format!("zero dimension {width}x{height}"),
        });
    }
    if maxval != 255 {
        return Err(Error::UnsupportedDepth {
            offset: maxval_at,
            maxval,
        });
    }
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::MalformedHeader {
                offset: cur.pos,
                reason: "expected a single whitespace before the payload".into(),
            })
        }
    }
    let expected = width as usize * height as usize;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            offset: cur.pos + payload.len(),
            expected,
            found: payload.len(),
        });
    }
    GrayImage::new(
        width as usize,
        height as usize,
        ppi,
        payload[..expected].to_vec(),
    )
}

/// Canonical encoding: `P5\n<w> <h>\n255\n` followed by the raw bytes.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.pixels());
    out
}

/// `dir/name.pgm` -> `dir/name.meta`.
pub fn meta_path(image_path: &Path) -> PathBuf {
    image_path.with_extension("meta")
}

/// Reads `ppi=<n>` from a `key=value` sidecar. Other keys are ignored.
pub fn read_meta_ppi(path: &Path) -> Result<u32> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(i + 1, format!("expected key=value, got {line:?}")));
        };
        if k.trim() == "ppi" {
            return v
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("invalid ppi {:?}", v.trim())));
        }
    }
    Err(Error::parse(0, format!("{} has no ppi key", path.display())))
}

pub fn write_meta(path: &Path, ppi: u32) -> Result<()> {
    fs::write(path, format!("ppi={ppi}\n")).map_err(|e| Error::io(path, e))
}

/// Loads a P5 image; `ppi` overrides the sidecar when given.
pub fn load_image(path: &Path, ppi: Option<u32>) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let ppi = match ppi {
        Some(p) => p,
        None => read_meta_ppi(&meta_path(path))?,
    };
    decode_pgm(&bytes, ppi)
}

/// Writes the image and its `.meta` sidecar.
pub fn save_image(img: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))?;
    write_meta(&meta_path(path), img.ppi())
}

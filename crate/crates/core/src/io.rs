//! Image file I/O: binary PGM (P5), grayscale PNG (read-only), and TXF.
//!
//! TXF is a small raw-float container for signed layers that 8-bit formats
//! cannot round-trip: magic `TXF1`, little-endian u32 width and height, then
//! `width * height` little-endian f64 samples in row-major order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

const TXF_MAGIC: &[u8; 4] = b"TXF1";

/// Output formats supported by [`save_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaveFormat {
    /// 8-bit PGM; values are clamped to [0, 1] and rounded to 256 levels.
    Pgm8,
    /// Full-precision TXF.
    Txf,
}

/// Loads a PGM (P5), grayscale PNG, or TXF file, sniffing the format from
/// the leading bytes. Integer formats are mapped onto [0, 1]; TXF is loaded
/// verbatim.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path.as_ref())?;
    decode_image(&bytes)
}

/// Decodes an in-memory image (same dispatch as [`load_image`]).
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(TXF_MAGIC) {
        decode_txf(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "unrecognized magic; expected PGM P5, grayscale PNG, or TXF1".into(),
        ))
    }
}

/// Writes `img` to `path` in the requested format.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>, format: SaveFormat) -> Result<()> {
    let bytes = match format {
        SaveFormat::Pgm8 => encode_pgm8(img),
        SaveFormat::Txf => encode_txf(img),
    };
    fs::write(path.as_ref(), bytes)?;
    Ok(())
}

pub fn encode_txf(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + img.data().len() * 8);
    out.extend_from_slice(TXF_MAGIC);
    out.extend_from_slice(&(img.width() as u32).to_le_bytes());
    out.extend_from_slice(&(img.height() as u32).to_le_bytes());
    for &v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_txf(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 12 {
        return Err(Error::Truncated("TXF header".into()));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::UnsupportedFormat("TXF dimensions overflow".into()))?;
    let body = &bytes[12..];
    if body.len() < need {
        return Err(Error::Truncated(format!(
            "TXF body: have {} bytes, need {}",
            body.len(),
            need
        )));
    }
    let data = body[..need]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GrayImage::new(width, height, data)
}

pub fn encode_pgm8(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| pgm8_byte(v)));
    out
}

/// Clamp to [0, 1], then round to the nearest of 256 levels.
#[inline]
fn pgm8_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2; // past "P5"
    let width = read_pgm_int(bytes, &mut pos)?;
    let height = read_pgm_int(bytes, &mut pos)?;
    let maxval = read_pgm_int(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Truncated("PGM raster separator".into())),
    }
    let n = width * height;
    let body = &bytes[pos..];
    let scale = maxval as f64;
    let data: Vec<f64> = if maxval < 256 {
        if body.len() < n {
            return Err(Error::Truncated(format!(
                "PGM raster: have {} bytes, need {n}",
                body.len()
            )));
        }
        body[..n].iter().map(|&b| b as f64 / scale).collect()
    } else {
        // 16-bit samples are big-endian, most significant byte first.
        if body.len() < 2 * n {
            return Err(Error::Truncated(format!(
                "PGM raster: have {} bytes, need {}",
                body.len(),
                2 * n
            )));
        }
        body[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    GrayImage::new(width, height, data)
}

/// Reads one ASCII integer, skipping whitespace and `#` comments.
fn read_pgm_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            Some(_) => return Err(Error::UnsupportedFormat("malformed PGM header".into())),
            None => return Err(Error::Truncated("PGM header".into())),
        }
    }
    let mut v: usize = 0;
    while let Some(&b) = bytes.get(*pos) {
        if b.is_ascii_digit() {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as usize))
                .ok_or_else(|| Error::UnsupportedFormat("PGM header value overflow".into()))?;
            *pos += 1;
        } else {
            break;
        }
    }
    Ok(v)
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let dyn_img = image::load_from_memory(bytes)
        .map_err(|e| Error::UnsupportedFormat(format!("PNG decode: {e}")))?;
    match dyn_img {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data = g.into_raw().iter().map(|&b| b as f64 / 255.0).collect();
            GrayImage::new(w, h, data)
        }
        image::DynamicImage::ImageLuma16(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data = g.into_raw().iter().map(|&b| b as f64 / 65535.0).collect();
            GrayImage::new(w, h, data)
        }
        _ => Err(Error::UnsupportedFormat(
            "unsupported format: PNG is not single-channel grayscale".into(),
        )),
    }
}

//! Binary greyscale PGM (`P5`, maxval 255).

use slider_core::Image;

use crate::error::{Result, StudioError};

fn malformed(msg: impl Into<String>) -> StudioError {
    StudioError::MalformedPgm(msg.into())
}

/// Parses a `P5` file; byte `b` becomes pixel `b / 255`.
pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = header_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(malformed(format!("maxval must be 255, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(malformed("zero-sized image"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed("header not terminated by whitespace")),
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let raster = bytes
        .get(pos..pos + count)
        .ok_or_else(|| malformed(format!("expected {count} pixel bytes, found {}", bytes.len() - pos)))?;
    let pixels = raster.iter().map(|&b| b as f32 / 255.0).collect();
    Ok(Image::new(width, height, pixels)?)
}

fn header_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b) if b.is_ascii_digit() => break,
            Some(_) => return Err(malformed("unexpected byte in header")),
            None => return Err(malformed("truncated header")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed("header number out of range"))
}

/// Encodes an image as `P5`, rounding each pixel to the nearest of 256 levels.
pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(
        image
            .pixels()
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

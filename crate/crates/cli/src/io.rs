//! Image and report I/O.
//!
//! Binary PGM (`P5`, maxval <= 255) is always available and round-trips
//! bit-exactly. PNG (grayscale or RGB) is available with the `png` feature.
//! Every file is written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use spatial_entropy::ImageGrid;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Decoded 8-bit image: `channels` interleaved samples per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image8 {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub maxval: u16,
    pub data: Vec<u8>,
}

impl Image8 {
    /// Intensities as reals on `[0, maxval]`.
    pub fn to_grid(&self) -> Result<ImageGrid, CliError> {
        Ok(ImageGrid::new(
            self.height,
            self.width,
            self.channels,
            self.data.iter().map(|&v| v as f64).collect(),
            (0.0, self.maxval as f64),
        )?)
    }

    /// Rounds and clamps a grid back to 8 bits.
    pub fn from_grid(grid: &ImageGrid) -> Self {
        Self {
            height: grid.height(),
            width: grid.width(),
            channels: grid.channels(),
            maxval: 255,
            data: grid.data().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect(),
        }
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> CliError {
    CliError::Format(format!("{}: {}", path.display(), msg.into()))
}

/// Parses a binary PGM from memory.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image8, CliError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(parse_err(path, "not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Whitespace and `#` comments may precede each header field.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(path, "truncated PGM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, "bad number in PGM header"))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(parse_err(path, "missing separator after PGM header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(parse_err(path, "empty image"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(CliError::Format(format!(
            "{}: only 8-bit PGM is supported (maxval {maxval})",
            path.display()
        )));
    }
    let raster = &bytes[pos..];
    if raster.len() < width * height {
        return Err(parse_err(path, format!("expected {} pixels, found {}", width * height, raster.len())));
    }
    Ok(Image8 {
        height,
        width,
        channels: 1,
        maxval: maxval as u16,
        data: raster[..width * height].to_vec(),
    })
}

pub fn encode_pgm(img: &Image8) -> Result<Vec<u8>, CliError> {
    if img.channels != 1 {
        return Err(CliError::Format(format!("PGM holds one channel, image has {}", img.channels)));
    }
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    out.extend_from_slice(&img.data);
    Ok(out)
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8], path: &Path) -> Result<Image8, CliError> {
    use image::ColorType;
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| parse_err(path, e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, data) = match decoded.color() {
        ColorType::L8 | ColorType::L16 | ColorType::La8 | ColorType::La16 => (1, decoded.to_luma8().into_raw()),
        _ => (3, decoded.to_rgb8().into_raw()),
    };
    Ok(Image8 {
        height,
        width,
        channels,
        maxval: 255,
        data,
    })
}

#[cfg(not(feature = "png"))]
fn decode_png(_bytes: &[u8], path: &Path) -> Result<Image8, CliError> {
    Err(CliError::Format(format!(
        "{}: PNG input needs the `png` feature",
        path.display()
    )))
}

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Loads a PGM or (with the `png` feature) PNG file, sniffing the format.
pub fn read_image(path: &Path) -> Result<Image8, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes, path)
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes, path)
    } else {
        Err(CliError::Format(format!("{}: unsupported image format", path.display())))
    }
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Saves as PGM, or PNG when the path ends in `.png` and the feature is on.
pub fn write_image(path: &Path, img: &Image8) -> Result<(), CliError> {
    let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        return write_png(path, img);
    }
    write_atomic(path, &encode_pgm(img)?)
}

#[cfg(feature = "png")]
fn write_png(path: &Path, img: &Image8) -> Result<(), CliError> {
    use image::{ExtendedColorType, ImageEncoder};
    let color = if img.channels == 1 { ExtendedColorType::L8 } else { ExtendedColorType::Rgb8 };
    let mut buf = Vec::new();
    image::codecs::png::PngEncoder::new(&mut buf)
        .write_image(&img.data, img.width as u32, img.height as u32, color)
        .map_err(|e| CliError::Format(e.to_string()))?;
    write_atomic(path, &buf)
}

#[cfg(not(feature = "png"))]
fn write_png(path: &Path, _img: &Image8) -> Result<(), CliError> {
    Err(CliError::Format(format!("{}: PNG output needs the `png` feature", path.display())))
}

use std::fmt::Write as _;
use std::io::Cursor;
use std::path::Path;

use image::{ColorType, ImageEncoder, ImageFormat};

use super::LabelMap;
use crate::error::{Error, Result};

/// Supported on-disk raster formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// 8-bit single-channel PNG.
    Png8,
    /// ASCII graymap (`P2`).
    Pgm,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Format::Png8),
            "pgm" => Some(Format::Pgm),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Png8 => "png",
            Format::Pgm => "pgm",
        }
    }
}

pub fn load_labelmap(bytes: &[u8], format: Format) -> Result<LabelMap> {
    match format {
        Format::Png8 => load_png(bytes),
        Format::Pgm => load_pgm(bytes),
    }
}

pub fn save_labelmap(map: &LabelMap, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Png8 => save_png(map),
        Format::Pgm => Ok(save_pgm(map).into_bytes()),
    }
}

/// Reads a label map, picking the format from the file extension.
pub fn read_labelmap(path: &Path) -> Result<LabelMap> {
    let format = Format::from_path(path).ok_or_else(|| Error::Malformed {
        format: "label map",
        reason: format!("unsupported extension on {}", path.display()),
    })?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_labelmap(&bytes, format)
}

pub fn write_labelmap(path: &Path, map: &LabelMap) -> Result<()> {
    let format = Format::from_path(path).ok_or_else(|| Error::Malformed {
        format: "label map",
        reason: format!("unsupported extension on {}", path.display()),
    })?;
    let bytes = save_labelmap(map, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_png(bytes: &[u8]) -> Result<LabelMap> {
    let malformed = |reason: String| Error::Malformed {
        format: "PNG",
        reason,
    };
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| malformed(e.to_string()))?;
    if img.color() != ColorType::L8 {
        return Err(malformed(format!(
            "expected 8-bit single-channel data, found {:?}",
            img.color()
        )));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    LabelMap::new(w, h, img.into_luma8().into_raw())
}

fn save_png(map: &LabelMap) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(Cursor::new(&mut out))
        .write_image(
            map.labels(),
            map.width() as u32,
            map.height() as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Malformed {
            format: "PNG",
            reason: e.to_string(),
        })?;
    Ok(out)
}

fn load_pgm(bytes: &[u8]) -> Result<LabelMap> {
    let malformed = |reason: String| Error::Malformed {
        format: "PGM",
        reason,
    };
    let text = std::str::from_utf8(bytes).map_err(|_| malformed("not ASCII text".into()))?;
    let mut tokens = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);

    match tokens.next() {
        Some("P2") => {}
        Some(magic) => return Err(malformed(format!("unsupported magic {magic:?}"))),
        None => return Err(malformed("empty file".into())),
    }
    let mut header = |name: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| malformed(format!("missing {name}")))?
            .parse::<usize>()
            .map_err(|e| malformed(format!("bad {name}: {e}")))
    };
    let width = header("width")?;
    let height = header("height")?;
    let maxval = header("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} outside 1..=65535")));
    }

    let mut labels = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let tok = tokens
            .next()
            .ok_or_else(|| malformed(format!("expected {} samples, found {i}", width * height)))?;
        let value: u32 = tok
            .parse()
            .map_err(|e| malformed(format!("bad sample {tok:?}: {e}")))?;
        if value as usize > maxval {
            return Err(malformed(format!("sample {value} exceeds maxval {maxval}")));
        }
        if value > super::MAX_LABEL as u32 {
            return Err(Error::LabelOutOfRange {
                x: i % width,
                y: i / width,
                value,
            });
        }
        labels.push(value as u8);
    }
    if tokens.next().is_some() {
        return Err(malformed("trailing data after samples".into()));
    }
    LabelMap::new(width, height, labels)
}

fn save_pgm(map: &LabelMap) -> String {
    let mut s = format!("P2\n{} {}\n255\n", map.width(), map.height());
    for row in map.labels().chunks(map.width()) {
        let mut first = true;
        for v in row {
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

//! Instance label maps: the raster every other stage consumes and produces.
//!
//! A [`LabelMap`] stores one tooth id per pixel in row-major order, with `0`
//! for background and `1..=32` for teeth. Coordinates follow the image
//! convention used throughout the crate: `x` is the column (growing to the
//! right), `y` is the row (growing downwards), and `(0, 0)` is the top-left
//! pixel.

mod components;
mod io;
mod patch;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub use components::{extract_instances, Instance, InstanceSummary};
pub use io::{load_labelmap, read_labelmap, save_labelmap, write_labelmap, Format};
pub use patch::{patchify, stitch, Patch, PatchGrid, DEFAULT_OVERLAP, DEFAULT_PATCH_SIZE};

/// Largest valid tooth label.
pub const MAX_LABEL: u8 = 32;

/// Offsets of the 8-neighbourhood, clockwise starting at west.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    /// Builds a map from row-major labels, validating size and label range.
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if labels.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: format!("grid holds {} cells", labels.len()),
            });
        }
        if let Some(i) = labels.iter().position(|&v| v > MAX_LABEL) {
            return Err(Error::LabelOutOfRange {
                x: i % width,
                y: i / width,
                value: labels[i] as u32,
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// An all-background map.
    pub fn background(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            labels: vec![0; width * height],
        })
    }

    /// Convenience constructor from nested rows, mostly for fixtures.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut labels = Vec::with_capacity(width * height);
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::InvalidDimensions {
                    width,
                    height,
                    reason: "ragged rows".into(),
                });
            }
            labels.extend_from_slice(row);
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    /// Sets one pixel. Panics if `label > 32` or the pixel is out of bounds.
    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        assert!(label <= MAX_LABEL, "label {label} out of range");
        self.labels[y * self.width + x] = label;
    }

    /// Label at a signed coordinate, `None` outside the image.
    #[inline]
    pub(crate) fn get_signed(&self, x: isize, y: isize) -> Option<u8> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    /// The set of non-background labels occurring in the map.
    pub fn present_labels(&self) -> BTreeSet<u8> {
        self.labels.iter().copied().filter(|&v| v != 0).collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.labels.iter().filter(|&&v| v != 0).count()
    }

    /// Binary mask of the pixels carrying `label`.
    pub fn mask_of(&self, label: u8) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&v| v == label).collect(),
        }
    }

    /// Copies out the `width`×`height` window whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<LabelMap> {
        if x + width > self.width || y + height > self.height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: format!("window at ({x}, {y}) leaves the image"),
            });
        }
        let mut labels = Vec::with_capacity(width * height);
        for row in y..y + height {
            let start = row * self.width + x;
            labels.extend_from_slice(&self.labels[start..start + width]);
        }
        LabelMap::new(width, height, labels)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be positive".into(),
        });
    }
    Ok(())
}

/// A binary raster, `true` marking foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: format!("mask holds {} cells", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Scales raw intensities into `[0, 1]` by the largest value representable
/// at `bit_depth` bits (255 for 8-bit data).
///
/// Values are clamped after division, so out-of-range input cannot escape
/// the unit interval.
pub fn normalize_intensity(values: &[f64], bit_depth: u32) -> Result<Vec<f64>> {
    if bit_depth == 0 || bit_depth > 32 {
        return Err(Error::InvalidParameter(format!(
            "bit depth {bit_depth} outside 1..=32"
        )));
    }
    let max = ((1u64 << bit_depth) - 1) as f64;
    values
        .iter()
        .map(|&v| {
            if v.is_finite() {
                Ok((v / max).clamp(0.0, 1.0))
            } else {
                Err(Error::InvalidParameter(format!("non-finite intensity {v}")))
            }
        })
        .collect()
}

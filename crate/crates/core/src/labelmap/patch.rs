use super::LabelMap;
use crate::error::{Error, Result};

pub const DEFAULT_PATCH_SIZE: usize = 512;
/// Overlap between adjacent patches, in pixels per axis.
pub const DEFAULT_OVERLAP: usize = 10;

/// Sliding-window layout of square patches over an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchGrid {
    pub patch_size: usize,
    pub stride: usize,
    pub width: usize,
    pub height: usize,
    /// Top-left corners `(x, y)`, row-major.
    pub origins: Vec<(usize, usize)>,
}

/// Lays out `patch_size` windows with `overlap` pixels shared between
/// neighbours. The last window along each axis is pulled back so that it
/// ends exactly at the image border.
pub fn patchify(
    width: usize,
    height: usize,
    patch_size: usize,
    overlap: usize,
) -> Result<PatchGrid> {
    if patch_size == 0 || patch_size > width || patch_size > height {
        return Err(Error::PatchTooLarge {
            patch_size,
            width,
            height,
        });
    }
    if overlap >= patch_size {
        return Err(Error::InvalidOverlap {
            overlap,
            patch_size,
        });
    }
    let stride = patch_size - overlap;
    let xs = axis_origins(width, patch_size, stride);
    let ys = axis_origins(height, patch_size, stride);
    let origins = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect();
    Ok(PatchGrid {
        patch_size,
        stride,
        width,
        height,
        origins,
    })
}

fn axis_origins(dim: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut o = 0;
    loop {
        out.push(o.min(dim - size));
        if o + size >= dim {
            break;
        }
        o += stride;
    }
    out
}

/// A window cut from a larger map.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub origin: (usize, usize),
    pub map: LabelMap,
}

impl PatchGrid {
    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// Cuts `map` along this grid.
    pub fn cut(&self, map: &LabelMap) -> Result<Vec<Patch>> {
        if (map.width(), map.height()) != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.width, self.height),
                actual: format!("{}x{}", map.width(), map.height()),
            });
        }
        self.origins
            .iter()
            .map(|&(x, y)| {
                Ok(Patch {
                    origin: (x, y),
                    map: map.crop(x, y, self.patch_size, self.patch_size)?,
                })
            })
            .collect()
    }
}

/// Reassembles patches into a `width`×`height` map.
///
/// Patches are painted in row-major order of their origins, so in overlaps
/// the later origin wins. Every pixel must be covered by some patch.
pub fn stitch(patches: &[Patch], width: usize, height: usize) -> Result<LabelMap> {
    let mut out = LabelMap::background(width, height)?;
    let mut covered = vec![false; width * height];

    let mut order: Vec<&Patch> = patches.iter().collect();
    order.sort_by_key(|p| (p.origin.1, p.origin.0));

    for p in order {
        let (ox, oy) = p.origin;
        if ox + p.map.width() > width || oy + p.map.height() > height {
            return Err(Error::DimensionMismatch {
                expected: format!("patch inside {width}x{height}"),
                actual: format!("{}x{} patch at ({ox}, {oy})", p.map.width(), p.map.height()),
            });
        }
        for y in 0..p.map.height() {
            for x in 0..p.map.width() {
                out.set(ox + x, oy + y, p.map.get(x, y));
                covered[(oy + y) * width + ox + x] = true;
            }
        }
    }

    if let Some(i) = covered.iter().position(|&c| !c) {
        return Err(Error::CoverageGap {
            x: i % width,
            y: i / width,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_patch() {
        let g = patchify(512, 512, 512, 10).unwrap();
        assert_eq!(g.origins, vec![(0, 0)]);
    }

    #[test]
    fn stride_arithmetic() {
        let g = patchify(1014, 512, 512, 10).unwrap();
        assert_eq!(g.stride, 502);
        assert_eq!(g.origins, vec![(0, 0), (502, 0)]);
    }

    #[test]
    fn clamped_last_origins() {
        let g = patchify(1991, 1127, 512, 10).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(axis_origins(1991, 512, 502), vec![0, 502, 1004, 1479]);
        assert_eq!(axis_origins(1127, 512, 502), vec![0, 502, 615]);
        assert_eq!(*g.origins.last().unwrap(), (1479, 615));
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(matches!(
            patchify(100, 600, 512, 10),
            Err(Error::PatchTooLarge { .. })
        ));
        assert!(matches!(
            patchify(600, 600, 512, 512),
            Err(Error::InvalidOverlap { .. })
        ));
    }

    #[test]
    fn stitch_identity_and_agreement() {
        let m = LabelMap::from_rows(&[[1u8, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        let whole = [Patch {
            origin: (0, 0),
            map: m.clone(),
        }];
        assert_eq!(stitch(&whole, 3, 3).unwrap(), m);

        let g = patchify(3, 3, 2, 1).unwrap();
        let patches = g.cut(&m).unwrap();
        assert_eq!(patches.len(), 4);
        assert_eq!(stitch(&patches, 3, 3).unwrap(), m);
    }

    #[test]
    fn later_origin_wins_in_overlap() {
        // Two 12x4 patches over a 14x4 image share a 10-pixel band.
        let left = LabelMap::new(12, 4, vec![1; 48]).unwrap();
        let right = LabelMap::new(12, 4, vec![2; 48]).unwrap();
        let patches = [
            Patch {
                origin: (2, 0),
                map: right,
            },
            Patch {
                origin: (0, 0),
                map: left,
            },
        ];
        let out = stitch(&patches, 14, 4).unwrap();
        for y in 0..4 {
            assert_eq!(out.get(0, y), 1);
            assert_eq!(out.get(1, y), 1);
            for x in 2..14 {
                assert_eq!(out.get(x, y), 2);
            }
        }
    }

    #[test]
    fn coverage_gap_is_reported() {
        let p = Patch {
            origin: (0, 0),
            map: LabelMap::background(2, 2).unwrap(),
        };
        assert!(matches!(
            stitch(&[p], 3, 2),
            Err(Error::CoverageGap { x: 2, y: 0 })
        ));
    }
}

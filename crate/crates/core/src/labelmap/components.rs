use serde::{Deserialize, Serialize};

use super::{LabelMap, NEIGHBORS_8};

/// One 8-connected region of a single label.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub label: u8,
    /// Member pixels as `(x, y)`, row-major sorted.
    pub pixels: Vec<(usize, usize)>,
    pub area: usize,
    pub centroid: (f64, f64),
}

impl Instance {
    /// Builds an instance from its pixels, sorting them and deriving area and centroid.
    pub fn from_pixels(label: u8, mut pixels: Vec<(usize, usize)>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let area = pixels.len();
        let (sx, sy) = pixels.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| {
            (sx + x as f64, sy + y as f64)
        });
        let n = area.max(1) as f64;
        Self {
            label,
            pixels,
            area,
            centroid: (sx / n, sy / n),
        }
    }

    /// First pixel in row-major scan order.
    pub fn top_left(&self) -> (usize, usize) {
        self.pixels[0]
    }

    /// Inclusive pixel bounds `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [usize; 4] {
        let mut b = [usize::MAX, usize::MAX, 0, 0];
        for &(x, y) in &self.pixels {
            b[0] = b[0].min(x);
            b[1] = b[1].min(y);
            b[2] = b[2].max(x);
            b[3] = b[3].max(y);
        }
        b
    }

    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            label: self.label,
            area: self.area,
            centroid: [self.centroid.0, self.centroid.1],
            bbox: self.bbox(),
        }
    }
}

/// The JSON shape of an instance dump entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub label: u8,
    pub area: usize,
    pub centroid: [f64; 2],
    pub bbox: [usize; 4],
}

/// Splits every non-background label into its 8-connected components.
///
/// Instances come back sorted by label, then by the row-major position of
/// each component's first pixel.
pub fn extract_instances(map: &LabelMap) -> Vec<Instance> {
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        let label = map.labels()[start];
        if label == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if map.get_signed(nx, ny) == Some(label) {
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push(Instance::from_pixels(label, pixels));
    }

    // Scan order already sorts by first pixel; a stable sort keeps it within a label.
    out.sort_by_key(|inst| inst.label);
    out
}

//! Moore-neighbour boundary tracing with Freeman chain codes.

use crate::labelmap::{Instance, NEIGHBORS_8};

/// Freeman direction offsets `(dx, dy)` in image coordinates (y down):
/// 0 = E, 1 = NE, 2 = N, 3 = NW, 4 = W, 5 = SW, 6 = S, 7 = SE.
pub const FREEMAN: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// An 8-directional chain code anchored at `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCode {
    pub start: (usize, usize),
    pub moves: Vec<u8>,
}

impl ChainCode {
    /// Replays the moves, yielding `start` followed by every visited pixel.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let (mut x, mut y) = (self.start.0 as isize, self.start.1 as isize);
        out.push(self.start);
        for &m in &self.moves {
            let (dx, dy) = FREEMAN[m as usize];
            x += dx;
            y += dy;
            out.push((x as usize, y as usize));
        }
        out
    }
}

/// Bounding-box-local occupancy grid for fast membership tests.
pub(crate) struct RegionGrid {
    x0: isize,
    y0: isize,
    w: isize,
    h: isize,
    bits: Vec<bool>,
}

impl RegionGrid {
    pub(crate) fn new(region: &Instance) -> Self {
        let [xmin, ymin, xmax, ymax] = region.bbox();
        let (w, h) = (xmax - xmin + 1, ymax - ymin + 1);
        let mut bits = vec![false; w * h];
        for &(x, y) in &region.pixels {
            bits[(y - ymin) * w + (x - xmin)] = true;
        }
        Self {
            x0: xmin as isize,
            y0: ymin as isize,
            w: w as isize,
            h: h as isize,
            bits,
        }
    }

    #[inline]
    pub(crate) fn contains(&self, x: isize, y: isize) -> bool {
        let (lx, ly) = (x - self.x0, y - self.y0);
        lx >= 0 && ly >= 0 && lx < self.w && ly < self.h && self.bits[(ly * self.w + lx) as usize]
    }
}

/// Pixels of `region` that touch the image edge or have at least one
/// 8-neighbour outside the region, in row-major order.
pub fn border_pixels(region: &Instance, width: usize, height: usize) -> Vec<(usize, usize)> {
    let grid = RegionGrid::new(region);
    region
        .pixels
        .iter()
        .copied()
        .filter(|&(x, y)| {
            NEIGHBORS_8.iter().any(|&(dx, dy)| {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                nx < 0
                    || ny < 0
                    || nx as usize >= width
                    || ny as usize >= height
                    || !grid.contains(nx, ny)
            })
        })
        .collect()
}

/// Traces the outer boundary of `region` clockwise, starting from its
/// top-left-most pixel.
///
/// Tracing stops when the walk is about to repeat its first move, so the
/// chain returns to `start`. A single pixel yields no moves.
pub fn trace_border(region: &Instance) -> ChainCode {
    let grid = RegionGrid::new(region);
    let start = region.top_left();
    let start_s = (start.0 as isize, start.1 as isize);

    // The west neighbour of the first pixel in scan order is never in the region.
    let mut cur = start_s;
    let mut back = 0usize;
    let mut moves = Vec::new();
    let mut second = None;
    let limit = 4 * region.area + 8;

    while moves.len() <= limit {
        let Some((next, dir)) = (1..=8).find_map(|i| {
            let idx = (back + i) % 8;
            let (dx, dy) = NEIGHBORS_8[idx];
            let p = (cur.0 + dx, cur.1 + dy);
            grid.contains(p.0, p.1).then_some((p, idx))
        }) else {
            break;
        };

        if cur == start_s && second == Some(next) {
            break;
        }
        if second.is_none() {
            second = Some(next);
        }

        // The cell examined just before `next` becomes the new backtrack point.
        let (bdx, bdy) = NEIGHBORS_8[(dir + 7) % 8];
        let rel = (cur.0 + bdx - next.0, cur.1 + bdy - next.1);
        back = NEIGHBORS_8
            .iter()
            .position(|&o| o == rel)
            .expect("backtrack cell is adjacent to the next pixel");

        let delta = (next.0 - cur.0, next.1 - cur.1);
        let code = FREEMAN.iter().position(|&o| o == delta).expect("unit step");
        moves.push(code as u8);
        cur = next;
    }

    ChainCode { start, moves }
}

//! Fixtures and reference implementations shared by the integration tests.
#![allow(dead_code)]

use dentobox::labelmap::LabelMap;
use dentobox::obb::{Obb, Point};
use rand::rngs::StdRng;
use rand::Rng;

/// Horizontal extent of a convex polygon at height `y`, if it crosses it.
fn span(poly: &[Point], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ya, yb) = (a.y.min(b.y), a.y.max(b.y));
        if y < ya || y > yb || a.y == b.y {
            continue;
        }
        let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo <= hi).then_some((lo, hi))
}

/// Area-based IoU by scanline integration over `rows` horizontal strips of
/// the joint bounding box, sampling each strip at its centre line.
pub fn raster_iou(a: &Obb, b: &Obb, rows: usize) -> f64 {
    let ys = a.corners.iter().chain(&b.corners).map(|p| p.y);
    let y0 = ys.clone().fold(f64::INFINITY, f64::min);
    let y1 = ys.fold(f64::NEG_INFINITY, f64::max);
    let dy = (y1 - y0) / rows as f64;
    let (mut inter, mut union) = (0.0, 0.0);
    for r in 0..rows {
        let y = y0 + (r as f64 + 0.5) * dy;
        let sa = span(&a.corners, y);
        let sb = span(&b.corners, y);
        let la = sa.map_or(0.0, |(l, h)| h - l);
        let lb = sb.map_or(0.0, |(l, h)| h - l);
        let li = match (sa, sb) {
            (Some((al, ah)), Some((bl, bh))) => (ah.min(bh) - al.max(bl)).max(0.0),
            _ => 0.0,
        };
        inter += li;
        union += la + lb - li;
    }
    if union == 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Map with `label` on every pixel whose centre lies inside `rect`.
pub fn raster_rect(width: usize, height: usize, rect: &Obb, label: u8) -> LabelMap {
    let mut map = LabelMap::background(width, height).unwrap();
    for y in 0..height {
        for x in 0..width {
            if rect.contains(Point::new(x as f64, y as f64), 0.0) {
                map.set(x, y, label);
            }
        }
    }
    map
}

/// Filled ellipse with semi-axes `a` (along `angle` degrees) and `b`.
pub fn raster_ellipse(
    width: usize,
    height: usize,
    center: Point,
    a: f64,
    b: f64,
    angle: f64,
    label: u8,
) -> LabelMap {
    let (s, c) = angle.to_radians().sin_cos();
    let mut map = LabelMap::background(width, height).unwrap();
    for y in 0..height {
        for x in 0..width {
            let (dx, dy) = (x as f64 - center.x, y as f64 - center.y);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                map.set(x, y, label);
            }
        }
    }
    map
}

/// Paints `count` random rectangles drawn from `labels` onto a blank map.
/// Later rectangles overwrite earlier ones, so labels often end up split.
pub fn random_blobs(
    rng: &mut StdRng,
    width: usize,
    height: usize,
    count: usize,
    labels: &[u8],
) -> LabelMap {
    let mut map = LabelMap::background(width, height).unwrap();
    for _ in 0..count {
        let label = labels[rng.random_range(0..labels.len())];
        let w = rng.random_range(1..=width / 3);
        let h = rng.random_range(1..=height / 3);
        let x0 = rng.random_range(0..width - w + 1);
        let y0 = rng.random_range(0..height - h + 1);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                map.set(x, y, label);
            }
        }
    }
    map
}

/// A row of separate rectangular "teeth", one per label.
pub fn tooth_row(labels: &[u8]) -> LabelMap {
    let width = labels.len() * 8 + 2;
    let mut map = LabelMap::background(width, 20).unwrap();
    for (i, &label) in labels.iter().enumerate() {
        for y in 3..17 {
            for x in 2 + i * 8..2 + i * 8 + 5 {
                map.set(x, y, label);
            }
        }
    }
    map
}

/// Smallest angular distance between two undirected axes, in degrees.
pub fn axis_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

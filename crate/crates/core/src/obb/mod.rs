//! Oriented bounding boxes from principal component analysis.
//!
//! Each tooth is handled on its own:
//!
//! 1. isolate the tooth as a binary mask,
//! 2. find the angle of its first principal axis against the horizontal,
//! 3. rotate the pixel centres about the mask centroid so that axis is vertical,
//! 4. take the axis-aligned box of the rotated points,
//! 5. rotate that box's corners back by the opposite angle.
//!
//! All angles are in degrees and measured in image coordinates (x right,
//! y down). A positive angle therefore turns from +x towards +y, which is
//! clockwise on screen.

mod export;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelmap::{BinaryMask, LabelMap};

pub use export::{export_obbs, import_obbs, ObbDocument, ObbRecord};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaResult {
    /// Angle of the first principal axis, in `(-90, 90]`.
    pub pca_angle: f64,
    /// `[λ1, λ2]` with `λ1 >= λ2 >= 0`.
    pub eigenvalues: [f64; 2],
    /// Mask centroid.
    pub pivot: Point,
}

/// Horizontal (axis-aligned) bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hbb {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Hbb {
    /// Corners in cyclic order starting at `(xmin, ymin)`.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obb {
    pub label: u8,
    /// Corners in cyclic order, the first one mapped from the upright box's `(xmin, ymin)`.
    pub corners: [Point; 4],
    /// Rotation that brought the tooth upright.
    pub theta: f64,
    pub pivot: Point,
    pub pca_angle: f64,
}

impl Obb {
    /// A `width`×`height` rectangle centred on `center`, its width axis
    /// turned by `angle` degrees. Handy for fixtures and synthetic data.
    pub fn rectangle(label: u8, center: Point, width: f64, height: f64, angle: f64) -> Obb {
        let (s, c) = angle.to_radians().sin_cos();
        let (hw, hh) = (width / 2.0, height / 2.0);
        let corner =
            |u: f64, v: f64| Point::new(center.x + u * c - v * s, center.y + u * s + v * c);
        Obb {
            label,
            corners: [
                corner(-hw, -hh),
                corner(hw, -hh),
                corner(hw, hh),
                corner(-hw, hh),
            ],
            theta: 0.0,
            pivot: center,
            pca_angle: angle,
        }
    }

    /// Shoelace area (always non-negative).
    pub fn area(&self) -> f64 {
        crate::metrics::polygon_area(&self.corners).abs()
    }

    /// Whether `p` lies inside or within `tol` of the box.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let orient = crate::metrics::polygon_area(&self.corners).signum();
        (0..4).all(|i| {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let len = a.distance(b);
            if len == 0.0 {
                return true;
            }
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            orient * cross / len >= -tol
        })
    }
}

/// Keeps only the pixels carrying `label`.
pub fn isolate_tooth(map: &LabelMap, label: u8) -> Result<BinaryMask> {
    let mask = map.mask_of(label);
    if label == 0 || mask.count() == 0 {
        return Err(Error::MissingLabel(label));
    }
    Ok(mask)
}

/// Principal axes of the foreground pixel coordinates.
pub fn pca(mask: &BinaryMask) -> Result<PcaResult> {
    let points: Vec<Point> = mask
        .pixels()
        .map(|(x, y)| Point::new(x as f64, y as f64))
        .collect();
    pca_points(&points)
}

/// Same as [`pca`] on an explicit point set.
///
/// Covariance uses population normalisation. When the two eigenvalues are
/// equal to within `1e-9·λ1` the orientation is undefined and the angle is
/// reported as 90°, which makes the box axis-aligned.
pub fn pca_points(points: &[Point]) -> Result<PcaResult> {
    if points.len() < 2 {
        return Err(Error::DegenerateMask(format!(
            "{} pixel(s), need at least 2",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let (a, c, b) = (sxx / n, syy / n, sxy / n);

    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = mean + radius;
    let l2 = (mean - radius).max(0.0);
    if l1.is_nan() || l1 <= 0.0 {
        return Err(Error::DegenerateMask("zero covariance".into()));
    }

    let pca_angle = if l1 - l2 < 1e-9 * l1 {
        90.0
    } else {
        let mut angle = 0.5 * (2.0 * b).atan2(a - c).to_degrees();
        if angle <= -90.0 {
            angle += 180.0;
        }
        angle
    };

    Ok(PcaResult {
        pca_angle,
        eigenvalues: [l1, l2],
        pivot: Point::new(cx, cy),
    })
}

/// Rotation that stands the first principal axis upright.
pub fn rotation_theta(pca_angle: f64) -> f64 {
    if pca_angle < 0.0 {
        180.0 + (90.0 - pca_angle)
    } else {
        90.0 - pca_angle
    }
}

/// Homogeneous matrix rotating by `theta` degrees about `pivot`.
pub fn rotation_matrix(theta: f64, pivot: Point) -> [[f64; 3]; 3] {
    let (s, c) = theta.to_radians().sin_cos();
    let (xc, yc) = (pivot.x, pivot.y);
    [
        [c, -s, xc * (1.0 - c) + yc * s],
        [s, c, yc * (1.0 - c) - xc * s],
        [0.0, 0.0, 1.0],
    ]
}

pub fn rotate_points(points: &[Point], theta: f64, pivot: Point) -> Vec<Point> {
    let m = rotation_matrix(theta, pivot);
    points
        .iter()
        .map(|p| {
            Point::new(
                m[0][0] * p.x + m[0][1] * p.y + m[0][2],
                m[1][0] * p.x + m[1][1] * p.y + m[1][2],
            )
        })
        .collect()
}

pub fn hbb(points: &[Point]) -> Result<Hbb> {
    let first = points.first().ok_or(Error::EmptyPoints)?;
    Ok(points.iter().fold(
        Hbb {
            xmin: first.x,
            ymin: first.y,
            xmax: first.x,
            ymax: first.y,
        },
        |b, p| Hbb {
            xmin: b.xmin.min(p.x),
            ymin: b.ymin.min(p.y),
            xmax: b.xmax.max(p.x),
            ymax: b.ymax.max(p.y),
        },
    ))
}

/// Intermediate results of [`generate_obb`], exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ObbTrace {
    pub pca: PcaResult,
    pub theta: f64,
    pub upright: Vec<Point>,
    pub upright_box: Hbb,
    pub obb: Obb,
}

pub fn generate_obb(map: &LabelMap, label: u8) -> Result<Obb> {
    Ok(generate_obb_traced(map, label)?.obb)
}

pub fn generate_obb_traced(map: &LabelMap, label: u8) -> Result<ObbTrace> {
    let mask = isolate_tooth(map, label)?;
    let points: Vec<Point> = mask
        .pixels()
        .map(|(x, y)| Point::new(x as f64, y as f64))
        .collect();
    let pca = pca_points(&points)?;
    let theta = rotation_theta(pca.pca_angle);
    let upright = rotate_points(&points, theta, pca.pivot);
    let upright_box = hbb(&upright)?;
    let back = rotate_points(&upright_box.corners(), -theta, pca.pivot);
    let obb = Obb {
        label,
        corners: [back[0], back[1], back[2], back[3]],
        theta,
        pivot: pca.pivot,
        pca_angle: pca.pca_angle,
    };
    Ok(ObbTrace {
        pca,
        theta,
        upright,
        upright_box,
        obb,
    })
}

/// Boxes every tooth in `map`. Labels whose mask is degenerate are returned
/// separately with the reason.
pub fn generate_obbs(map: &LabelMap) -> (Vec<Obb>, Vec<(u8, Error)>) {
    let mut boxes = Vec::new();
    let mut skipped = Vec::new();
    for label in map.present_labels() {
        match generate_obb(map, label) {
            Ok(obb) => boxes.push(obb),
            Err(e) => skipped.push((label, e)),
        }
    }
    (boxes, skipped)
}

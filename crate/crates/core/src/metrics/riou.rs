//! Rotated IoU via convex polygon clipping.

use crate::obb::{Obb, Point};

/// Signed shoelace area; positive when the vertices turn from +x towards +y.
pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let o = poly[0];
    let mut acc = 0.0;
    for i in 1..poly.len() - 1 {
        let (a, b) = (poly[i], poly[i + 1]);
        acc += (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
    }
    0.5 * acc
}

#[inline]
fn cross(a: Point, b: Point, p: Point) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

/// Sutherland–Hodgman: clips `subject` against every edge of the convex,
/// positively oriented polygon `clip`.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let s = input[(j + input.len() - 1) % input.len()];
            let e = input[j];
            let (ds, de) = (cross(a, b, s), cross(a, b, e));
            if de >= 0.0 {
                if ds < 0.0 {
                    output.push(intersect(s, e, ds, de));
                }
                output.push(e);
            } else if ds >= 0.0 {
                output.push(intersect(s, e, ds, de));
            }
        }
    }
    output
}

fn intersect(s: Point, e: Point, ds: f64, de: f64) -> Point {
    let t = ds / (ds - de);
    Point::new(s.x + t * (e.x - s.x), s.y + t * (e.y - s.y))
}

fn positively_oriented(corners: &[Point; 4]) -> [Point; 4] {
    if polygon_area(corners) < 0.0 {
        let mut c = *corners;
        c.reverse();
        c
    } else {
        *corners
    }
}

fn same_polygon(a: &[Point; 4], b: &[Point; 4]) -> bool {
    (0..4).any(|shift| {
        (0..4).all(|i| a[i] == b[(i + shift) % 4]) || (0..4).all(|i| a[i] == b[(shift + 4 - i) % 4])
    })
}

/// Intersection over union of two oriented boxes.
///
/// Boxes with zero area score 0 unless both boxes are the same polygon.
pub fn rotated_iou(a: &Obb, b: &Obb) -> f64 {
    if same_polygon(&a.corners, &b.corners) {
        return 1.0;
    }
    let (pa, pb) = (
        positively_oriented(&a.corners),
        positively_oriented(&b.corners),
    );
    let (area_a, area_b) = (polygon_area(&pa), polygon_area(&pb));
    if area_a <= 0.0 || area_b <= 0.0 {
        return 0.0;
    }
    let inter = polygon_area(&clip_convex(&pa, &pb))
        .abs()
        .min(area_a.min(area_b));
    let union = area_a + area_b - inter;
    (inter / union).clamp(0.0, 1.0)
}

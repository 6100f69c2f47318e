use serde::{Deserialize, Serialize};

use super::{Obb, Point};
use crate::error::Result;

/// One image's worth of boxes, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbDocument {
    pub image: String,
    pub teeth: Vec<ObbRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbRecord {
    pub label: u8,
    pub pca_angle_deg: f64,
    pub theta_deg: f64,
    pub pivot: [f64; 2],
    pub corners: [[f64; 2]; 4],
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (v * scale).round() / scale;
    // Avoid emitting "-0.0".
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl From<&Obb> for ObbRecord {
    fn from(o: &Obb) -> Self {
        ObbRecord {
            label: o.label,
            pca_angle_deg: round_to(o.pca_angle, 4),
            theta_deg: round_to(o.theta, 4),
            pivot: [round_to(o.pivot.x, 2), round_to(o.pivot.y, 2)],
            corners: o.corners.map(|c| [round_to(c.x, 2), round_to(c.y, 2)]),
        }
    }
}

impl From<&ObbRecord> for Obb {
    fn from(r: &ObbRecord) -> Self {
        Obb {
            label: r.label,
            corners: r.corners.map(|[x, y]| Point::new(x, y)),
            theta: r.theta_deg,
            pivot: Point::new(r.pivot[0], r.pivot[1]),
            pca_angle: r.pca_angle_deg,
        }
    }
}

impl ObbDocument {
    pub fn new(image: impl Into<String>, obbs: &[Obb]) -> Self {
        let mut teeth: Vec<ObbRecord> = obbs.iter().map(ObbRecord::from).collect();
        teeth.sort_by_key(|r| r.label);
        ObbDocument {
            image: image.into(),
            teeth,
        }
    }

    pub fn obbs(&self) -> Vec<Obb> {
        self.teeth.iter().map(Obb::from).collect()
    }
}

/// Serialises boxes for one image. Teeth are sorted by label and corners
/// rounded to two decimals, so the output is stable across runs.
pub fn export_obbs(image: &str, obbs: &[Obb]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ObbDocument::new(image, obbs))?;
    s.push('\n');
    Ok(s)
}

pub fn import_obbs(json: &str) -> Result<ObbDocument> {
    Ok(serde_json::from_str(json)?)
}

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::category::{category_of, ToothCategory};
use super::confusion::{confusion, ConfusionCounts};
use super::loss::{combined_loss, LossConfig};
use super::riou::rotated_iou;
use crate::error::{Error, Result};
use crate::labelmap::LabelMap;
use crate::obb::Obb;

/// Metric values in `[0, 1]`. `riou` is absent when no ground-truth box exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub dsc: f64,
    pub iou: f64,
    pub riou: Option<f64>,
}

/// One ground-truth tooth in one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub label: u8,
    pub counts: ConfusionCounts,
    pub scores: Scores,
    /// Combined dice + focal loss of the hard prediction for this tooth.
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelRow {
    pub label: u8,
    pub category: ToothCategory,
    /// Number of observations averaged into this row.
    pub samples: usize,
    pub scores: Scores,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRow {
    pub category: ToothCategory,
    /// Member labels that had at least one observation.
    pub labels: Vec<u8>,
    pub scores: Option<Scores>,
}

/// Tooth-level detection errors: predicted teeth with no ground truth (`fp`)
/// and ground-truth teeth with no prediction (`fn`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MissingTeeth {
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl std::ops::Add for MissingTeeth {
    type Output = MissingTeeth;

    fn add(self, o: MissingTeeth) -> MissingTeeth {
        MissingTeeth {
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn missing_teeth(pred: &BTreeSet<u8>, gt: &BTreeSet<u8>) -> MissingTeeth {
    MissingTeeth {
        fp: pred.difference(gt).count(),
        fn_: gt.difference(pred).count(),
    }
}

/// Evaluation summary.
///
/// Label rows average over observations of that label; category rows and
/// the overall row average over label rows, so a category is always the
/// plain mean of its member labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub observations: Vec<Observation>,
    pub per_label: Vec<LabelRow>,
    pub per_category: Vec<CategoryRow>,
    pub overall: Option<Scores>,
    pub overall_loss: Option<f64>,
    pub missing: MissingTeeth,
}

#[derive(Default)]
struct MeanAcc {
    n: usize,
    sums: [f64; 5],
    riou_n: usize,
    riou_sum: f64,
}

impl MeanAcc {
    fn push(&mut self, s: &Scores, loss: f64) {
        self.n += 1;
        for (acc, v) in self
            .sums
            .iter_mut()
            .zip([s.precision, s.recall, s.dsc, s.iou, loss])
        {
            *acc += v;
        }
        if let Some(r) = s.riou {
            self.riou_n += 1;
            self.riou_sum += r;
        }
    }

    fn mean(&self) -> Option<(Scores, f64)> {
        if self.n == 0 {
            return None;
        }
        let n = self.n as f64;
        Some((
            Scores {
                precision: self.sums[0] / n,
                recall: self.sums[1] / n,
                dsc: self.sums[2] / n,
                iou: self.sums[3] / n,
                riou: (self.riou_n > 0).then(|| self.riou_sum / self.riou_n as f64),
            },
            self.sums[4] / n,
        ))
    }
}

impl MetricReport {
    pub fn from_observations(mut observations: Vec<Observation>, missing: MissingTeeth) -> Self {
        observations.sort_by_key(|o| o.label);

        let mut by_label: BTreeMap<u8, MeanAcc> = BTreeMap::new();
        for o in &observations {
            by_label.entry(o.label).or_default().push(&o.scores, o.loss);
        }
        let per_label: Vec<LabelRow> = by_label
            .iter()
            .filter_map(|(&label, acc)| {
                let (scores, loss) = acc.mean()?;
                Some(LabelRow {
                    label,
                    category: category_of(label).ok()?,
                    samples: acc.n,
                    scores,
                    loss,
                })
            })
            .collect();

        let per_category = ToothCategory::ALL
            .iter()
            .map(|&category| {
                let mut acc = MeanAcc::default();
                let mut labels = Vec::new();
                for row in per_label.iter().filter(|r| r.category == category) {
                    acc.push(&row.scores, row.loss);
                    labels.push(row.label);
                }
                CategoryRow {
                    category,
                    labels,
                    scores: acc.mean().map(|(s, _)| s),
                }
            })
            .collect();

        let mut all = MeanAcc::default();
        for row in &per_label {
            all.push(&row.scores, row.loss);
        }
        let overall = all.mean();

        MetricReport {
            observations,
            per_label,
            per_category,
            overall: overall.map(|(s, _)| s),
            overall_loss: overall.map(|(_, l)| l),
            missing,
        }
    }

    /// Pools several per-image reports, e.g. over a test set.
    pub fn merge<'a>(reports: impl IntoIterator<Item = &'a MetricReport>) -> MetricReport {
        let mut observations = Vec::new();
        let mut missing = MissingTeeth::default();
        for r in reports {
            observations.extend(r.observations.iter().cloned());
            missing = missing + r.missing;
        }
        MetricReport::from_observations(observations, missing)
    }

    pub fn label_row(&self, label: u8) -> Option<&LabelRow> {
        self.per_label.iter().find(|r| r.label == label)
    }
}

fn key_obbs(obbs: &[Obb]) -> Result<BTreeMap<u8, &Obb>> {
    let mut map = BTreeMap::new();
    for o in obbs {
        if map.insert(o.label, o).is_some() {
            return Err(Error::InvalidParameter(format!(
                "two boxes carry label {}",
                o.label
            )));
        }
    }
    Ok(map)
}

pub fn evaluate(
    pred: &LabelMap,
    gt: &LabelMap,
    pred_obbs: &[Obb],
    gt_obbs: &[Obb],
) -> Result<MetricReport> {
    evaluate_with(pred, gt, pred_obbs, gt_obbs, &LossConfig::default())
}

/// Scores every tooth present in `gt`.
///
/// A tooth whose ground-truth box exists but whose predicted box does not
/// gets a rotated IoU of 0.
pub fn evaluate_with(
    pred: &LabelMap,
    gt: &LabelMap,
    pred_obbs: &[Obb],
    gt_obbs: &[Obb],
    loss_cfg: &LossConfig,
) -> Result<MetricReport> {
    if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", gt.width(), gt.height()),
            actual: format!("{}x{}", pred.width(), pred.height()),
        });
    }
    loss_cfg.validate()?;
    let pred_boxes = key_obbs(pred_obbs)?;
    let gt_boxes = key_obbs(gt_obbs)?;

    let gt_labels = gt.present_labels();
    let mut observations = Vec::with_capacity(gt_labels.len());
    for &label in &gt_labels {
        let gt_mask = gt.mask_of(label);
        let pred_mask = pred.mask_of(label);
        let counts = confusion(&pred_mask, &gt_mask)?;
        let riou = gt_boxes
            .get(&label)
            .map(|g| pred_boxes.get(&label).map_or(0.0, |p| rotated_iou(p, g)));
        let prob: Vec<f64> = pred_mask
            .as_slice()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        let loss = combined_loss(&prob, gt_mask.as_slice(), loss_cfg)?;
        observations.push(Observation {
            label,
            counts,
            scores: Scores {
                precision: counts.precision(),
                recall: counts.recall(),
                dsc: counts.dsc(),
                iou: counts.iou(),
                riou,
            },
            loss,
        });
    }

    let missing = missing_teeth(&pred.present_labels(), &gt_labels);
    Ok(MetricReport::from_observations(observations, missing))
}

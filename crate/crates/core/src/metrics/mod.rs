//! Evaluation: pixel metrics, losses, rotated IoU and tooth-level reports.

mod category;
mod confusion;
mod loss;
mod report;
mod riou;

pub use category::{category_of, Arch, ToothCategory, ToothKind};
pub use confusion::{confusion, dsc, iou, precision, recall, ConfusionCounts};
pub use loss::{combined_loss, dice_loss, focal_loss, LossConfig, PROB_EPS};
pub use report::{
    evaluate, evaluate_with, missing_teeth, CategoryRow, LabelRow, MetricReport, MissingTeeth,
    Observation, Scores,
};
pub use riou::{clip_convex, polygon_area, rotated_iou};

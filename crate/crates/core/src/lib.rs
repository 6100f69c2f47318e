//! Post-processing, oriented bounding boxes and evaluation for tooth
//! instance segmentation of panoramic X-rays.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`labelmap`]: label-map rasters, I/O, connected components, patch tiling.
//! * [`postprocess`]: dissolving spurious duplicate-label regions.
//! * [`obb`]: PCA-based oriented bounding boxes and their JSON export.
//! * [`metrics`]: pixel metrics, losses, rotated IoU and tooth-level reports.
//! * [`attention`]: forward passes of the decoder attention blocks.
//! * [`cli`]: the `dentobox` command-line front end.

pub mod attention;
pub mod cli;
pub mod error;
pub mod labelmap;
pub mod metrics;
pub mod obb;
pub mod postprocess;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/label-maps.md")]
    mod label_maps {}
    #[doc = include_str!("../../../book/src/postprocessing.md")]
    mod postprocessing {}
    #[doc = include_str!("../../../book/src/oriented-boxes.md")]
    mod oriented_boxes {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/attention.md")]
    mod attention {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

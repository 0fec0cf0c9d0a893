//! Fine-grained, hierarchical, instance-level part segmentation of 3D point
//! clouds, at desk scale.
//!
//! The crate covers the full pipeline: synthetic shape generation with
//! ground-truth part-instance trees, And-Or-graph templates with level cuts,
//! furthest point sampling, segmentation metrics (part-category / shape mIoU,
//! hierarchical mIoU, mAP over instance masks), optimal mask matching via the
//! Hungarian algorithm, a small trainable point network with hand-written
//! gradients and the five-term detection-by-segmentation loss, and the three
//! hierarchical inference strategies (bottom-up, top-down, ensemble).
//!
//! Heavy loops run data-parallel over shapes when the default `parallel`
//! feature is enabled; results are bit-identical with the sequential build.

pub mod annotation;
pub mod error;
pub mod geometry;
pub mod parallel;
pub mod template;

pub use error::{Error, NodeId, Result};

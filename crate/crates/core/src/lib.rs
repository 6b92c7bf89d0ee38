//! Pose-guided copy-paste synthesis for person re-identification datasets.
//!
//! Each pedestrian is paired with the donor (a cyclist image whose bicycle is
//! masked) whose torso pose agrees best: same shoulder orientation first,
//! then nearest torso slope, then nearest torso length, with a seeded draw
//! among whatever remains tied. The donor is rotated (and scaled) about its
//! mid-hip to match the pedestrian, the bicycle is cut out through its mask
//! and pasted so the two mid-hips coincide. Identities are untouched, so the
//! output is a drop-in extra training set.
//!
//! The [`metrics`] module scores re-identification rankings (CMC and mAP).

pub mod cli;
pub mod compositor;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod matcher;
pub mod metrics;
pub mod pipeline;
pub mod pose;
pub mod preview;
pub mod raster;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::AffineTransform;
pub use ingest::{DonorRecord, PersonRecord, PoseKeypoints};
pub use pipeline::{synthesize, SynthesisConfig, SynthesisManifest};
pub use pose::{Bins, Orientation, PoseDescriptor};
pub use raster::{ImageBuffer, MaskBuffer, Point};

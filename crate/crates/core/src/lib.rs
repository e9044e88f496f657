//! Lane-departure event extraction from per-frame lane segmentation masks.
//!
//! Each frame's lane mask is reduced to the area centroid of its convex hull;
//! the centroid's signed distance from the image center line forms an offset
//! series that is mean-centered and smoothed with a fixed-lag Kalman
//! smoother. Peaks and troughs of the smoothed series are paired into left
//! and right lane changes or reported as incursions.
//!
//! Modules follow the data flow:
//!
//! * [`geometry`]: QuickHull, polygon centroid, point-line distance
//! * [`mask_io`]: PGM masks, ROI filtering, manifests
//! * [`tracking`]: offsets, centering, fixed-lag smoothing
//! * [`classifier`]: extrema and event classification
//! * [`evaluation`]: IoU, mAP, event confusion counts
//! * [`synth`]: synthetic clips with ground truth
//! * [`pipeline`]: whole-clip runs and their artifacts

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod mask_io;
pub mod pipeline;
pub mod synth;
pub mod tracking;

pub use error::{Error, Result};

//! Sigmoid feed rate scheduling for rational B-spline tool paths.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod chordscan;
pub mod error;
pub mod geometry;
pub mod io;
pub mod optimizer;
pub mod pipeline;
pub mod poly;
pub mod profile;
pub mod segmentation;
pub mod simulator;
pub mod sprofile;
pub mod testcurves;

pub use chordscan::{FeedrateScatter, Limits, ScatterPoint};
pub use error::{Error, Result};
pub use geometry::{Curve, Vec3};
pub use io::{Emit, Method};
pub use profile::{ConstraintCoeffs, Profile, ProfileFamily};
pub use segmentation::{Block, BlockKind};

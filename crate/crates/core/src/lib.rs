//! Fundamental forms, Beltrami operators and finite-type detection for
//! parametric surfaces in Euclidean 3-space, computed with truncated
//! Taylor-jet arithmetic.

// index loops mirror the tensor notation
#![allow(clippy::needless_range_loop)]

pub mod chentype;
pub mod cli;
pub mod geometry;
pub mod identities;
pub mod jets;
pub mod oracle;
pub mod surfaces;

pub use geometry::{Field, FormKind, FrameData, GeometryConfig, GeometryError};
pub use jets::{Jet2, JetError};
pub use surfaces::{parse_selector, SurfaceSpec};

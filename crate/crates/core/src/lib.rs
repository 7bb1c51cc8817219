//! Geodesic spherical-image primitives.
//!
//! Everything in this crate is pure computation over in-memory buffers:
//!
//! - [`geodesic`]: order-n icospheres (subdivided icosahedra on the unit sphere) and
//!   point location on them.
//! - [`projection`]: lon/lat conventions and four closed-form map projections.
//! - [`distortion`]: Tissot indicatrix analysis of those projections and of the
//!   icosphere's per-face planar approximation.
//! - [`resample`]: equirectangular raster <-> icosphere vertex signal conversion.
//! - [`sphereconv`]: gnomonic kernel sampling operators, convolution as
//!   gather + weighted sum, and inter-order up/downsampling.
//! - [`metrics`]: per-class intersection-over-union.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel drivers and the
//! command-line tool live in the `geosphere` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod math;

pub mod distortion;
pub mod geodesic;
pub mod metrics;
pub mod projection;
pub mod resample;
pub mod sphereconv;

pub use error::{Error, Result};
pub use geodesic::{Icosphere, Location};
pub use math::Vec3;
pub use projection::{LonLat, ProjectionKind, ProjectionSpec};
pub use resample::{EquirectImage, RenderMode, SphereSignal};
pub use sphereconv::{Kernel, KernelPattern, SamplingOperator};

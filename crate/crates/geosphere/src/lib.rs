//! Input/output, parallel drivers and the command-line front end for
//! [`geosphere_core`].
//!
//! - [`formats`]: ISPH signals, ISOP operator caches, OFF meshes, CSV reports, kernel
//!   text files.
//! - [`raster`]: 8/16-bit grayscale and RGB PNG.
//! - [`parallel`]: rayon drivers whose output does not depend on the thread count.
//! - [`cli`]: the `geosphere` binary.

pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod raster;

pub use error::{Error, Result};

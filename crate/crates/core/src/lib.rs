//! Random cycles in the cube and the sphere, their slices, and exact filling
//! volumes of the resulting signed 0-cycles.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs (random generators take an explicit [`RngStream`]),
//! so values can be shared freely across worker threads.
//!
//! Module map:
//!
//! - [`chains`]: pseudomanifolds, embedded polyhedral cycles, signed 0-cycles.
//! - [`models`]: seeded generators for the random-jump, cube-plane, and
//!   great-sphere models.
//! - [`slicing`]: coordinate and great-sphere slices, slice dependency graphs.
//! - [`transport`]: filling volume of 0-cycles (interval formula, min-cost
//!   flow with a boundary reservoir, geodesic matching, brute force).
//! - [`witness`]: Lipschitz dual witnesses built from pyramid functions.
//! - [`winding`]: raster winding-number filling of planar polygons.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chains;
mod error;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod slicing;
pub mod transport;
pub mod winding;
pub mod witness;

pub use chains::{Ambient, Cell, PolyCycle, Pseudomanifold, Sign, SignedPoint, ValidationReport, ZeroCycle};
pub use error::{Error, Result};
pub use models::{AffineKPlane, OrientedSubspace};
pub use rng::RngStream;
pub use slicing::{SliceAtom, SliceSpec};
pub use transport::{FvMethod, TransportPlan};
pub use winding::{WindingFill, WindingGrid};
pub use witness::{PyramidAtom, WitnessFunction, WitnessParams};

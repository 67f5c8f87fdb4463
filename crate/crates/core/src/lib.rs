//! Synthetic pre-event SAR scene generation for oil-spill change detection.

pub mod change;
pub mod components;
pub mod dataset;
pub mod error;
pub mod inpaint;
pub mod io;
pub mod metrics;
pub mod morph;
pub mod raster;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod synthetic;
pub mod tre;

pub use components::{connected_components, BBox, Component, Connectivity};
pub use error::{Error, Result};
pub use morph::{band, dilate, exterior_ring, ExteriorRing};
pub use raster::{BinaryMask, Coord, LabelMask, Raster};
pub use scalar::Scalar;

/// Single-precision intensity raster, the on-disk pixel type.
pub type IntensityRaster = Raster<f32>;
/// Double-precision intensity raster.
pub type IntensityRaster64 = Raster<f64>;

//! Thin-layer geometry and effective quantum operators on parametrized surfaces.

pub mod format;
pub mod geometry;
pub mod grid;
pub mod jets;
pub mod operators;
pub mod oracle;
pub mod spectral;
pub mod spin;
pub mod surface;
pub mod verify;

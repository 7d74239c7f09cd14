//! Harness around the `charlab` library: sweep configs, grid execution,
//! exponent fits, regression locks, and the acceptance battery.
//!
//! The binary in this crate (`charlab`) is a thin argument layer over
//! these modules; everything testable lives here.

pub mod config;
pub mod fit;
pub mod locks;
pub mod sweep;
pub mod verify;

//! Deterministic image degradation synthesis and full-reference evaluation
//! for blind super-resolution.
//!
//! Every random draw is derived from `(master_seed, image_key, stage)`, so
//! outputs do not depend on thread count or processing order.

pub mod batch;
pub mod bench;
pub mod degrade;
pub mod error;
pub mod fixtures;
pub mod gap;
pub mod harness;
pub mod image;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod recipe;
pub mod rng;

pub use error::{Error, Result};
pub use image::PlanarImage;

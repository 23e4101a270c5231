//! Obstacle-based probabilistic roadmap (OBPRM) node generation together with
//! the integral-geometry tools used to predict and measure its success rate.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cspace;
pub mod error;
pub mod geometry;
pub mod io;
pub mod montecarlo;
pub mod obprm;
pub mod rng;
pub mod roadmap;
pub mod valuations;

pub use error::{Error, Result};

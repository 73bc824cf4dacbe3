//! Chance-constrained trajectory planning around obstacles whose Gaussian
//! face uncertainty is only known through samples.
//!
//! The pipeline runs sample → estimate → reformulate → solve → validate:
//! [`scenario`] produces face-coefficient samples, [`moments`] turns them
//! into estimates with concentration radii, [`reformulate`] builds the
//! second-order-cone rows, [`misocp`] assembles and solves the
//! mixed-integer program, and [`validate`] measures empirical violation.

pub mod config;
pub mod error;
pub mod linalg;
pub mod misocp;
pub mod moments;
pub mod pipeline;
pub mod reformulate;
pub mod scenario;
pub mod seed;
pub mod statkit;
pub mod validate;

pub use error::{Error, Result};
pub use statkit::Probability;

//! Direct sampling imaging of small permeability-contrast inclusions in 2D.
//!
//! The pipeline is: describe a [`model::Scene`] and [`model::WaveContext`],
//! synthesize far-field samples with [`forward::synthesize_far_field`],
//! optionally corrupt them with [`forward::add_noise`], then sweep the
//! direct-sampling indicator over a [`imaging::SearchGrid`]. The closed-form
//! Bessel structure of the indicator lives in [`indicator`] and can be
//! imaged side by side with the data-based map.

pub mod cli;
pub mod error;
pub mod forward;
pub mod imaging;
pub mod indicator;
pub mod model;
pub mod presets;
pub mod specfun;

pub use error::{DsmError, Result};
pub use model::Point2;

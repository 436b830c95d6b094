//! Higher-order digital nets over F2 and exact Haar analysis of their discrepancy
//! function.

pub mod discrepancy;
pub mod dyadic;
pub mod error;
pub mod gf2net;
pub mod haar;
pub mod norms;
pub mod pointset;
pub mod scalar;
pub mod verify;

pub use dyadic::{box_of, enumerate_shapes, haar_eval, DyadicBox, DyadicIndex, DyadicRational};
pub use error::{Error, Result};
pub use gf2net::{digital_points, interlace, DigitalNetSpec, F2Matrix};
pub use pointset::PointSet;

/// Norm report with `f64` values.
pub type NormReport = norms::NormReport<f64>;

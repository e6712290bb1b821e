//! Fractional perimeters, nonlocal energies, covering constructions and
//! inequality diagnostics on finite metric measure spaces.

pub mod constants;
pub mod covers;
pub mod error;
pub mod functionals;
pub mod generators;
pub mod io;
pub mod kernels;
pub mod lab;
pub mod pointset;
pub mod serde_float;
pub mod space;
pub mod sum;

pub use error::{Error, Result};
pub use pointset::PointSet;
pub use space::{MetricMeasureSpace, MetricMode};

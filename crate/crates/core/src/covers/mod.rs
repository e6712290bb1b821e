//! Covering constructions: greedy 5r selection, the dyadic Calderón–Zygmund
//! ball decomposition, boundary-ball selection, and the global and local
//! boxing covers. Every cover carries a certificate recomputed by
//! [`check::certify`] from raw ball queries.

mod boundary;
mod boxing;
pub mod check;
mod cz;
mod five_r;

pub use boundary::{boundary_balls, boundary_scale_bound};
pub use boxing::{boxing_cover, density_radius, local_boxing_cover};
pub use check::{certify, Certificate, CoverRequirements, DensityBand};
pub use cz::cz_decomposition;
pub use five_r::five_r_cover;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// The open ball `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.center, self.radius * factor)
    }

    pub fn validate(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.center >= space.len() {
            return Err(Error::IndexOutOfRange { index: self.center, n: space.len() });
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::NonPositiveRadius(self.radius));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverAlgorithm {
    FiveR,
    Cz,
    Boundary,
    Boxing,
    LocalBoxing,
}

/// Conditions met while building a cover that the caller should know about.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverFlags {
    /// A scale descent reached the smallest positive distance.
    pub discreteness_floor: bool,
    /// A density threshold fell below the smallest attainable nonzero density
    /// and was raised to it (membership unchanged).
    pub threshold_clamped: bool,
    /// Requested and used scale index when the request was below the floor.
    pub scale_clamped: Option<(u32, u32)>,
    /// Which branch of the boundary construction produced the balls.
    pub branch: Option<String>,
    /// The two-sided mass dichotomy of the boundary construction failed on
    /// this discrete input; the smaller side was used.
    pub dichotomy_failed: bool,
}

/// A family of balls plus an independently recomputed certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub algorithm: CoverAlgorithm,
    pub balls: Vec<Ball>,
    /// Singleton-scale balls added at the discreteness floor; exempt from
    /// density requirements.
    pub floor_balls: Vec<Ball>,
    /// Inflation factor under which the balls cover the target.
    pub inflation: f64,
    pub flags: CoverFlags,
    pub certificate: Certificate,
    /// Algorithm-specific numbers (thresholds, constants, case masses).
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl BallCover {
    pub fn len(&self) -> usize {
        self.balls.len() + self.floor_balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn detail(map: &mut serde_json::Map<String, serde_json::Value>, key: &str, value: impl Serialize) {
    map.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
}

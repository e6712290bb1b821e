//! Evaluation of the fractional Poincaré, isoperimetric, Sobolev and boxing
//! inequalities and of the intermediate lemmas, θ-sweeps over families of
//! sets and functions, and equivalence gauges between the constants.
//!
//! Every constant reported here is an empirical maximum over a finite family,
//! hence a lower bound for the true best constant.

mod family;
mod lemmas;
mod report;
mod sweep;

pub use family::{Family, FamilySpec};
pub use lemmas::{annuli_report, frac_iso_best, frac_iso_report, theta_iso_report};
pub use report::{indicator_chain, report, ReportParams};
pub use sweep::{equivalence_gauge, sweep, EquivalenceGauge, SweepOptions, SweepPoint, ThetaSweep};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::covers::Ball;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    BbmPoincare,
    BbmRelIso,
    ImprovedPoincare,
    ImprovedRelIso,
    BbmSobolev,
    BbmGlobalIso,
    Boxing,
    FracIsoLemma,
    AnnuliLemma,
    ThetaIsoLemma,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 10] = [
        Self::BbmPoincare,
        Self::BbmRelIso,
        Self::ImprovedPoincare,
        Self::ImprovedRelIso,
        Self::BbmSobolev,
        Self::BbmGlobalIso,
        Self::Boxing,
        Self::FracIsoLemma,
        Self::AnnuliLemma,
        Self::ThetaIsoLemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BbmPoincare => "bbm_poincare",
            Self::BbmRelIso => "bbm_rel_iso",
            Self::ImprovedPoincare => "improved_poincare",
            Self::ImprovedRelIso => "improved_rel_iso",
            Self::BbmSobolev => "bbm_sobolev",
            Self::BbmGlobalIso => "bbm_global_iso",
            Self::Boxing => "boxing",
            Self::FracIsoLemma => "frac_iso_lemma",
            Self::AnnuliLemma => "annuli_lemma",
            Self::ThetaIsoLemma => "theta_iso_lemma",
        }
    }

    /// Poincaré and Sobolev kinds take a function; the rest take a set.
    pub fn takes_function(self) -> bool {
        matches!(self, Self::BbmPoincare | Self::ImprovedPoincare | Self::BbmSobolev)
    }

    /// Kinds quantified over balls `B(x, r)`.
    pub fn takes_ball(self) -> bool {
        matches!(
            self,
            Self::BbmPoincare | Self::BbmRelIso | Self::ImprovedPoincare | Self::ImprovedRelIso
        )
    }

    /// Kinds handled by [`report`] and [`sweep`]; the lemma kinds have their own entry points.
    pub fn is_inequality(self) -> bool {
        !matches!(self, Self::FracIsoLemma | Self::AnnuliLemma | Self::ThetaIsoLemma)
    }

    /// The θ-dependent prefactor removed by `--no-rescale`.
    pub fn prefactor(self, theta: f64) -> f64 {
        match self {
            Self::BbmPoincare | Self::BbmRelIso | Self::ImprovedPoincare | Self::ImprovedRelIso => 1.0 - theta,
            Self::BbmSobolev | Self::BbmGlobalIso | Self::Boxing => theta * (1.0 - theta),
            Self::ThetaIsoLemma => theta,
            Self::FracIsoLemma | Self::AnnuliLemma => 1.0,
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpace(format!("unknown inequality kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessData {
    Function(Vec<f64>),
    Set(PointSet),
}

/// A named function or set fed to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub id: String,
    pub data: WitnessData,
}

impl Witness {
    pub fn function(id: impl Into<String>, values: Vec<f64>) -> Self {
        Self { id: id.into(), data: WitnessData::Function(values) }
    }

    pub fn set(id: impl Into<String>, set: PointSet) -> Self {
        Self { id: id.into(), data: WitnessData::Set(set) }
    }

    /// The witness as a function; sets become indicators.
    pub fn to_function(&self, space: &MetricMeasureSpace) -> Vec<f64> {
        match &self.data {
            WitnessData::Function(u) => u.clone(),
            WitnessData::Set(e) => (0..space.len()).map(|i| if e.contains(i) { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// The witness as a set; functions become `{u > (min u + max u)/2}`.
    pub fn to_set(&self, space: &MetricMeasureSpace) -> PointSet {
        match &self.data {
            WitnessData::Set(e) => e.clone(),
            WitnessData::Function(u) => {
                let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mid = 0.5 * (lo + hi);
                PointSet::from_predicate(space, |i| u[i] > mid)
            }
        }
    }
}

/// One evaluated inequality or lemma instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    /// Absent for the lemmas without a fractional exponent.
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub tau: Option<f64>,
    pub lhs: f64,
    pub rhs_raw: f64,
    /// Multiplier of `rhs_raw` in the inequality, prefactor included unless `rescaled` is false.
    pub scale: f64,
    /// `lhs / (scale · rhs_raw)`; 0 when both sides vanish, `inf` when only the right side does.
    #[serde(with = "crate::serde_float")]
    pub ratio: f64,
    pub rescaled: bool,
    pub witness: String,
    pub ball: Option<Ball>,
    /// For lemma reports with a direct inequality check.
    pub pass: Option<bool>,
    pub flags: Vec<String>,
    pub details: serde_json::Map<String, serde_json::Value>,
}

pub(crate) fn ratio(lhs: f64, scale: f64, rhs_raw: f64) -> f64 {
    let den = scale * rhs_raw;
    if den > 0.0 {
        lhs / den
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

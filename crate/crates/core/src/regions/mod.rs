//! Admissible-region bounds: lossless, separate and uncoded inner bounds,
//! the outer bound, degraded and noiseless specializations, Gaussian closed forms.

mod discrete;
mod gaussian;
mod sweep;

pub use discrete::{
    lossless_max_rl, outer_max_rl, sep_inner_max_rl, unc_inner_max_rl, DmEngine, LossyBounds,
};
pub use gaussian::{gaussian_max_rl, gaussian_uncoded_max_rl};
pub use sweep::{max_rl, region_contains, sweep_curve, Target};

use crate::error::{Error, Result};
use crate::gamma::GammaOptions;
use crate::prob::{DistortionMatrix, Pmf, WiretapChannel};
use crate::rd::SolverOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub pmf: Pmf,
    pub d_b: DistortionMatrix,
    pub d_e: DistortionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub source: SourceSpec,
    pub channel: WiretapChannel,
    /// Channel uses per source letter.
    pub gamma: f64,
    /// Secret key rate, bits per source letter.
    pub rk: f64,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        let ns = self.source.pmf.alphabet_size();
        if self.source.d_b.sources() != ns || self.source.d_e.sources() != ns {
            return Err(Error::Shape(format!(
                "distortion matrices need {ns} rows (d_B has {}, d_E has {})",
                self.source.d_b.sources(),
                self.source.d_e.sources()
            )));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::OutOfRange(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.rk >= 0.0) || !self.rk.is_finite() {
            return Err(Error::OutOfRange(format!(
                "key rate must be nonnegative, got {}",
                self.rk
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub ns: f64,
    pub p: f64,
    pub nb: f64,
    pub ne: f64,
    pub gamma: f64,
    pub rk: f64,
}

impl GaussianSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ns", self.ns),
            ("p", self.p),
            ("nb", self.nb),
            ("ne", self.ne),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::OutOfRange(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rk >= 0.0) || !self.rk.is_finite() {
            return Err(Error::OutOfRange(format!(
                "rk must be nonnegative, got {}",
                self.rk
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub rl: f64,
    pub db: f64,
    pub de: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    DE,
    DB,
    RK,
    NE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    LosslessExact,
    InnerSep,
    InnerUnc,
    Outer,
    DegradedExact,
    GaussianExact,
    GaussianUncoded,
    NoiselessExact,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::LosslessExact => "lossless_exact",
            BoundKind::InnerSep => "inner_sep",
            BoundKind::InnerUnc => "inner_unc",
            BoundKind::Outer => "outer",
            BoundKind::DegradedExact => "degraded_exact",
            BoundKind::GaussianExact => "gaussian_exact",
            BoundKind::GaussianUncoded => "gaussian_uncoded",
            BoundKind::NoiselessExact => "noiseless_exact",
        }
    }

    pub const ALL: [BoundKind; 8] = [
        BoundKind::LosslessExact,
        BoundKind::InnerSep,
        BoundKind::InnerUnc,
        BoundKind::Outer,
        BoundKind::DegradedExact,
        BoundKind::GaussianExact,
        BoundKind::GaussianUncoded,
        BoundKind::NoiselessExact,
    ];

    pub fn is_gaussian(self) -> bool {
        matches!(self, BoundKind::GaussianExact | BoundKind::GaussianUncoded)
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown bound kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub axis: Axis,
    /// `(axis value, max R_L)` sorted by axis value.
    pub samples: Vec<(f64, f64)>,
    pub bound_kind: BoundKind,
}

/// Search settings for the discrete region bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSearch {
    /// Lattice denominator for each row of `P_{Ŝ|S}` (and of the uncoded symbol map).
    pub resolution: usize,
    /// Resolution is lowered until the product grid has at most this many points.
    pub max_points: usize,
    /// Local coordinate refinement around the best lattice point.
    pub refine: bool,
    /// Number of rate nodes in the `Γ` tables.
    pub rate_nodes: usize,
    /// Cap on exact objective evaluations per query.
    pub max_exact: usize,
    pub gamma: GammaOptions,
    pub solver: SolverOptions,
}

impl Default for RegionSearch {
    fn default() -> Self {
        RegionSearch {
            resolution: 40,
            max_points: 20_000,
            refine: true,
            rate_nodes: 41,
            max_exact: 4_000,
            gamma: GammaOptions::default(),
            solver: SolverOptions {
                tolerance: 1e-10,
                ..SolverOptions::default()
            },
        }
    }
}

/// `max(log2 x, 0)`.
pub fn log2_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_names_round_trip() {
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
        }
        assert!("inner".parse::<BoundKind>().is_err());
    }
}

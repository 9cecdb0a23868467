//! Blahut-Arimoto solvers for capacity, rate-distortion and conditional
//! rate-distortion, plus the equal-slope decomposition of the latter.

mod capacity;
mod conditional;
mod ratedist;

pub use capacity::channel_capacity;
pub use conditional::{
    conditional_rate_distortion, conditional_rate_distortion_direct, side_info_rate_distortion,
    slope_allocation, SlopeAllocation,
};
pub use ratedist::{rate_distortion, rd_at_slope, SlopePoint};

use crate::error::{Error, Result};
use crate::prob::{Channel, Pmf};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop when the duality gap drops below this (bits).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Search range for the slope multiplier (bits per unit distortion).
    pub lambda_bracket: (f64, f64),
    pub bisection_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-11,
            max_iterations: 20_000,
            lambda_bracket: (0.0, 64.0),
            bisection_steps: 80,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lambda_bracket;
        if !(self.tolerance > 0.0) || self.max_iterations == 0 || !(lo >= 0.0) || !(hi > lo) {
            return Err(Error::Config(format!("invalid solver options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdResult {
    pub rate: f64,
    /// `P(ŝ|s)`; for conditional problems rows are indexed by `s * |W| + w`.
    pub achieving_channel: Channel,
    pub distortion_attained: f64,
    pub iterations: usize,
    pub gap_bound: f64,
    /// `-dR/dD` at the solution, in bits per unit distortion.
    pub slope: f64,
    /// Target sat at (or numerically below) the minimum distortion.
    pub boundary: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub achieving_input: Pmf,
    pub iterations: usize,
    pub gap_bound: f64,
    pub converged: bool,
}

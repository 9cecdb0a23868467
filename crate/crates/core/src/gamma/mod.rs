//! Equivocation functions of a wiretap channel.
//!
//! `gamma1` is evaluated as a lower bound (ascent over bounded auxiliaries,
//! never below the less-noisy shortcut), `gamma2` as an upper bound over a
//! grid of couplings with an exact concave inner maximization.

mod gamma1;
mod gamma2;
mod inputs;

pub use gamma1::{gamma1, gamma1_less_noisy, gamma1_prime, is_less_noisy, LessNoisyVerdict};
pub use gamma2::gamma2;

use crate::error::{Error, Result};
use crate::prob::{Channel, JointPmf, Pmf};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaOptions {
    /// Auxiliary alphabet sizes; `None` means `|X| + 2`.
    pub card_u: Option<usize>,
    pub card_v: Option<usize>,
    pub restarts: usize,
    /// Input-distribution grid size for the less-noisy shortcut.
    pub grid_points: usize,
    /// Points per free coupling cell.
    pub coupling_points: usize,
    /// Largest coupling product grid searched exhaustively.
    pub coupling_grid_cap: usize,
    pub ascent_steps: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            card_u: None,
            card_v: None,
            restarts: 4,
            grid_points: 10_000,
            coupling_points: 21,
            coupling_grid_cap: 50_000,
            ascent_steps: 400,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl GammaOptions {
    pub fn validate(&self) -> Result<()> {
        let bad_card = matches!(self.card_u, Some(0)) || matches!(self.card_v, Some(0));
        if bad_card
            || self.restarts == 0
            || self.grid_points < 2
            || self.coupling_points < 2
            || !(self.tolerance > 0.0)
        {
            return Err(Error::Config(format!("invalid gamma options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GammaWitness {
    /// Two-layer code auxiliaries `P_X P_{V|X} P_{U|V}`.
    Auxiliary {
        px: Pmf,
        pv_x: Channel,
        pu_v: Channel,
    },
    /// Coupling `Q_{YZ|X}` (one joint per input) and the inner maximizer `Q_X`.
    Coupling { couplings: Vec<JointPmf>, qx: Pmf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub value: f64,
    pub witness: GammaWitness,
    pub certified: bool,
}

/// Slack allowed on the rate constraint `I(X;Y) ≥ R`.
pub(crate) const FEAS_SLACK: f64 = 1e-7;

pub(crate) fn margins_equal(a: &Channel, b: &Channel) -> bool {
    a.inputs() == b.inputs()
        && a.outputs() == b.outputs()
        && a.data()
            .iter()
            .zip(b.data())
            .all(|(x, y)| (x - y).abs() <= 1e-12)
}

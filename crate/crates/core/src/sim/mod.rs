//! Monte-Carlo runs of the separate and uncoded secrecy schemes under henchman attacks,
//! plus tilted-information utilities and tail-bound envelopes.

mod attack;
pub mod chernoff;
mod codebook;
mod ledger;
mod scheme;
mod tilted;
mod trend;
mod uncoded;

pub use attack::{
    best_in_list, block_distortion, greedy_list, AttackSpec, AttackStrategy, MAX_LIST_BITS,
};
pub use codebook::{build_codebook, likelihood_encode, Codebook, DEFAULT_MEMORY_CAP};
pub use ledger::{
    derive_rates, map_g, one_time_pad, Auxiliary, Direction, IndexLayout, RateLedger,
};
pub use scheme::{transmit, RunConfig, SeparateScheme};
pub use tilted::{
    d_tilted, gaussian_d_tilted, gaussian_d_tilted_quadrature, tilted_profile, TiltedProfile,
};
pub use trend::{binomial_trend_test, Trend, TrendReport, TrendStep};
pub use uncoded::{gaussian_uncoded_run, uncoded_run, GaussianRun};

use crate::prob::Pmf;
use crate::util::quantile_sorted;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: usize,
    pub m: usize,
    pub n: usize,
    pub legit_distortion_samples: Vec<f64>,
    /// Keyed by attack label `strategy@rate`.
    pub wiretap_distortion_samples: BTreeMap<String, Vec<f64>>,
    /// Empirical law of the padded key index `M_k`; absent for the uncoded scheme.
    pub empirical_pad_distribution: Option<Pmf>,
    pub pad_counts: Option<Vec<u64>>,
    pub de_target: f64,
    pub timing: f64,
    pub warnings: Vec<String>,
    /// Auxiliaries came from a non-certified optimizer.
    pub heuristic_aux: bool,
}

/// One CSV summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub attack: String,
    pub trials: usize,
    pub mean_d_b: f64,
    pub d_e_q10: f64,
    pub d_e_q50: f64,
    pub d_e_q90: f64,
    /// Fraction of trials with `d_E ≤ de_target`.
    pub success: f64,
}

impl SimReport {
    pub fn mean_legit_distortion(&self) -> f64 {
        self.legit_distortion_samples.iter().sum::<f64>() / self.trials.max(1) as f64
    }

    pub fn success_rate(&self, label: &str) -> Option<f64> {
        let s = self.wiretap_distortion_samples.get(label)?;
        Some(
            s.iter().filter(|&&v| v <= self.de_target + 1e-12).count() as f64
                / s.len().max(1) as f64,
        )
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mean_d_b = self.mean_legit_distortion();
        let mut rows = Vec::new();
        for (label, samples) in &self.wiretap_distortion_samples {
            let mut sorted = samples.clone();
            sorted.sort_by(f64::total_cmp);
            rows.push(SummaryRow {
                attack: label.clone(),
                trials: self.trials,
                mean_d_b,
                d_e_q10: quantile_sorted(&sorted, 0.1),
                d_e_q50: quantile_sorted(&sorted, 0.5),
                d_e_q90: quantile_sorted(&sorted, 0.9),
                success: self.success_rate(label).unwrap_or(f64::NAN),
            });
        }
        if rows.is_empty() {
            rows.push(SummaryRow {
                attack: "none".into(),
                trials: self.trials,
                mean_d_b,
                d_e_q10: f64::NAN,
                d_e_q50: f64::NAN,
                d_e_q90: f64::NAN,
                success: f64::NAN,
            });
        }
        rows
    }
}

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Hypergeometric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Nonincreasing,
    Nondecreasing,
}

/// Per-step outcome of [`binomial_trend_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendStep {
    /// One-sided p-value for a move against the asserted trend.
    pub p_value: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub frequencies: Vec<f64>,
    pub steps: Vec<TrendStep>,
    pub passed: bool,
}

/// `P[X ≥ k]` for the count of the second sample under equal success probabilities
/// (Fisher's exact test on the 2×2 table).
fn upper_tail(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<f64> {
    if k2 == 0 {
        return Ok(1.0);
    }
    let h = Hypergeometric::new(n1 + n2, k1 + k2, n2).map_err(|e| Error::Config(e.to_string()))?;
    Ok(h.sf(k2 - 1))
}

/// Consecutive `(successes, trials)` pairs; a step fails when the exact one-sided test rejects
/// "no move against `trend`" at level `alpha`.
pub fn binomial_trend_test(counts: &[(u64, u64)], trend: Trend, alpha: f64) -> Result<TrendReport> {
    if counts.iter().any(|&(k, n)| n == 0 || k > n) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(
            "trend test needs 0 ≤ successes ≤ trials, trials ≥ 1, alpha in (0,1)".into(),
        ));
    }
    let mut steps = Vec::new();
    for w in counts.windows(2) {
        let ((k1, n1), (k2, n2)) = (w[0], w[1]);
        let p_value = match trend {
            Trend::Nonincreasing => upper_tail(k1, n1, k2, n2)?,
            Trend::Nondecreasing => upper_tail(n1 - k1, n1, n2 - k2, n2)?,
        };
        steps.push(TrendStep {
            p_value,
            violated: p_value < alpha,
        });
    }
    Ok(TrendReport {
        frequencies: counts.iter().map(|&(k, n)| k as f64 / n as f64).collect(),
        passed: steps.iter().all(|s| !s.violated),
        steps,
    })
}

use crate::error::{Error, Result};
use crate::prob::{
    conditional_entropy, entropy_density_samples, information_density_samples, DistortionMatrix,
    JointPmf,
};
use crate::rd::{conditional_rate_distortion, SolverOptions};
use crate::util::quantile_sorted;
use serde::{Deserialize, Serialize};

/// Quantile proxies for the spectral inf/sup rates, in bits per letter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub n: usize,
    pub trials: usize,
    pub quantile_lo: f64,
    pub quantile_hi: f64,
    pub plim_inf_est: f64,
    pub plim_sup_est: f64,
    pub sample_mean: f64,
    /// Three standard errors of `sample_mean`.
    pub mean_radius: f64,
    /// DKW band at level 0.01: each quantile estimate is bracketed by the
    /// empirical quantiles at `q ± dkw_epsilon`.
    pub dkw_epsilon: f64,
    pub inf_band: (f64, f64),
    pub sup_band: (f64, f64),
}

fn summarize(mut samples: Vec<f64>, n: usize, quantiles: (f64, f64)) -> SpectrumEstimate {
    let trials = samples.len();
    samples.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let eps = ((2.0f64 / 0.01).ln() / (2.0 * trials as f64)).sqrt();
    let band = |q: f64| {
        (
            quantile_sorted(&samples, q - eps),
            quantile_sorted(&samples, q + eps),
        )
    };
    SpectrumEstimate {
        n,
        trials,
        quantile_lo: quantiles.0,
        quantile_hi: quantiles.1,
        plim_inf_est: quantile_sorted(&samples, quantiles.0),
        plim_sup_est: quantile_sorted(&samples, quantiles.1),
        sample_mean: mean,
        mean_radius: 3.0 * (var / trials as f64).sqrt(),
        dkw_epsilon: eps,
        inf_band: band(quantiles.0),
        sup_band: band(quantiles.1),
    }
}

fn check_args(trials: usize, quantiles: (f64, f64)) -> Result<()> {
    if trials < 100 {
        return Err(Error::Config(format!(
            "at least 100 trials are needed, got {trials}"
        )));
    }
    let (lo, hi) = quantiles;
    if !(0.0 < lo && lo <= hi && hi < 1.0) {
        return Err(Error::Config(format!(
            "quantiles must satisfy 0 < lo ≤ hi < 1, got ({lo}, {hi})"
        )));
    }
    Ok(())
}

/// Spectral inf/sup information rate proxies of the i.i.d. extension of `j`.
///
/// A 3-axis joint `(A, B, C)` gives the conditional rates of `A` and `B` given `C`.
pub fn estimate_spectral_rates(
    j: &JointPmf,
    n: usize,
    trials: usize,
    quantiles: (f64, f64),
    seed: u64,
) -> Result<SpectrumEstimate> {
    check_args(trials, quantiles)?;
    Ok(summarize(
        information_density_samples(j, n, trials, seed)?,
        n,
        quantiles,
    ))
}

/// Lossy equivocation against the spectral conditional entropy for an i.i.d. pair `(S, Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivocationGap {
    /// `R_{S|Z}(D)`, the i.i.d. lossy equivocation.
    pub lossy_equiv_ub: f64,
    /// Low-quantile proxy of the spectral inf conditional entropy rate.
    pub cond_entropy_est: f64,
    pub cond_entropy_exact: f64,
    pub estimate: SpectrumEstimate,
    /// `lossy_equiv_ub ≤ sample mean + 3 SE`.
    pub ordered: bool,
}

pub fn equivocation_entropy_gap(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EquivocationGap> {
    let quantiles = (0.01, 0.99);
    check_args(trials, quantiles)?;
    let rate = conditional_rate_distortion(joint, d, target, &SolverOptions::default())?.rate;
    let est = summarize(
        entropy_density_samples(joint, n, trials, seed)?,
        n,
        quantiles,
    );
    Ok(EquivocationGap {
        lossy_equiv_ub: rate,
        cond_entropy_est: est.plim_inf_est,
        cond_entropy_exact: conditional_entropy(joint)?,
        ordered: rate <= est.sample_mean + est.mean_radius + 1e-9,
        estimate: est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, mutual_information, Channel, Pmf};

    #[test]
    fn independent_pair_is_zero() {
        let j = JointPmf::new(vec![2, 3], vec![0.1, 0.2, 0.2, 0.1, 0.2, 0.2]).unwrap();
        let e = estimate_spectral_rates(&j, 50, 200, (0.01, 0.99), 1).unwrap();
        assert!(
            e.plim_inf_est.abs() < 1e-12
                && e.plim_sup_est.abs() < 1e-12
                && e.sample_mean.abs() < 1e-12
        );
    }

    #[test]
    fn identity_channel_single_letter() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
        let e = estimate_spectral_rates(&j, 1, 100, (0.01, 0.99), 3).unwrap();
        assert!((e.plim_inf_est - 1.0).abs() < 1e-12 && (e.plim_sup_est - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_sandwich() {
        let j = JointPmf::from_input(
            &Pmf::new(vec![0.3, 0.7]).unwrap(),
            &Channel::bsc(0.2).unwrap(),
        )
        .unwrap();
        let e = estimate_spectral_rates(&j, 40, 500, (0.05, 0.95), 8).unwrap();
        assert!(e.plim_inf_est <= e.sample_mean && e.sample_mean <= e.plim_sup_est);
        let i = mutual_information(&j).unwrap();
        assert!((e.sample_mean - i).abs() < e.mean_radius);
        assert!(e.inf_band.0 <= e.plim_inf_est && e.plim_inf_est <= e.inf_band.1);
    }

    #[test]
    fn rejects_few_trials() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
        assert!(estimate_spectral_rates(&j, 1, 99, (0.01, 0.99), 0).is_err());
    }

    #[test]
    fn zero_distortion_matches_conditional_entropy() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
        let g =
            equivocation_entropy_gap(&j, &DistortionMatrix::hamming(2), 0.0, 200, 400, 5).unwrap();
        assert!((g.lossy_equiv_ub - g.cond_entropy_exact).abs() < 1e-6);
        assert!(g.ordered);
    }

    #[test]
    fn known_side_information_is_zero() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
        let g =
            equivocation_entropy_gap(&j, &DistortionMatrix::hamming(2), 0.0, 20, 100, 5).unwrap();
        assert!(g.lossy_equiv_ub.abs() < 1e-9 && g.cond_entropy_est.abs() < 1e-12);
    }

    #[test]
    fn erasure_example_ordering() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
        let g =
            equivocation_entropy_gap(&j, &DistortionMatrix::erasure(2), 0.3, 500, 400, 9).unwrap();
        let h = binary_entropy(0.1).unwrap();
        assert!((g.lossy_equiv_ub - (h - 0.3 * binary_entropy(0.1 / 0.3).unwrap())).abs() < 1e-4);
        assert!((g.cond_entropy_exact - h).abs() < 1e-12);
        assert!(g.ordered && g.lossy_equiv_ub < g.cond_entropy_exact);
    }
}

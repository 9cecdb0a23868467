//! Tail bounds for sums of i.i.d. variables, used as simulation envelopes.

/// `P[Σ X_i > k] ≤ (e l p / k)^{k/a}` for i.i.d. `X_i ∈ [0, a]` with mean `p`.
pub fn bounded_sum_tail(l: usize, p: f64, a: f64, k: f64) -> f64 {
    (std::f64::consts::E * l as f64 * p / k)
        .powf(k / a)
        .min(1.0)
}

/// `P[Σ X_i > k] ≤ (e l p / k)^k` for i.i.d. `Bern(p)`.
pub fn bernoulli_upper_tail(l: usize, p: f64, k: f64) -> f64 {
    bounded_sum_tail(l, p, 1.0, k)
}

/// `P[Σ X_i ≤ (1 - δ) l p] ≤ exp(-δ² l p / 2)` for i.i.d. `Bern(p)`.
pub fn bernoulli_lower_tail(l: usize, p: f64, delta: f64) -> f64 {
    (-delta * delta * l as f64 * p / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::trial_rng;
    use rand::Rng;

    const RUNS: usize = 4000;

    fn within(freq: f64, bound: f64) -> bool {
        freq <= bound
            + 3.0 * (bound.min(1.0) * (1.0 - bound.min(1.0)) / RUNS as f64).sqrt()
            + 1.0 / RUNS as f64
    }

    #[test]
    fn envelopes_hold_on_random_parameters() {
        let mut pick = trial_rng(77, 0);
        for case in 0..50u64 {
            let l = pick.random_range(5..200);
            let p = pick.random_range(0.01..0.3);
            let a = pick.random_range(0.5..3.0);
            let k = (l as f64 * p * pick.random_range(1.2..4.0)).max(1.0);
            let delta = pick.random_range(0.1..0.9);
            let mut rng = trial_rng(78, case);
            let (mut over_b, mut over_bounded, mut under) = (0, 0, 0);
            for _ in 0..RUNS {
                let mut sum_b = 0.0;
                let mut sum_u = 0.0;
                for _ in 0..l {
                    let hit = rng.random::<f64>() < p;
                    sum_b += hit as u8 as f64;
                    // Two-point law on {0, a} with mean p.
                    if rng.random::<f64>() < p / a {
                        sum_u += a;
                    }
                }
                over_b += (sum_b > k) as usize;
                under += (sum_b <= (1.0 - delta) * l as f64 * p) as usize;
                over_bounded += (sum_u > k) as usize;
            }
            let f = |c: usize| c as f64 / RUNS as f64;
            assert!(
                within(f(over_b), bernoulli_upper_tail(l, p, k)),
                "case {case}"
            );
            assert!(
                within(f(under), bernoulli_lower_tail(l, p, delta)),
                "case {case}"
            );
            if p / a <= 1.0 {
                assert!(
                    within(f(over_bounded), bounded_sum_tail(l, p, a, k)),
                    "case {case}"
                );
            }
        }
    }
}

//! Maximization of concave-ish functionals over input distributions.

use super::FEAS_SLACK;
use crate::prob::{mutual_information_io, Channel};
use crate::util::{composition_count, golden_max, simplex_grid};

/// Interval `[a, b]` of `q = P(X=1)` with `I(X;Y) ≥ rate` for a binary-input channel.
///
/// `I(X;Y)` is concave in `q`, so the superlevel set is an interval around the
/// capacity-achieving input `q_star`. Returns `None` when it is empty beyond the slack.
pub(crate) fn binary_feasible_interval(ch: &Channel, rate: f64, q_star: f64) -> Option<(f64, f64)> {
    let info = |q: f64| mutual_information_io(&[1.0 - q, q], ch);
    let peak = info(q_star);
    if peak < rate - FEAS_SLACK {
        return None;
    }
    if peak <= rate {
        return Some((q_star, q_star));
    }
    let edge = |outside: f64| {
        if info(outside) >= rate {
            return outside;
        }
        let (mut bad, mut good) = (outside, q_star);
        for _ in 0..100 {
            let mid = 0.5 * (bad + good);
            if info(mid) >= rate {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    Some((edge(0.0), edge(1.0)))
}

/// Candidate input distributions: a simplex lattice with at most `budget` points.
pub(crate) fn simplex_candidates(n: usize, budget: usize) -> Vec<Vec<f64>> {
    let mut k = 1;
    while composition_count(n, k + 1) <= budget as u128 {
        k += 1;
    }
    simplex_grid(n, k)
}

/// Pattern search over the simplex, keeping `feasible` true; moves mass between pairs of symbols.
pub(crate) fn simplex_pattern_search<F, G>(
    start: Vec<f64>,
    mut objective: F,
    feasible: G,
    min_step: f64,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    let n = start.len();
    let mut best = start;
    let mut best_val = objective(&best);
    let mut step = 0.05;
    while step > min_step {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mv = step.min(best[j]);
                if mv <= 0.0 {
                    continue;
                }
                let mut cand = best.clone();
                cand[i] += mv;
                cand[j] -= mv;
                if !feasible(&cand) {
                    continue;
                }
                let v = objective(&cand);
                if v > best_val {
                    best = cand;
                    best_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

/// Maximize `objective(q)` on the binary-input interval `[a, b]` by grid scan then golden refinement.
pub(crate) fn binary_scan_max<F: FnMut(f64) -> f64>(
    mut objective: F,
    a: f64,
    b: f64,
    points: usize,
) -> (f64, f64) {
    if b - a <= 0.0 {
        return (a, objective(a));
    }
    let mut best = (a, objective(a));
    for k in 1..points {
        let q = a + (b - a) * k as f64 / (points - 1) as f64;
        let v = objective(q);
        if v > best.1 {
            best = (q, v);
        }
    }
    let h = (b - a) / (points - 1) as f64;
    let (lo, hi) = ((best.0 - h).max(a), (best.0 + h).min(b));
    let refined = golden_max(&mut objective, lo, hi, 1e-12);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

use crate::error::{Error, Result};
use crate::prob::{DistortionMatrix, JointPmf};
use crate::rd::{conditional_rate_distortion, SolverOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exhaustive search caps: source blocks, list size, and lists per observation.
const MAX_SOURCE_BLOCKS: usize = 4096;
const MAX_EXHAUSTIVE_LIST: usize = 8;
const MAX_LISTS: f64 = 1e7;
/// Greedy caps on the coverage table and on the number of observation blocks.
const MAX_COVERAGE_BITS: usize = 1 << 26;
const MAX_OBSERVATIONS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimisticCodeResult {
    pub m: usize,
    pub rate: f64,
    pub list_size: usize,
    pub coverage_prob: f64,
    pub method: OracleMode,
}

/// `floor(2^{m R})`, robust to `m R` landing a hair below an integer.
fn list_size(m: usize, rate: f64) -> usize {
    ((m as f64 * rate).exp2() + 1e-9).floor() as usize
}

type Bitset = Vec<u64>;

fn mass(set: &Bitset, weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for (w, &word) in set.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            total += weights[w * 64 + b];
            bits &= bits - 1;
        }
    }
    total
}

fn digits(mut idx: usize, base: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    out
}

/// Best list coverage for one posterior over source blocks.
fn best_list(cover: &[Bitset], posterior: &[f64], list: usize, mode: OracleMode) -> Result<f64> {
    let words = posterior.len().div_ceil(64);
    // Restrict to blocks that cover posterior mass, merged by identical coverage.
    let mut support = vec![0u64; words];
    for (i, &p) in posterior.iter().enumerate() {
        if p > 0.0 {
            support[i / 64] |= 1 << (i % 64);
        }
    }
    let mut useful: Vec<Bitset> = Vec::new();
    for c in cover {
        let restricted: Bitset = c.iter().zip(&support).map(|(a, b)| a & b).collect();
        if restricted.iter().any(|&w| w != 0) && !useful.contains(&restricted) {
            useful.push(restricted);
        }
    }
    if useful.len() <= list {
        let mut all = vec![0u64; words];
        for c in &useful {
            all.iter_mut().zip(c).for_each(|(a, b)| *a |= b);
        }
        return Ok(mass(&all, posterior));
    }
    match mode {
        OracleMode::Greedy => {
            let mut union = vec![0u64; words];
            let mut taken = vec![false; useful.len()];
            for _ in 0..list {
                let mut best: Option<(usize, f64)> = None;
                for (i, c) in useful.iter().enumerate() {
                    if taken[i] {
                        continue;
                    }
                    let gain: Bitset = c.iter().zip(&union).map(|(a, u)| a & !u).collect();
                    let g = mass(&gain, posterior);
                    if best.is_none_or(|(_, bg)| g > bg) {
                        best = Some((i, g));
                    }
                }
                let Some((i, g)) = best else { break };
                if g <= 0.0 {
                    break;
                }
                taken[i] = true;
                union.iter_mut().zip(&useful[i]).for_each(|(a, b)| *a |= b);
            }
            Ok(mass(&union, posterior))
        }
        OracleMode::Exhaustive => {
            let lists = binomial(useful.len(), list);
            if lists > MAX_LISTS {
                return Err(Error::CapExceeded(format!(
                    "{lists:.3e} candidate lists exceed the exhaustive cap of {MAX_LISTS:.0e}"
                )));
            }
            let mut best = 0.0f64;
            let mut stack = vec![vec![0u64; words]; list + 1];
            enumerate(&useful, posterior, list, 0, 0, &mut stack, &mut best);
            Ok(best)
        }
    }
}

fn enumerate(
    cover: &[Bitset],
    w: &[f64],
    list: usize,
    depth: usize,
    start: usize,
    stack: &mut [Bitset],
    best: &mut f64,
) {
    if depth == list {
        *best = best.max(mass(&stack[depth], w));
        return;
    }
    for i in start..=cover.len() - (list - depth) {
        let next: Bitset = stack[depth]
            .iter()
            .zip(&cover[i])
            .map(|(a, b)| a | b)
            .collect();
        stack[depth + 1] = next;
        enumerate(cover, w, list, depth + 1, i + 1, stack, best);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Maximal probability that a henchman list of `floor(2^{mR})` blocks, chosen
/// after seeing `Z^m`, contains a block within distortion `D` of `S^m`.
///
/// `joint` is the single-letter law of `(S, Z)`; blocks are i.i.d. extensions.
pub fn optimal_henchman_code_oracle(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    rate: f64,
    m: usize,
    mode: OracleMode,
) -> Result<OptimisticCodeResult> {
    if joint.axes() != 2 {
        return Err(Error::Shape(
            "the henchman oracle needs a joint over (S, Z)".into(),
        ));
    }
    let (ns, nz) = (joint.dims()[0], joint.dims()[1]);
    if d.sources() != ns {
        return Err(Error::Shape(format!(
            "distortion has {} rows, source has {ns} letters",
            d.sources()
        )));
    }
    if m == 0 || !(rate >= 0.0) || !(target >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "need m ≥ 1, rate ≥ 0, D ≥ 0 (m={m}, rate={rate}, D={target})"
        )));
    }
    let nr = d.reconstructions();
    let pow = |b: usize| b.checked_pow(m as u32).unwrap_or(usize::MAX);
    let (s_blocks, r_blocks, z_blocks) = (pow(ns), pow(nr), pow(nz));
    let list = list_size(m, rate);
    if mode == OracleMode::Exhaustive
        && (s_blocks > MAX_SOURCE_BLOCKS || list > MAX_EXHAUSTIVE_LIST)
    {
        return Err(Error::CapExceeded(format!(
            "exhaustive search needs |S|^m ≤ {MAX_SOURCE_BLOCKS} and list ≤ {MAX_EXHAUSTIVE_LIST} (got {s_blocks}, {list})"
        )));
    }
    if s_blocks.saturating_mul(r_blocks) > MAX_COVERAGE_BITS || z_blocks > MAX_OBSERVATIONS {
        return Err(Error::CapExceeded(format!(
            "coverage table {s_blocks}×{r_blocks} or {z_blocks} observation blocks too large"
        )));
    }
    let words = s_blocks.div_ceil(64);
    let s_digits: Vec<Vec<usize>> = (0..s_blocks).map(|i| digits(i, ns, m)).collect();
    let cover: Vec<Bitset> = (0..r_blocks)
        .into_par_iter()
        .map(|r| {
            let rd = digits(r, nr, m);
            let mut set = vec![0u64; words];
            for (i, s) in s_digits.iter().enumerate() {
                if d.block(s, &rd) <= target + 1e-12 {
                    set[i / 64] |= 1 << (i % 64);
                }
            }
            set
        })
        .collect();
    // Sum over z^m of max_list P(covered, z^m), i.e. the unnormalized posterior.
    let parts: Vec<Result<f64>> = (0..z_blocks)
        .into_par_iter()
        .map(|z| {
            let zd = digits(z, nz, m);
            let weights: Vec<f64> = s_digits
                .iter()
                .map(|s| {
                    s.iter()
                        .zip(&zd)
                        .map(|(&a, &b)| joint.get(&[a, b]))
                        .product()
                })
                .collect();
            best_list(&cover, &weights, list, mode)
        })
        .collect();
    let coverage = parts.into_iter().sum::<Result<f64>>()?;
    Ok(OptimisticCodeResult {
        m,
        rate,
        list_size: list,
        coverage_prob: coverage.clamp(0.0, 1.0),
        method: mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTrend {
    pub rate: f64,
    /// Whether the rate sits at or above the single-letter threshold.
    pub above_threshold: bool,
    pub coverage: Vec<(usize, f64)>,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingDirectionReport {
    /// Single-letter `R_{S|Z}(D)`.
    pub threshold: f64,
    pub trends: Vec<RateTrend>,
    pub passed: bool,
}

/// Finite-blocklength consistency of the optimistic coding threshold.
///
/// Rates at or above `R_{S|Z}(D)` pass when coverage is nondecreasing in `m` or
/// already at least `1 − eps` throughout; rates below pass when coverage is
/// nonincreasing and ends below `1 − eps`. Exhaustive search is used when within caps.
pub fn check_optimistic_coding_direction(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    m_list: &[usize],
    rates: &[f64],
    eps: f64,
) -> Result<CodingDirectionReport> {
    if m_list.is_empty() || rates.is_empty() {
        return Err(Error::Config(
            "need at least one blocklength and one rate".into(),
        ));
    }
    let threshold = if target >= d.d_max(&joint.marginal_masses(&[0])).0 {
        0.0
    } else {
        conditional_rate_distortion(joint, d, target, &SolverOptions::default())?.rate
    };
    let mut trends = Vec::with_capacity(rates.len());
    for &rate in rates {
        let mut coverage = Vec::with_capacity(m_list.len());
        for &m in m_list {
            let r = match optimal_henchman_code_oracle(
                joint,
                d,
                target,
                rate,
                m,
                OracleMode::Exhaustive,
            ) {
                Err(Error::CapExceeded(_)) => {
                    optimal_henchman_code_oracle(joint, d, target, rate, m, OracleMode::Greedy)?
                }
                other => other?,
            };
            coverage.push((m, r.coverage_prob));
        }
        let above = rate >= threshold - 1e-9;
        let nondecreasing = coverage.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
        let nonincreasing = coverage.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        let last = coverage.last().map_or(0.0, |c| c.1);
        let verdict = if above {
            nondecreasing || coverage.iter().all(|c| c.1 >= 1.0 - eps)
        } else {
            nonincreasing && last < 1.0 - eps
        };
        trends.push(RateTrend {
            rate,
            above_threshold: above,
            coverage,
            verdict,
        });
    }
    let passed = trends.iter().all(|t| t.verdict);
    Ok(CodingDirectionReport {
        threshold,
        trends,
        passed,
    })
}

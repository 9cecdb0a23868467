use crate::error::{Error, Result};
use crate::prob::{sample_index, DistortionMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStrategy {
    /// Greedy coverage list built from posterior samples given `z^n`.
    GreedyList,
    /// Random rate-distortion codebook that ignores `z^n`.
    RdCodebookIgnoreZ,
    /// Decode the channel message, spend bits on the key, refine with the rest.
    KeyExhaust,
}

impl AttackStrategy {
    pub fn name(self) -> &'static str {
        match self {
            AttackStrategy::GreedyList => "greedy_list",
            AttackStrategy::RdCodebookIgnoreZ => "rd_codebook_ignore_z",
            AttackStrategy::KeyExhaust => "key_exhaust",
        }
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy_list" => Ok(AttackStrategy::GreedyList),
            "rd_codebook_ignore_z" => Ok(AttackStrategy::RdCodebookIgnoreZ),
            "key_exhaust" => Ok(AttackStrategy::KeyExhaust),
            other => Err(Error::Config(format!("unknown attack strategy {other:?}"))),
        }
    }
}

/// One henchman attack at list rate `rate` (bits per source letter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub strategy: AttackStrategy,
    pub rate: f64,
}

impl AttackSpec {
    pub fn label(&self) -> String {
        format!("{}@{}", self.strategy, self.rate)
    }

    /// Henchman bits `ceil(m R)`.
    pub fn bits(&self, m: usize) -> u32 {
        (m as f64 * self.rate - 1e-9).ceil().max(0.0) as u32
    }
}

/// Largest henchman list materialized by any strategy.
pub const MAX_LIST_BITS: u32 = 20;

/// Mean per-letter distortion of a block.
pub fn block_distortion(d: &DistortionMatrix, s: &[u16], r: &[u16]) -> f64 {
    s.iter()
        .zip(r)
        .map(|(&a, &b)| d.get(a as usize, b as usize))
        .sum::<f64>()
        / s.len().max(1) as f64
}

/// Smallest block distortion from `s` to any list entry (`+inf` for an empty list).
pub fn best_in_list(d: &DistortionMatrix, s: &[u16], list: &[Vec<u16>]) -> f64 {
    list.iter()
        .map(|b| block_distortion(d, s, b))
        .fold(f64::INFINITY, f64::min)
}

/// Draw i.i.d. blocks of length `m` from `p`.
pub fn random_blocks<R: Rng + ?Sized>(
    p: &[f64],
    m: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<u16>> {
    (0..count)
        .map(|_| (0..m).map(|_| sample_index(p, rng) as u16).collect())
        .collect()
}

/// Per-sample running distortion with infinite entries counted apart.
#[derive(Clone, Copy)]
struct Running {
    finite: f64,
    infinite: u32,
}

impl Running {
    fn add(&mut self, v: f64, sign: f64) {
        if v.is_finite() {
            self.finite += sign * v;
        } else if sign > 0.0 {
            self.infinite += 1;
        } else {
            self.infinite -= 1;
        }
    }

    fn within(&self, budget: f64) -> bool {
        self.infinite == 0 && self.finite <= budget
    }
}

/// Greedy coverage list over reconstruction blocks for an equally weighted posterior sample.
///
/// Each entry is grown from the first uncovered sample by best-improvement letter
/// changes that maximize the number of newly covered samples; ties go to the
/// lowest position and letter.
pub fn greedy_list(
    samples: &[Vec<u16>],
    d: &DistortionMatrix,
    target: f64,
    size: usize,
) -> Vec<Vec<u16>> {
    let Some(m) = samples.first().map(Vec::len) else {
        return Vec::new();
    };
    let nr = d.reconstructions();
    let budget = m as f64 * target + 1e-9;
    let mut covered = vec![false; samples.len()];
    let mut list = Vec::with_capacity(size.min(samples.len()));
    while list.len() < size {
        let Some(seed) = covered.iter().position(|c| !c) else {
            break;
        };
        let open: Vec<usize> = (0..samples.len()).filter(|&t| !covered[t]).collect();
        let mut block: Vec<u16> = samples[seed]
            .iter()
            .map(|&s| {
                (0..nr)
                    .min_by(|&a, &b| d.get(s as usize, a).total_cmp(&d.get(s as usize, b)))
                    .unwrap() as u16
            })
            .collect();
        let mut run: Vec<Running> = open
            .iter()
            .map(|&t| {
                let mut r = Running {
                    finite: 0.0,
                    infinite: 0,
                };
                for (x, b) in samples[t].iter().zip(&block) {
                    r.add(d.get(*x as usize, *b as usize), 1.0);
                }
                r
            })
            .collect();
        let mut score = run.iter().filter(|r| r.within(budget)).count();
        for _ in 0..4 * m * nr {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in 0..m {
                for letter in 0..nr {
                    if letter == block[i] as usize {
                        continue;
                    }
                    let mut count = 0;
                    for (k, &t) in open.iter().enumerate() {
                        let x = samples[t][i] as usize;
                        let mut r = run[k];
                        r.add(d.get(x, block[i] as usize), -1.0);
                        r.add(d.get(x, letter), 1.0);
                        count += r.within(budget) as usize;
                    }
                    if count > best.map_or(score, |b| b.2) {
                        best = Some((i, letter, count));
                    }
                }
            }
            let Some((i, letter, count)) = best else {
                break;
            };
            for (k, &t) in open.iter().enumerate() {
                let x = samples[t][i] as usize;
                run[k].add(d.get(x, block[i] as usize), -1.0);
                run[k].add(d.get(x, letter), 1.0);
            }
            block[i] = letter as u16;
            score = count;
        }
        if score == 0 {
            // No block within budget covers the seed; drop it from the pool.
            covered[seed] = true;
            continue;
        }
        for (k, &t) in open.iter().enumerate() {
            if run[k].within(budget) {
                covered[t] = true;
            }
        }
        list.push(block);
    }
    list
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            AttackStrategy::GreedyList,
            AttackStrategy::RdCodebookIgnoreZ,
            AttackStrategy::KeyExhaust,
        ] {
            assert_eq!(s.name().parse::<AttackStrategy>().unwrap(), s);
        }
        assert!(matches!(
            "guess".parse::<AttackStrategy>(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn erasures_widen_coverage() {
        let d = DistortionMatrix::erasure(2);
        let samples = vec![
            vec![0, 0, 0, 0],
            vec![0, 1, 0, 0],
            vec![0, 0, 1, 0],
            vec![1, 1, 1, 1],
        ];
        let list = greedy_list(&samples, &d, 0.25, 1);
        assert_eq!(list.len(), 1);
        let covered = samples
            .iter()
            .filter(|s| block_distortion(&d, s, &list[0]) <= 0.25)
            .count();
        assert_eq!(covered, 2);
    }

    #[test]
    fn full_list_covers_all_samples() {
        let d = DistortionMatrix::hamming(2);
        let samples: Vec<Vec<u16>> = (0..8)
            .map(|i| (0..3).map(|b| ((i >> b) & 1) as u16).collect())
            .collect();
        let list = greedy_list(&samples, &d, 0.0, 8);
        assert!(samples.iter().all(|s| best_in_list(&d, s, &list) == 0.0));
    }
}

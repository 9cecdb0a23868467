use super::ratedist::{evaluate, solve_target, zero_rate};
use super::{rate_distortion, RdResult, SolverOptions};
use crate::error::{Error, Result};
use crate::prob::{weighted, Channel, DistortionMatrix, JointPmf, Pmf};
use serde::{Deserialize, Serialize};

/// Conditional source pmfs `(P(w), P(s|w))` of a joint over `(S, W)`.
fn conditions(joint: &JointPmf, d: &DistortionMatrix) -> Result<Vec<(f64, Vec<f64>)>> {
    if joint.axes() != 2 {
        return Err(Error::Shape(
            "conditional rate-distortion needs a 2-axis joint over (S, W)".into(),
        ));
    }
    let (ns, nw) = (joint.dims()[0], joint.dims()[1]);
    if ns != d.sources() {
        return Err(Error::Shape(format!(
            "{ns} source symbols against {} distortion rows",
            d.sources()
        )));
    }
    Ok((0..nw)
        .map(|w| {
            let col: Vec<f64> = (0..ns).map(|s| joint.get(&[s, w])).collect();
            let pw: f64 = col.iter().sum();
            if pw > 0.0 {
                (pw, col.iter().map(|v| v / pw).collect())
            } else {
                (0.0, vec![1.0 / ns as f64; ns])
            }
        })
        .collect())
}

/// Interleave per-condition channels into rows indexed by `s * |W| + w`.
fn stack(channels: &[Vec<f64>], ns: usize, nr: usize) -> Channel {
    let nw = channels.len();
    let mut data = vec![0.0; ns * nw * nr];
    for (w, ch) in channels.iter().enumerate() {
        for s in 0..ns {
            data[(s * nw + w) * nr..(s * nw + w + 1) * nr]
                .copy_from_slice(&ch[s * nr..(s + 1) * nr]);
        }
    }
    Channel::from_flat_unchecked(ns * nw, nr, data)
}

/// `R_{S|W}(D)` by Blahut-Arimoto on all conditions with one shared slope.
pub fn conditional_rate_distortion_direct(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<RdResult> {
    let conds = conditions(joint, d)?;
    let sol = solve_target(&conds, d, target, opts)?;
    Ok(RdResult {
        rate: sol.rate,
        achieving_channel: stack(&sol.channels, d.sources(), d.reconstructions()),
        distortion_attained: sol.distortion,
        iterations: sol.iterations,
        gap_bound: sol.gap,
        slope: sol.lambda,
        boundary: sol.boundary,
        converged: sol.converged,
    })
}

/// Per-condition budgets `b*(w)` with equal rate-distortion slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeAllocation {
    pub budgets: Vec<f64>,
    /// `-R'_{S|W=w}(b*(w))` reported by each per-condition solve.
    pub slopes: Vec<f64>,
    pub rates: Vec<f64>,
    /// `Σ P(w) R_{S|W=w}(b*(w))`.
    pub rate: f64,
    pub channels: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// One node of a per-condition rate-distortion table.
#[derive(Clone, Copy, Debug)]
struct Node {
    b: f64,
    rate: f64,
}

fn solve_node(
    p: &[f64],
    d: &DistortionMatrix,
    b: f64,
    opts: &SolverOptions,
) -> Result<(Node, RdResult)> {
    let r = rate_distortion(
        &Pmf::new(p.to_vec()).unwrap_or_else(|_| Pmf::uniform(p.len())),
        d,
        b,
        opts,
    )?;
    Ok((Node { b, rate: r.rate }, r))
}

/// Exact minimizer of `Σ a_w f_w(b_w)` with `Σ a_w b_w = budget` for piecewise-linear convex `f_w`.
///
/// Starts every condition at its leftmost node and spends budget on segments in
/// order of decreasing steepness; within a condition convexity keeps segments in order.
fn allocate(tables: &[(f64, Vec<Node>)], budget: f64) -> Vec<f64> {
    let mut b: Vec<f64> = tables.iter().map(|(_, t)| t[0].b).collect();
    let mut remaining = budget - tables.iter().map(|(a, t)| a * t[0].b).sum::<f64>();
    let mut segs: Vec<(f64, usize, usize)> = Vec::new();
    for (w, (_, t)) in tables.iter().enumerate() {
        for k in 0..t.len().saturating_sub(1) {
            let steep = (t[k].rate - t[k + 1].rate) / (t[k + 1].b - t[k].b);
            segs.push((steep, w, k));
        }
    }
    segs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    // Enforce within-condition order even when rounding breaks convexity of the table.
    let mut next = vec![0usize; tables.len()];
    let mut pending = segs;
    while remaining > 0.0 && !pending.is_empty() {
        let pos = pending.iter().position(|&(_, w, k)| next[w] == k);
        let Some(pos) = pos else { break };
        let (_, w, k) = pending.remove(pos);
        let (a, t) = &tables[w];
        let width = t[k + 1].b - t[k].b;
        let cost = a * width;
        if cost <= remaining {
            b[w] = t[k + 1].b;
            remaining -= cost;
        } else {
            b[w] = t[k].b + remaining / a;
            remaining = 0.0;
        }
        next[w] = k + 1;
    }
    b
}

fn insert_node(t: &mut Vec<Node>, n: Node) {
    let pos = t.partition_point(|m| m.b < n.b);
    let near = |i: usize| (t[i].b - n.b).abs() < 1e-13;
    if (pos < t.len() && near(pos)) || (pos > 0 && near(pos - 1)) {
        return;
    }
    t.insert(pos, n);
}

const TABLE_NODES: usize = 33;
const REFINE_ROUNDS: usize = 6;

/// Split the budget `D` across conditions so that the per-condition slopes agree.
pub fn slope_allocation(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<SlopeAllocation> {
    opts.validate()?;
    let conds = conditions(joint, d)?;
    let nw = conds.len();
    let active: Vec<usize> = (0..nw).filter(|&w| conds[w].0 > 0.0).collect();
    let lims: Vec<(f64, f64)> = conds
        .iter()
        .map(|(_, p)| (d.d_min(p), d.d_max(p).0))
        .collect();
    let dmin: f64 = active.iter().map(|&w| conds[w].0 * lims[w].0).sum();
    let dmax: f64 = active
        .iter()
        .map(|&w| weighted(conds[w].0, lims[w].1))
        .sum();
    if !(target >= 0.0) || target < dmin - 1e-12 {
        return Err(Error::Infeasible(format!(
            "distortion {target} below the minimum {dmin}"
        )));
    }
    let mut budgets = vec![target; nw];
    let mut slopes = vec![0.0; nw];
    let mut rates = vec![0.0; nw];
    let mut channels: Vec<Vec<f64>> = conds.iter().map(|(_, p)| zero_rate(p, d).0).collect();
    let mut iterations = 0;
    if target >= dmax {
        let slack = target - dmax;
        for &w in &active {
            budgets[w] = lims[w].1 + slack;
        }
        return Ok(SlopeAllocation {
            budgets,
            slopes,
            rates,
            rate: 0.0,
            channels,
            iterations,
        });
    }
    let mut tables: Vec<(f64, Vec<Node>)> = Vec::with_capacity(active.len());
    for &w in &active {
        let (lo, hi) = lims[w];
        let p = &conds[w].1;
        let mut t = Vec::new();
        if hi - lo < 1e-12 {
            let (n, r) = solve_node(p, d, lo, opts)?;
            iterations += r.iterations;
            t.push(n);
        } else {
            for k in 0..TABLE_NODES {
                let b = lo + (hi - lo) * k as f64 / (TABLE_NODES - 1) as f64;
                let (n, r) = solve_node(p, d, b, opts)?;
                iterations += r.iterations;
                t.push(n);
            }
        }
        tables.push((conds[w].0, t));
    }
    let budget = target.max(dmin);
    let mut alloc = allocate(&tables, budget);
    for _ in 0..REFINE_ROUNDS {
        for (k, &w) in active.iter().enumerate() {
            let t = &tables[k].1;
            if t.len() < 2 {
                continue;
            }
            let b = alloc[k];
            // Neighbours strictly on each side, so an allocation sitting on a node refines both segments.
            let l = t.iter().rev().find(|n| n.b < b - 1e-13).map_or(b, |n| n.b);
            let r = t.iter().find(|n| n.b > b + 1e-13).map_or(b, |n| n.b);
            let mut fresh = Vec::new();
            for cand in [0.5 * (l + b), b, 0.5 * (b + r)] {
                if cand > lims[w].0 && cand < lims[w].1 {
                    fresh.push(solve_node(&conds[w].1, d, cand, opts)?);
                }
            }
            for (n, r) in fresh {
                iterations += r.iterations;
                insert_node(&mut tables[k].1, n);
            }
        }
        alloc = allocate(&tables, budget);
    }
    let mut total = 0.0;
    for (k, &w) in active.iter().enumerate() {
        let b = alloc[k].clamp(lims[w].0, lims[w].1);
        let (_, r) = solve_node(&conds[w].1, d, b, opts)?;
        iterations += r.iterations;
        budgets[w] = b;
        slopes[w] = r.slope;
        rates[w] = r.rate;
        total += conds[w].0 * r.rate;
        channels[w] = r.achieving_channel.data().to_vec();
    }
    Ok(SlopeAllocation {
        budgets,
        slopes,
        rates,
        rate: total,
        channels,
        iterations,
    })
}

/// Tolerated disagreement between the two routes before reporting a fault.
const ROUTE_FAULT: f64 = 1e-3;

/// `R_{S|W}(D)`, computed directly and through the per-condition decomposition.
///
/// Returns the lower of the two rates; a disagreement above `1e-3` is a solver fault.
pub fn conditional_rate_distortion(
    joint: &JointPmf,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<RdResult> {
    let direct = conditional_rate_distortion_direct(joint, d, target, opts)?;
    let split = slope_allocation(joint, d, target, opts)?;
    if (direct.rate - split.rate).abs() > ROUTE_FAULT {
        return Err(Error::SolverFault(format!(
            "direct conditional rate {} disagrees with decomposition {}",
            direct.rate, split.rate
        )));
    }
    if split.rate < direct.rate {
        let conds = conditions(joint, d)?;
        let dist: f64 = conds
            .iter()
            .zip(&split.channels)
            .map(|((a, p), ch)| weighted(*a, evaluate(p, d, ch).1))
            .sum();
        let slope = split.slopes.iter().copied().fold(0.0, f64::max);
        return Ok(RdResult {
            rate: split.rate,
            achieving_channel: stack(&split.channels, d.sources(), d.reconstructions()),
            distortion_attained: dist,
            iterations: direct.iterations + split.iterations,
            gap_bound: direct.gap_bound,
            slope,
            boundary: direct.boundary,
            converged: direct.converged,
        });
    }
    Ok(RdResult {
        iterations: direct.iterations + split.iterations,
        ..direct
    })
}

/// `R_{S|Z}(D)` where `Z` is the source observed through `ch`.
pub fn side_info_rate_distortion(
    source: &Pmf,
    ch: &Channel,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<RdResult> {
    let joint = JointPmf::from_input(source, ch)?;
    conditional_rate_distortion(&joint, d, target, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;
    use crate::util::trial_rng;
    use rand::Rng;

    fn o() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn independent_side_information_is_vacuous() {
        let src = Pmf::bernoulli(0.3).unwrap();
        let ch = Channel::constant(2, &Pmf::new(vec![0.4, 0.6]).unwrap());
        let d = DistortionMatrix::hamming(2);
        let a = side_info_rate_distortion(&src, &ch, &d, 0.1, &o()).unwrap();
        let b = rate_distortion(&src, &d, 0.1, &o()).unwrap();
        assert!((a.rate - b.rate).abs() < 1e-6);
    }

    #[test]
    fn revealing_side_information() {
        let src = Pmf::uniform(2);
        let d = DistortionMatrix::hamming(2);
        let r = side_info_rate_distortion(&src, &Channel::identity(2), &d, 0.0, &o()).unwrap();
        assert!(r.rate.abs() < 1e-9);
        let joint = JointPmf::from_input(&src, &Channel::identity(2)).unwrap();
        let a = slope_allocation(&joint, &d, 0.2, &o()).unwrap();
        assert_eq!(a.budgets, vec![0.2, 0.2]);
        assert_eq!(a.rate, 0.0);
    }

    #[test]
    fn erasure_side_information_leaves_nothing() {
        let joint = JointPmf::from_input(&Pmf::uniform(2), &Channel::bec(0.3).unwrap()).unwrap();
        let d = DistortionMatrix::erasure(2);
        let r = conditional_rate_distortion(&joint, &d, 0.3, &o()).unwrap();
        assert!(r.rate.abs() < 1e-6);
        let a = slope_allocation(&joint, &d, 0.3, &o()).unwrap();
        assert!(a.rate.abs() < 1e-6);
        let spent: f64 = [0.35, 0.35, 0.3]
            .iter()
            .zip(&a.budgets)
            .map(|(p, b)| p * b)
            .sum();
        assert!((spent - 0.3).abs() < 1e-9);
    }

    #[test]
    fn example_side_information_rate() {
        let (p, eps) = (0.1, 0.3);
        let d = DistortionMatrix::erasure(2);
        let r =
            side_info_rate_distortion(&Pmf::uniform(2), &Channel::bsc(p).unwrap(), &d, eps, &o())
                .unwrap();
        let want = binary_entropy(p).unwrap() - eps * binary_entropy(p / eps).unwrap();
        assert!((r.rate - want).abs() < 1e-4, "{} vs {want}", r.rate);
        assert!((r.rate - 0.19351).abs() < 1e-4);
    }

    #[test]
    fn near_duplicate_nodes_are_dropped() {
        let mut t = vec![Node { b: 0.1, rate: 1.0 }, Node { b: 0.2, rate: 0.5 }];
        insert_node(
            &mut t,
            Node {
                b: 0.1 + 2e-17,
                rate: 1.0,
            },
        );
        insert_node(
            &mut t,
            Node {
                b: 0.2 - 2e-17,
                rate: 0.5,
            },
        );
        assert_eq!(t.len(), 2);
        insert_node(&mut t, Node { b: 0.15, rate: 0.7 });
        assert_eq!(
            t.iter().map(|n| n.b).collect::<Vec<_>>(),
            vec![0.1, 0.15, 0.2]
        );
    }

    #[test]
    fn identical_conditionals_split_evenly() {
        let joint = JointPmf::new(vec![2, 2], vec![0.15, 0.15, 0.35, 0.35]).unwrap();
        let d = DistortionMatrix::hamming(2);
        let a = slope_allocation(&joint, &d, 0.1, &o()).unwrap();
        for b in &a.budgets {
            assert!((b - 0.1).abs() < 1e-6, "{:?}", a.budgets);
        }
    }

    #[test]
    fn routes_agree_on_random_instances() {
        let mut rng = trial_rng(31, 0);
        for _ in 0..10 {
            let v: Vec<f64> = (0..9).map(|_| rng.random::<f64>() + 0.02).collect();
            let s: f64 = v.iter().sum();
            let joint = JointPmf::new(vec![3, 3], v.iter().map(|x| x / s).collect()).unwrap();
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            if i == j {
                                0.0
                            } else {
                                0.5 + rng.random::<f64>()
                            }
                        })
                        .collect()
                })
                .collect();
            let d = DistortionMatrix::new(&rows).unwrap();
            let target = 0.05 + 0.3 * rng.random::<f64>();
            let a = conditional_rate_distortion_direct(&joint, &d, target, &o()).unwrap();
            let b = slope_allocation(&joint, &d, target, &o()).unwrap();
            assert!((a.rate - b.rate).abs() < 1e-4, "{} vs {}", a.rate, b.rate);
            let pw = joint.marginal_masses(&[1]);
            let spent: f64 = pw.iter().zip(&b.budgets).map(|(p, b)| p * b).sum();
            assert!((spent - target).abs() < 1e-6);
        }
    }
}

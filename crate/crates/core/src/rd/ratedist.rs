use super::{RdResult, SolverOptions};
use crate::error::{Error, Result};
use crate::prob::{weighted, Channel, DistortionMatrix, Pmf};

/// Fixed-slope Blahut-Arimoto solution for one source.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopePoint {
    pub lambda: f64,
    pub rate: f64,
    pub distortion: f64,
    /// Row-major `P(ŝ|s)`.
    pub channel: Vec<f64>,
    /// Reproduction marginal at the fixed point.
    pub output: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Row-shifted Boltzmann weights `2^{-λ(d - min_row d)}`, zero where `d` is infinite.
fn weights(d: &DistortionMatrix, lambda: f64) -> Vec<f64> {
    let nr = d.reconstructions();
    let mut w = Vec::with_capacity(d.sources() * nr);
    for s in 0..d.sources() {
        let row = d.row(s);
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        w.extend(row.iter().map(|&v| {
            if v.is_finite() {
                (-lambda * (v - m)).exp2()
            } else {
                0.0
            }
        }));
    }
    w
}

fn usable_columns(p: &[f64], d: &DistortionMatrix) -> Vec<bool> {
    (0..d.reconstructions())
        .map(|r| (0..d.sources()).any(|s| p[s] > 0.0 && d.get(s, r).is_finite()))
        .collect()
}

/// Minimize `I(S;Ŝ) + λ E d` for source masses `p`.
pub fn rd_at_slope(
    p: &[f64],
    d: &DistortionMatrix,
    lambda: f64,
    warm: Option<&[f64]>,
    tolerance: f64,
    max_iterations: usize,
) -> SlopePoint {
    let (ns, nr) = (d.sources(), d.reconstructions());
    let w = weights(d, lambda);
    let usable = usable_columns(p, d);
    let mut q: Vec<f64> = match warm {
        Some(q0)
            if q0.iter().zip(&usable).all(|(&v, &u)| u || v == 0.0)
                && q0.iter().sum::<f64>() > 0.0 =>
        {
            // Keep a floor so a warm start cannot lock out a column the new slope needs.
            let k = usable.iter().filter(|&&u| u).count() as f64;
            let mut q: Vec<f64> = q0
                .iter()
                .zip(&usable)
                .map(|(&v, &u)| if u { v + 1e-9 / k } else { 0.0 })
                .collect();
            let s: f64 = q.iter().sum();
            q.iter_mut().for_each(|v| *v /= s);
            q
        }
        _ => {
            let k = usable.iter().filter(|&&u| u).count() as f64;
            usable
                .iter()
                .map(|&u| if u { 1.0 / k } else { 0.0 })
                .collect()
        }
    };
    let mut z = vec![0.0; ns];
    let mut c = vec![0.0; nr];
    let mut gap;
    let mut iterations = 0;
    loop {
        for s in 0..ns {
            z[s] = (0..nr).map(|r| q[r] * w[s * nr + r]).sum();
        }
        c.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..ns {
            if p[s] == 0.0 {
                continue;
            }
            let f = p[s] / z[s];
            for r in 0..nr {
                c[r] += f * w[s * nr + r];
            }
        }
        let cmax = c.iter().copied().fold(0.0, f64::max);
        let mean: f64 = q
            .iter()
            .zip(&c)
            .filter(|(&a, &b)| a > 0.0 && b > 0.0)
            .map(|(a, b)| a * b * b.log2())
            .sum();
        gap = (cmax.log2() - mean).max(0.0);
        if gap < tolerance || iterations >= max_iterations {
            break;
        }
        iterations += 1;
        let mut total = 0.0;
        for r in 0..nr {
            q[r] *= c[r];
            total += q[r];
        }
        q.iter_mut().for_each(|v| *v /= total);
    }
    for s in 0..ns {
        z[s] = (0..nr).map(|r| q[r] * w[s * nr + r]).sum();
    }
    let mut channel = vec![0.0; ns * nr];
    for s in 0..ns {
        if z[s] > 0.0 {
            for r in 0..nr {
                channel[s * nr + r] = q[r] * w[s * nr + r] / z[s];
            }
        } else {
            let best = (0..nr)
                .min_by(|&a, &b| d.get(s, a).total_cmp(&d.get(s, b)))
                .unwrap_or(0);
            channel[s * nr + best] = 1.0;
        }
    }
    let (rate, distortion, output) = evaluate(p, d, &channel);
    SlopePoint {
        lambda,
        rate,
        distortion,
        channel,
        output,
        gap,
        iterations,
        converged: gap < tolerance,
    }
}

/// Rate, expected distortion and output marginal of a test channel.
pub(crate) fn evaluate(p: &[f64], d: &DistortionMatrix, channel: &[f64]) -> (f64, f64, Vec<f64>) {
    let (ns, nr) = (d.sources(), d.reconstructions());
    let mut out = vec![0.0; nr];
    let mut dist = 0.0;
    for s in 0..ns {
        for r in 0..nr {
            let t = channel[s * nr + r];
            out[r] += p[s] * t;
            if t > 0.0 {
                dist += weighted(p[s], t * d.get(s, r));
            }
        }
    }
    let mut rate = 0.0;
    for s in 0..ns {
        if p[s] == 0.0 {
            continue;
        }
        for r in 0..nr {
            let t = channel[s * nr + r];
            if t > 0.0 {
                rate += p[s] * t * (t / out[r]).log2();
            }
        }
    }
    (rate.max(0.0), dist, out)
}

/// Zero-rate solution: every source symbol maps to the column minimizing expected distortion.
pub(crate) fn zero_rate(p: &[f64], d: &DistortionMatrix) -> (Vec<f64>, f64) {
    let (dmax, col) = d.d_max(p);
    let nr = d.reconstructions();
    let mut channel = vec![0.0; d.sources() * nr];
    for s in 0..d.sources() {
        channel[s * nr + col] = 1.0;
    }
    (channel, dmax)
}

/// Result of a shared-slope search over several weighted sources.
pub(crate) struct TargetSolution {
    pub rate: f64,
    pub distortion: f64,
    pub channels: Vec<Vec<f64>>,
    pub lambda: f64,
    pub gap: f64,
    pub iterations: usize,
    pub boundary: bool,
    pub converged: bool,
}

struct Eval {
    lambda: f64,
    points: Vec<SlopePoint>,
    distortion: f64,
}

/// `min Σ_w a_w I_w` subject to `Σ_w a_w D_w ≤ target` with one shared slope.
///
/// Conditions with zero weight are skipped and receive their zero-rate channel.
pub(crate) fn solve_target(
    conds: &[(f64, Vec<f64>)],
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<TargetSolution> {
    opts.validate()?;
    if !(target >= 0.0) {
        return Err(Error::OutOfRange(format!("distortion target {target}")));
    }
    let active: Vec<usize> = (0..conds.len()).filter(|&i| conds[i].0 > 0.0).collect();
    let dmin: f64 = active
        .iter()
        .map(|&i| conds[i].0 * d.d_min(&conds[i].1))
        .sum();
    let dmax: f64 = active
        .iter()
        .map(|&i| weighted(conds[i].0, d.d_max(&conds[i].1).0))
        .sum();
    if target < dmin - 1e-12 {
        return Err(Error::Infeasible(format!(
            "distortion {target} below the minimum {dmin}"
        )));
    }
    let zero_channels = || {
        conds
            .iter()
            .map(|(_, p)| zero_rate(p, d).0)
            .collect::<Vec<_>>()
    };
    if target >= dmax {
        return Ok(TargetSolution {
            rate: 0.0,
            distortion: dmax,
            channels: zero_channels(),
            lambda: 0.0,
            gap: 0.0,
            iterations: 0,
            boundary: false,
            converged: true,
        });
    }
    let mut iterations = 0;
    let mut warm: Vec<Option<Vec<f64>>> = vec![None; conds.len()];
    let eval = |lambda: f64, warm: &mut Vec<Option<Vec<f64>>>, iterations: &mut usize| -> Eval {
        let mut points = Vec::with_capacity(active.len());
        let mut dist = 0.0;
        for &i in &active {
            let pt = rd_at_slope(
                &conds[i].1,
                d,
                lambda,
                warm[i].as_deref(),
                opts.tolerance,
                opts.max_iterations,
            );
            *iterations += pt.iterations;
            warm[i] = Some(pt.output.clone());
            dist += conds[i].0 * pt.distortion;
            points.push(pt);
        }
        Eval {
            lambda,
            points,
            distortion: dist,
        }
    };
    let (lam_lo, lam_hi) = opts.lambda_bracket;
    let mut hi = eval(lam_hi, &mut warm, &mut iterations);
    let assemble =
        |e: &Eval, gap_extra: f64, boundary: bool, iterations: usize, mix: Option<(&Eval, f64)>| {
            let mut channels = zero_channels();
            let mut gap = gap_extra;
            let mut converged = true;
            for (k, &i) in active.iter().enumerate() {
                let mut ch = e.points[k].channel.clone();
                gap += conds[i].0 * e.points[k].gap;
                converged &= e.points[k].converged;
                if let Some((other, theta)) = mix {
                    for (a, b) in ch.iter_mut().zip(&other.points[k].channel) {
                        *a = (1.0 - theta) * *a + theta * b;
                    }
                    gap += conds[i].0 * theta * other.points[k].gap;
                    converged &= other.points[k].converged;
                }
                channels[i] = ch;
            }
            let (mut rate, mut dist) = (0.0, 0.0);
            for &i in &active {
                let (r, dd, _) = evaluate(&conds[i].1, d, &channels[i]);
                rate += conds[i].0 * r;
                dist += conds[i].0 * dd;
            }
            TargetSolution {
                rate,
                distortion: dist,
                channels,
                lambda: e.lambda,
                gap,
                iterations,
                boundary,
                converged,
            }
        };
    if hi.distortion > target {
        return Ok(assemble(&hi, 0.0, true, iterations, None));
    }
    let mut lo = eval(lam_lo, &mut warm, &mut iterations);
    if lo.distortion <= target {
        return Ok(assemble(&lo, 0.0, false, iterations, None));
    }
    for _ in 0..opts.bisection_steps {
        if target - hi.distortion <= 1e-12 || hi.lambda - lo.lambda <= 1e-13 {
            break;
        }
        let mid = eval(0.5 * (lo.lambda + hi.lambda), &mut warm, &mut iterations);
        if mid.distortion <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if target - hi.distortion <= 1e-12 {
        return Ok(assemble(&hi, 0.0, false, iterations, None));
    }
    // Time-share the two bracketing points; both lie on supporting lines of nearly equal slope.
    let theta = ((target - hi.distortion) / (lo.distortion - hi.distortion)).clamp(0.0, 1.0);
    let slack = (hi.lambda - lo.lambda) * (lo.distortion - hi.distortion);
    Ok(assemble(&hi, slack, false, iterations, Some((&lo, theta))))
}

/// `R_S(D)` by slope bisection.
pub fn rate_distortion(
    source: &Pmf,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<RdResult> {
    if source.alphabet_size() != d.sources() {
        return Err(Error::Shape(format!(
            "source of size {} against {} distortion rows",
            source.alphabet_size(),
            d.sources()
        )));
    }
    let sol = solve_target(&[(1.0, source.probs().to_vec())], d, target, opts)?;
    let nr = d.reconstructions();
    Ok(RdResult {
        rate: sol.rate,
        achieving_channel: Channel::from_flat_unchecked(d.sources(), nr, sol.channels[0].clone()),
        distortion_attained: sol.distortion,
        iterations: sol.iterations,
        gap_bound: sol.gap,
        slope: sol.lambda,
        boundary: sol.boundary,
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;
    use crate::util::trial_rng;
    use rand::Rng;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn hamming_closed_form() {
        let src = Pmf::uniform(2);
        let d = DistortionMatrix::hamming(2);
        for k in 1..=20 {
            let target = 0.5 * k as f64 / 21.0;
            let r = rate_distortion(&src, &d, target, &opts()).unwrap();
            let want = 1.0 - binary_entropy(target).unwrap();
            assert!(
                (r.rate - want).abs() < 1e-6,
                "D={target}: {} vs {want}",
                r.rate
            );
            assert!(r.distortion_attained <= target + 1e-12);
        }
        assert_eq!(rate_distortion(&src, &d, 0.5, &opts()).unwrap().rate, 0.0);
    }

    #[test]
    fn erasure_source_is_linear() {
        let r = rate_distortion(
            &Pmf::uniform(2),
            &DistortionMatrix::erasure(2),
            0.3,
            &opts(),
        )
        .unwrap();
        assert!((r.rate - 0.7).abs() < 1e-6, "{}", r.rate);
        assert!((r.distortion_attained - 0.3).abs() < 1e-9);
    }

    #[test]
    fn below_minimum_is_infeasible() {
        let d = DistortionMatrix::new(&[vec![0.2, 1.0], vec![1.0, 0.2]]).unwrap();
        let e = rate_distortion(&Pmf::uniform(2), &d, 0.1, &opts()).unwrap_err();
        assert!(e.is_infeasible());
        let at = rate_distortion(&Pmf::uniform(2), &d, 0.2, &opts()).unwrap();
        assert!((at.rate - 1.0).abs() < 1e-6);
    }

    #[test]
    fn skewed_binary_hamming() {
        // R(D) = H2(p) - H2(D) for D < p.
        let src = Pmf::bernoulli(0.2).unwrap();
        let d = DistortionMatrix::hamming(2);
        for target in [0.02, 0.05, 0.1, 0.15] {
            let r = rate_distortion(&src, &d, target, &opts()).unwrap();
            let want = binary_entropy(0.2).unwrap() - binary_entropy(target).unwrap();
            assert!((r.rate - want).abs() < 1e-6);
        }
    }

    #[test]
    fn nonincreasing_in_distortion() {
        let mut rng = trial_rng(23, 0);
        for _ in 0..10 {
            let v: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = v.iter().sum();
            let src = Pmf::new(v.iter().map(|x| x / s).collect()).unwrap();
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| if i == j { 0.0 } else { rng.random::<f64>() })
                        .collect()
                })
                .collect();
            let d = DistortionMatrix::new(&rows).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..12 {
                let r = rate_distortion(&src, &d, 0.05 * k as f64, &opts()).unwrap();
                assert!(r.rate <= prev + 1e-9);
                prev = r.rate;
            }
        }
    }
}

use super::attack::{best_in_list, block_distortion, greedy_list, AttackStrategy};
use super::scheme::{draw_block, transmit, AttackPrep, RunConfig};
use super::SimReport;
use crate::error::{Error, Result};
use crate::prob::{sample_index, weighted, Channel};
use crate::regions::{GaussianSpec, SystemSpec};
use crate::util::trial_rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Per-letter key alphabet of the uncoded scheme, `⌊2^{R_K}⌋`.
pub(crate) fn key_alphabet(rk: f64) -> usize {
    if rk >= 63.0 {
        usize::MAX >> 1
    } else {
        (2f64.powf(rk) + 1e-9).floor().max(1.0) as usize
    }
}

/// Letterwise uncoded scheme: `x_i ~ map(·|s_i, k_i)` with `map` rows indexed `s * |K| + k`.
/// One channel use per letter, so `n = m`.
pub fn uncoded_run(
    sys: &SystemSpec,
    map: &Channel,
    m: usize,
    cfg: &RunConfig,
) -> Result<SimReport> {
    sys.validate()?;
    cfg.validate()?;
    if sys.gamma < 1.0 {
        return Err(Error::Config(format!(
            "uncoded scheme needs γ ≥ 1, got {}",
            sys.gamma
        )));
    }
    if m == 0 {
        return Err(Error::Config("block length m must be positive".into()));
    }
    let src = &sys.source;
    let p = src.pmf.probs();
    let (ns, nr) = (p.len(), src.d_b.reconstructions());
    let w = &sys.channel;
    let nk = key_alphabet(sys.rk);
    if map.inputs() != ns * nk || map.outputs() != w.inputs() {
        return Err(Error::Shape(format!(
            "map is {}x{}, expected {}x{} for key alphabet {nk}",
            map.inputs(),
            map.outputs(),
            ns * nk,
            w.inputs()
        )));
    }
    if cfg
        .attacks
        .iter()
        .any(|a| a.strategy == AttackStrategy::KeyExhaust)
    {
        return Err(Error::Config(
            "key_exhaust applies to the separate scheme only".into(),
        ));
    }
    let start = Instant::now();
    let py = map.compose(w.margin_y())?;
    let pz = map.compose(w.margin_z())?;
    let (ny, nz) = (py.outputs(), pz.outputs());
    // Bob: argmin_r Σ_s P(s) P(y|s,k) d(s,r) for every (y, k).
    let mut decoder = vec![0u16; ny * nk];
    for y in 0..ny {
        for k in 0..nk {
            let mut best = (f64::INFINITY, 0);
            for r in 0..nr {
                let cost: f64 = (0..ns)
                    .map(|s| weighted(p[s] * py.get(s * nk + k, y), src.d_b.get(s, r)))
                    .sum();
                if cost < best.0 - 1e-15 {
                    best = (cost, r);
                }
            }
            decoder[y * nk + k] = best.1 as u16;
        }
    }
    // Eve's per-letter posterior P(s|z), averaging over the key.
    let mut post = vec![0.0; nz * ns];
    for z in 0..nz {
        let row: Vec<f64> = (0..ns)
            .map(|s| p[s] * (0..nk).map(|k| pz.get(s * nk + k, z)).sum::<f64>() / nk as f64)
            .collect();
        let tot: f64 = row.iter().sum();
        for s in 0..ns {
            post[z * ns + s] = if tot > 0.0 { row[s] / tot } else { p[s] };
        }
    }
    let prep = AttackPrep::new(sys, cfg, m, None)?;
    let trials: Vec<(f64, Vec<f64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            let s = draw_block(p, m, &mut rng);
            let keys: Vec<usize> = (0..m).map(|_| rng.random_range(0..nk)).collect();
            let x: Vec<u16> = s
                .iter()
                .zip(&keys)
                .map(|(&si, &k)| map.sample(si as usize * nk + k, &mut rng) as u16)
                .collect();
            let (y, z) = transmit(&x, w, &mut rng);
            let shat: Vec<u16> = y
                .iter()
                .zip(&keys)
                .map(|(&yi, &k)| decoder[yi as usize * nk + k])
                .collect();
            let d_b = block_distortion(&src.d_b, &s, &shat);
            let eve = cfg
                .attacks
                .iter()
                .enumerate()
                .map(|(a, spec)| {
                    let mut arng = cfg.attack_rng(a, t);
                    match spec.strategy {
                        AttackStrategy::GreedyList => {
                            let samples: Vec<Vec<u16>> = (0..cfg.posterior_samples)
                                .map(|_| {
                                    z.iter()
                                        .map(|&zi| {
                                            sample_index(
                                                &post[zi as usize * ns..(zi as usize + 1) * ns],
                                                &mut arng,
                                            ) as u16
                                        })
                                        .collect()
                                })
                                .collect();
                            let list = greedy_list(&samples, &src.d_e, cfg.de, 1 << spec.bits(m));
                            best_in_list(&src.d_e, &s, &list)
                        }
                        AttackStrategy::RdCodebookIgnoreZ => {
                            best_in_list(&src.d_e, &s, prep.rd_codebook(a).expect("prepared"))
                        }
                        AttackStrategy::KeyExhaust => unreachable!(),
                    }
                })
                .collect();
            (d_b, eve)
        })
        .collect();
    let mut report = SimReport {
        trials: cfg.trials,
        m,
        n: m,
        legit_distortion_samples: Vec::with_capacity(cfg.trials),
        wiretap_distortion_samples: BTreeMap::new(),
        empirical_pad_distribution: None,
        pad_counts: None,
        de_target: cfg.de,
        timing: 0.0,
        warnings: Vec::new(),
        heuristic_aux: false,
    };
    let mut eve: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.trials); cfg.attacks.len()];
    for (d_b, e) in trials {
        report.legit_distortion_samples.push(d_b);
        for (slot, v) in eve.iter_mut().zip(e) {
            slot.push(v);
        }
    }
    for (spec, samples) in cfg.attacks.iter().zip(eve) {
        report
            .wiretap_distortion_samples
            .insert(spec.label(), samples);
    }
    report.timing = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Per-trial mean squared errors of the scaled-uncoded Gaussian scheme under MMSE estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianRun {
    pub legit: Vec<f64>,
    pub wiretap: Vec<f64>,
    /// Power actually used, `P' ≤ P`.
    pub power: f64,
}

impl GaussianRun {
    pub fn mean_legit(&self) -> f64 {
        self.legit.iter().sum::<f64>() / self.legit.len().max(1) as f64
    }

    pub fn mean_wiretap(&self) -> f64 {
        self.wiretap.iter().sum::<f64>() / self.wiretap.len().max(1) as f64
    }
}

/// `x = √(P'/N_S) s`; with `delta` the source is first quantized to the midpoints of a `delta` grid.
pub fn gaussian_uncoded_run(
    g: &GaussianSpec,
    power: f64,
    m: usize,
    trials: usize,
    seed: u64,
    delta: Option<f64>,
) -> Result<GaussianRun> {
    g.validate()?;
    if !(power >= 0.0 && power <= g.p + 1e-12) || m == 0 || trials == 0 {
        return Err(Error::Config(format!(
            "need 0 ≤ P' ≤ P, m ≥ 1, trials ≥ 1 (got {power}, {m}, {trials})"
        )));
    }
    if let Some(d) = delta {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Config(format!(
                "quantizer step must be positive, got {d}"
            )));
        }
    }
    let a = (power / g.ns).sqrt();
    let src = Normal::new(0.0, g.ns.sqrt()).expect("positive variance");
    let mmse = |noise: f64| {
        if noise.is_infinite() {
            0.0
        } else {
            a * g.ns / (a * a * g.ns + noise)
        }
    };
    let (cb, ce) = (mmse(g.nb), mmse(g.ne));
    let noise = |n: f64| {
        (n.is_finite() && n > 0.0).then(|| Normal::new(0.0, n.sqrt()).expect("positive variance"))
    };
    let (nb, ne) = (noise(g.nb), noise(g.ne));
    let rows: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let (mut eb, mut ee) = (0.0, 0.0);
            for _ in 0..m {
                let s: f64 = src.sample(&mut rng);
                let sq = delta.map_or(s, |d| d * ((s / d).floor() + 0.5));
                let x = a * sq;
                let y = x + nb.map_or(0.0, |n| n.sample(&mut rng));
                let z = if g.ne.is_infinite() {
                    0.0
                } else {
                    x + ne.map_or(0.0, |n| n.sample(&mut rng))
                };
                eb += (s - cb * y).powi(2);
                ee += (s - ce * z).powi(2);
            }
            (eb / m as f64, ee / m as f64)
        })
        .collect();
    let (legit, wiretap) = rows.into_iter().unzip();
    Ok(GaussianRun {
        legit,
        wiretap,
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{DistortionMatrix, Pmf, WiretapChannel};
    use crate::regions::SourceSpec;
    use crate::sim::{AttackSpec, AttackStrategy};

    fn example(y: Channel) -> SystemSpec {
        SystemSpec {
            source: SourceSpec {
                pmf: Pmf::uniform(2),
                d_b: DistortionMatrix::erasure(2),
                d_e: DistortionMatrix::erasure(2),
            },
            channel: WiretapChannel::new(y, Channel::bsc(0.1).unwrap()).unwrap(),
            gamma: 1.0,
            rk: 0.0,
        }
    }

    #[test]
    fn key_alphabet_floors() {
        assert_eq!(key_alphabet(0.0), 1);
        assert_eq!(key_alphabet(1.0), 2);
        assert_eq!(key_alphabet(1.58), 2);
        assert_eq!(key_alphabet(2.0), 4);
    }

    #[test]
    fn noiseless_identity_is_exact() {
        let rep = uncoded_run(
            &example(Channel::identity(2)),
            &Channel::identity(2),
            64,
            &RunConfig {
                trials: 50,
                ..RunConfig::default()
            },
        )
        .unwrap();
        assert!(rep.legit_distortion_samples.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn example_legit_distortion() {
        let cfg = RunConfig {
            trials: 4,
            seed: 1,
            attacks: vec![AttackSpec {
                strategy: AttackStrategy::GreedyList,
                rate: 0.0,
            }],
            de: 0.3,
            posterior_samples: 8,
        };
        let rep = uncoded_run(
            &example(Channel::bec(0.3).unwrap()),
            &Channel::identity(2),
            10_000,
            &cfg,
        )
        .unwrap();
        assert!(
            (rep.mean_legit_distortion() - 0.3).abs() < 0.01,
            "{}",
            rep.mean_legit_distortion()
        );
        assert_eq!(rep.wiretap_distortion_samples["greedy_list@0"].len(), 4);
    }

    #[test]
    fn key_exhaust_is_rejected() {
        let cfg = RunConfig {
            attacks: vec![AttackSpec {
                strategy: AttackStrategy::KeyExhaust,
                rate: 0.1,
            }],
            ..RunConfig::default()
        };
        assert!(matches!(
            uncoded_run(
                &example(Channel::identity(2)),
                &Channel::identity(2),
                8,
                &cfg
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gaussian_mmse_matches_closed_form() {
        let g = GaussianSpec {
            ns: 1.0,
            p: 1.0,
            nb: 0.5,
            ne: 2.0,
            gamma: 1.0,
            rk: 0.0,
        };
        let run = gaussian_uncoded_run(&g, 1.0, 2000, 20, 3, None).unwrap();
        assert!(
            (run.mean_legit() - 1.0 / 3.0).abs() < 0.01,
            "{}",
            run.mean_legit()
        );
        assert!(
            (run.mean_wiretap() - 2.0 / 3.0).abs() < 0.02,
            "{}",
            run.mean_wiretap()
        );
    }

    #[test]
    fn gaussian_power_cap() {
        let g = GaussianSpec {
            ns: 1.0,
            p: 1.0,
            nb: 0.5,
            ne: 2.0,
            gamma: 1.0,
            rk: 0.0,
        };
        assert!(gaussian_uncoded_run(&g, 1.5, 10, 1, 0, None).is_err());
        assert!(gaussian_uncoded_run(&g, 1.0, 10, 1, 0, Some(0.0)).is_err());
    }
}

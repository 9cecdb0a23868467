use super::attack::{
    best_in_list, block_distortion, greedy_list, random_blocks, AttackSpec, AttackStrategy,
    MAX_LIST_BITS,
};
use super::codebook::{build_codebook, likelihood_encode, Codebook};
use super::ledger::{derive_rates, map_g, one_time_pad, Auxiliary, Direction, RateLedger};
use super::SimReport;
use crate::error::{Error, Result};
use crate::prob::{mutual_information_io, sample_index, Channel, JointPmf, Pmf, WiretapChannel};
use crate::rd::{conditional_rate_distortion_direct, rate_distortion, SolverOptions};
use crate::regions::SystemSpec;
use crate::util::trial_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trials: usize,
    pub seed: u64,
    pub attacks: Vec<AttackSpec>,
    /// Wiretapper distortion target `D_E`.
    pub de: f64,
    /// Posterior draws behind each greedy list.
    pub posterior_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trials: 1000,
            seed: 0,
            attacks: Vec::new(),
            de: 0.0,
            posterior_samples: 256,
        }
    }
}

impl RunConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.posterior_samples == 0 || !(self.de >= 0.0) {
            return Err(Error::Config(format!(
                "need trials ≥ 1, posterior_samples ≥ 1, D_E ≥ 0 (got {}, {}, {})",
                self.trials, self.posterior_samples, self.de
            )));
        }
        for a in &self.attacks {
            if !(a.rate >= 0.0) || !a.rate.is_finite() {
                return Err(Error::Config(format!(
                    "attack rate must be finite and nonnegative, got {}",
                    a.rate
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn attack_rng(&self, attack: usize, trial: usize) -> rand_chacha::ChaCha8Rng {
        trial_rng(self.seed.wrapping_add(1 + attack as u64), trial as u64)
    }
}

/// Memoryless channel use: joint sampling when couplings are given, else independent margins.
pub fn transmit<R: Rng + ?Sized>(
    x: &[u16],
    w: &WiretapChannel,
    rng: &mut R,
) -> (Vec<u16>, Vec<u16>) {
    let nz = w.z_size();
    let mut y = Vec::with_capacity(x.len());
    let mut z = Vec::with_capacity(x.len());
    for &xi in x {
        let xi = xi as usize;
        if w.joint().is_some() {
            let cell = sample_index(&w.coupling(xi), rng);
            y.push((cell / nz) as u16);
            z.push((cell % nz) as u16);
        } else {
            y.push(w.margin_y().sample(xi, rng) as u16);
            z.push(w.margin_z().sample(xi, rng) as u16);
        }
    }
    (y, z)
}

pub(crate) fn draw_block<R: Rng + ?Sized>(p: &[f64], len: usize, rng: &mut R) -> Vec<u16> {
    (0..len).map(|_| sample_index(p, rng) as u16).collect()
}

fn log_table(ch: &Channel) -> Vec<f64> {
    ch.data().iter().map(|v| v.ln()).collect()
}

/// Legitimate distortion, pad index, wiretap distortion per attack, encoder fallback.
type TrialOutcome = (f64, usize, Vec<f64>, bool);

/// The two-layer separate scheme with a fixed random codebook.
#[derive(Debug, Clone)]

pub struct SeparateScheme {
    sys: SystemSpec,
    pub ledger: RateLedger,
    pub codebook: Codebook,
    /// `P_{Ŝ|S}`.
    pub test_channel: Channel,
    /// `P_{S|Ŝ}`.
    back: Channel,
    px_v: Channel,
    log_py_v: Vec<f64>,
    log_pz_v: Vec<f64>,
    ny: usize,
    nz: usize,
    pub heuristic_aux: bool,
    pub warnings: Vec<String>,
}

impl SeparateScheme {
    pub fn new(
        sys: &SystemSpec,
        test_channel: &Channel,
        aux: &Auxiliary,
        epsilon: f64,
        m: usize,
        seed: u64,
        memory_cap: usize,
    ) -> Result<Self> {
        let p = sys.source.pmf.probs();
        let nr = sys.source.d_b.reconstructions();
        if test_channel.inputs() != p.len() || test_channel.outputs() != nr {
            return Err(Error::Shape(format!(
                "test channel is {}x{}, expected {}x{nr}",
                test_channel.inputs(),
                test_channel.outputs(),
                p.len()
            )));
        }
        let ledger = derive_rates(sys, aux, epsilon, m)?;
        let mut warnings = ledger.warnings.clone();
        let info = mutual_information_io(p, test_channel);
        if info + epsilon > ledger.rt + 1e-12 {
            warnings.push(format!(
                "I(S;Ŝ) + ε = {:.6} exceeds R_t = {:.6}",
                info + epsilon,
                ledger.rt
            ));
        }
        let p_shat = test_channel.output_masses(p);
        let mut back = Vec::with_capacity(nr * p.len());
        for r in 0..nr {
            for s in 0..p.len() {
                back.push(if p_shat[r] > 0.0 {
                    p[s] * test_channel.get(s, r) / p_shat[r]
                } else {
                    p[s]
                });
            }
        }
        let back = Channel::from_flat_unchecked(nr, p.len(), back);
        let p_u = Pmf::new(aux.pu())?;
        let codebook = build_codebook(
            &ledger,
            &Pmf::new(p_shat)?,
            &p_u,
            &aux.pv_u(),
            seed,
            memory_cap,
        )?;
        let px_v = aux.px_v();
        let py_v = px_v.compose(sys.channel.margin_y())?;
        let pz_v = px_v.compose(sys.channel.margin_z())?;
        Ok(SeparateScheme {
            sys: sys.clone(),
            ledger,
            codebook,
            test_channel: test_channel.clone(),
            back,
            px_v,
            log_py_v: log_table(&py_v),
            log_pz_v: log_table(&pz_v),
            ny: py_v.outputs(),
            nz: pz_v.outputs(),
            heuristic_aux: false,
            warnings,
        })
    }

    pub fn key_space(&self) -> usize {
        1 << self.codebook.layout.key
    }

    /// Channel message carrying source index `j` under `key`.
    pub fn message_of(&self, j: usize, key: usize) -> Result<usize> {
        let l = &self.codebook.layout;
        let (jk, jp, jc) = l.split(j);
        let mk = one_time_pad(jk, key, l.key, Direction::Apply)?;
        let (m0, m1p) = map_g(l, mk, jp, Direction::Apply)?;
        Ok(l.message(m0, m1p, jc))
    }

    /// Source index recovered from a channel message and `key`.
    pub fn index_of(&self, msg: usize, key: usize) -> Result<usize> {
        let l = &self.codebook.layout;
        let (m0, m1p, mc) = l.split_message(msg);
        let (mk, jp) = map_g(l, m0, m1p, Direction::Invert)?;
        let jk = one_time_pad(mk, key, l.key, Direction::Invert)?;
        Ok(l.join(jk, jp, mc))
    }

    /// Likelihood-encode `s`, pad, map, and draw the channel input through `P_{X|V}`.
    pub fn encode<R: Rng + ?Sized>(
        &self,
        s: &[u16],
        key: usize,
        rng: &mut R,
    ) -> Result<(usize, usize, Vec<u16>)> {
        let j = likelihood_encode(s, &self.codebook, &self.back, rng)?;
        self.send(j, key, rng)
    }

    /// Like [`encode`](Self::encode), but an all-zero likelihood row falls back to the lowest-index
    /// codeword of least `d_B`; the flag reports the fallback.
    pub fn encode_or_nearest<R: Rng + ?Sized>(
        &self,
        s: &[u16],
        key: usize,
        rng: &mut R,
    ) -> Result<(usize, usize, Vec<u16>, bool)> {
        let (j, fell_back) = match likelihood_encode(s, &self.codebook, &self.back, rng) {
            Ok(j) => (j, false),
            Err(Error::Infeasible(_)) => {
                let d = &self.sys.source.d_b;
                let mut best = (f64::INFINITY, 0);
                for j in 0..self.codebook.source_words() {
                    let v = block_distortion(d, s, self.codebook.shat(j));
                    if v < best.0 {
                        best = (v, j);
                    }
                }
                (best.1, true)
            }
            Err(e) => return Err(e),
        };
        let (j, msg, x) = self.send(j, key, rng)?;
        Ok((j, msg, x, fell_back))
    }

    fn send<R: Rng + ?Sized>(
        &self,
        j: usize,
        key: usize,
        rng: &mut R,
    ) -> Result<(usize, usize, Vec<u16>)> {
        let msg = self.message_of(j, key)?;
        let x = self
            .codebook
            .v(msg)
            .iter()
            .map(|&v| self.px_v.sample(v as usize, rng) as u16)
            .collect();
        Ok((j, msg, x))
    }

    fn log_likelihoods(&self, out: &[u16], table: &[f64], width: usize) -> Vec<f64> {
        (0..self.codebook.source_words())
            .map(|msg| {
                self.codebook
                    .v(msg)
                    .iter()
                    .zip(out)
                    .map(|(&v, &o)| table[v as usize * width + o as usize])
                    .sum()
            })
            .collect()
    }

    fn ml(ll: &[f64]) -> usize {
        let mut best = 0;
        for (i, &v) in ll.iter().enumerate() {
            if v > ll[best] {
                best = i;
            }
        }
        best
    }

    /// Maximum-likelihood message decode, then undo the pad and the index map.
    pub fn legitimate_decode(&self, y: &[u16], key: usize) -> Result<Vec<u16>> {
        let msg = Self::ml(&self.log_likelihoods(y, &self.log_py_v, self.ny));
        Ok(self.codebook.shat(self.index_of(msg, key)?).to_vec())
    }

    /// Wiretapper posterior over source indices given `z^n`, averaging over the key.
    fn index_posterior(&self, z: &[u16]) -> Result<Vec<f64>> {
        let ll = self.log_likelihoods(z, &self.log_pz_v, self.nz);
        let top = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut w = vec![0.0; ll.len()];
        if top == f64::NEG_INFINITY {
            w.iter_mut().for_each(|v| *v = 1.0);
            return Ok(w);
        }
        for (msg, &l) in ll.iter().enumerate() {
            let e = (l - top).exp();
            if e == 0.0 {
                continue;
            }
            for key in 0..self.key_space() {
                w[self.index_of(msg, key)?] += e;
            }
        }
        Ok(w)
    }

    fn posterior_samples<R: Rng + ?Sized>(
        &self,
        z: &[u16],
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<u16>>> {
        let w = self.index_posterior(z)?;
        let total: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|v| v / total).collect();
        Ok((0..count)
            .map(|_| {
                let j = sample_index(&probs, rng);
                self.codebook
                    .shat(j)
                    .iter()
                    .map(|&r| self.back.sample(r as usize, rng) as u16)
                    .collect()
            })
            .collect())
    }

    /// Monte-Carlo trials; encoder fallbacks are counted in the report warnings.
    pub fn run(&self, cfg: &RunConfig) -> Result<SimReport> {
        cfg.validate()?;
        let start = Instant::now();
        let m = self.ledger.m;
        let src = &self.sys.source;
        let prep = AttackPrep::new(&self.sys, cfg, m, Some(&self.test_channel))?;
        let keys = self.key_space();
        let trials: Vec<Result<TrialOutcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t as u64);
                let s = draw_block(src.pmf.probs(), m, &mut rng);
                let key = rng.random_range(0..keys);
                let (j, msg, x, fell_back) = self.encode_or_nearest(&s, key, &mut rng)?;
                let l = &self.codebook.layout;
                let (m0, m1p, _) = l.split_message(msg);
                let (mk, _) = map_g(l, m0, m1p, Direction::Invert)?;
                debug_assert_eq!(self.index_of(msg, key)?, j);
                let (y, z) = transmit(&x, &self.sys.channel, &mut rng);
                let d_b = block_distortion(&src.d_b, &s, &self.legitimate_decode(&y, key)?);
                let mut eve = Vec::with_capacity(cfg.attacks.len());
                for (a, spec) in cfg.attacks.iter().enumerate() {
                    let mut arng = cfg.attack_rng(a, t);
                    eve.push(self.attack(a, spec, &s, &z, &prep, cfg, &mut arng)?);
                }
                Ok((d_b, mk, eve, fell_back))
            })
            .collect();
        let mut report = SimReport {
            trials: cfg.trials,
            m,
            n: self.ledger.n,
            legit_distortion_samples: Vec::with_capacity(cfg.trials),
            wiretap_distortion_samples: BTreeMap::new(),
            empirical_pad_distribution: None,
            pad_counts: None,
            de_target: cfg.de,
            timing: 0.0,
            warnings: self.warnings.clone(),
            heuristic_aux: self.heuristic_aux,
        };
        let mut counts = vec![0u64; keys];
        let mut eve: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.trials); cfg.attacks.len()];
        let mut fallbacks = 0;
        for t in trials {
            let (d_b, mk, e, fell_back) = t?;
            fallbacks += fell_back as usize;
            report.legit_distortion_samples.push(d_b);
            counts[mk] += 1;
            for (slot, v) in eve.iter_mut().zip(e) {
                slot.push(v);
            }
        }
        for (spec, samples) in cfg.attacks.iter().zip(eve) {
            report
                .wiretap_distortion_samples
                .insert(spec.label(), samples);
        }
        let dist: Vec<f64> = counts
            .iter()
            .map(|&c| c as f64 / cfg.trials as f64)
            .collect();
        report.empirical_pad_distribution =
            Some(Pmf::new(dist).unwrap_or_else(|_| Pmf::uniform(keys)));
        report.pad_counts = Some(counts);
        if fallbacks > 0 {
            report.warnings.push(format!(
                "{fallbacks} of {} blocks had no positive-likelihood codeword",
                cfg.trials
            ));
        }
        report.timing = start.elapsed().as_secs_f64();
        Ok(report)
    }

    #[allow(clippy::too_many_arguments)]
    fn attack<R: Rng + ?Sized>(
        &self,
        idx: usize,
        spec: &AttackSpec,
        s: &[u16],
        z: &[u16],
        prep: &AttackPrep,
        cfg: &RunConfig,
        rng: &mut R,
    ) -> Result<f64> {
        let d = &self.sys.source.d_e;
        let bits = spec.bits(self.ledger.m);
        match spec.strategy {
            AttackStrategy::GreedyList => {
                let samples = self.posterior_samples(z, cfg.posterior_samples, rng)?;
                Ok(best_in_list(
                    d,
                    s,
                    &greedy_list(&samples, d, cfg.de, 1 << bits),
                ))
            }
            AttackStrategy::RdCodebookIgnoreZ => Ok(best_in_list(d, s, prep.rd_codebook(idx)?)),
            AttackStrategy::KeyExhaust => {
                let msg = Self::ml(&self.log_likelihoods(z, &self.log_pz_v, self.nz));
                let l = &self.codebook.layout;
                let (bases, left): (Vec<&[u16]>, u32) = if bits >= l.total {
                    (
                        (0..self.codebook.source_words())
                            .map(|j| self.codebook.shat(j))
                            .collect(),
                        bits - l.total,
                    )
                } else {
                    let tried = 1usize << bits.min(l.key);
                    let bases = (0..tried)
                        .map(|k| self.index_of(msg, k).map(|j| self.codebook.shat(j)))
                        .collect::<Result<_>>()?;
                    (bases, bits.saturating_sub(l.key))
                };
                let mut best = f64::INFINITY;
                for base in bases {
                    if prep.same_alphabet {
                        best = best.min(block_distortion(d, s, base));
                    }
                    if let Some(refine) = &prep.refine {
                        for _ in 0..(1usize << left) - prep.same_alphabet as usize {
                            let cand: Vec<u16> = base
                                .iter()
                                .map(|&b| refine.sample(b as usize, rng) as u16)
                                .collect();
                            best = best.min(block_distortion(d, s, &cand));
                        }
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Per-run attack material shared by all trials.
pub(crate) struct AttackPrep {
    rd_books: Vec<Option<Vec<Vec<u16>>>>,
    /// `P(š|ŝ)` from the conditional rate-distortion test channel.
    refine: Option<Channel>,
    same_alphabet: bool,
}

impl AttackPrep {
    pub(crate) fn new(
        sys: &SystemSpec,
        cfg: &RunConfig,
        m: usize,
        test_channel: Option<&Channel>,
    ) -> Result<Self> {
        let src = &sys.source;
        let p = src.pmf.probs();
        let opts = SolverOptions::default();
        let mut rd_books = Vec::with_capacity(cfg.attacks.len());
        let mut refine = None;
        for (a, spec) in cfg.attacks.iter().enumerate() {
            let bits = spec.bits(m);
            if bits > MAX_LIST_BITS {
                return Err(Error::CapExceeded(format!(
                    "{} needs 2^{bits} list entries, cap is 2^{MAX_LIST_BITS}",
                    spec.label()
                )));
            }
            if spec.strategy == AttackStrategy::RdCodebookIgnoreZ {
                let rd = rate_distortion(&src.pmf, &src.d_e, cfg.de, &opts)?;
                let q = rd.achieving_channel.output_masses(p);
                let mut rng = trial_rng(cfg.seed.wrapping_add(1 + a as u64), u64::MAX);
                rd_books.push(Some(random_blocks(&q, m, 1 << bits, &mut rng)));
            } else {
                rd_books.push(None);
            }
            if spec.strategy == AttackStrategy::KeyExhaust && refine.is_none() {
                let Some(tc) = test_channel else {
                    return Err(Error::Config(
                        "key_exhaust applies to the separate scheme only".into(),
                    ));
                };
                let joint = JointPmf::from_input(&src.pmf, tc)?;
                let sol = conditional_rate_distortion_direct(&joint, &src.d_e, cfg.de, &opts)?;
                let (ns, nr, ne) = (p.len(), tc.outputs(), src.d_e.reconstructions());
                let pr = tc.output_masses(p);
                let mut data = vec![0.0; nr * ne];
                for r in 0..nr {
                    for s in 0..ns {
                        let post = if pr[r] > 0.0 {
                            p[s] * tc.get(s, r) / pr[r]
                        } else {
                            p[s]
                        };
                        for e in 0..ne {
                            data[r * ne + e] += post * sol.achieving_channel.get(s * nr + r, e);
                        }
                    }
                }
                refine = Some(Channel::from_flat_unchecked(nr, ne, data));
            }
        }
        Ok(AttackPrep {
            rd_books,
            refine,
            same_alphabet: src.d_b.reconstructions() == src.d_e.reconstructions(),
        })
    }

    pub(crate) fn rd_codebook(&self, idx: usize) -> Result<&[Vec<u16>]> {
        self.rd_books[idx]
            .as_deref()
            .ok_or_else(|| Error::Config("no rate-distortion codebook for this attack".into()))
    }
}

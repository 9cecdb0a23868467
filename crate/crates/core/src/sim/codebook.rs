use super::ledger::{IndexLayout, RateLedger};
use crate::error::{Error, Result};
use crate::prob::{Channel, Pmf};
use crate::util::trial_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap on stored codeword symbols.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 24;

/// Source codewords `ŝ^m(j)` and the two-layer channel codewords `u^n(m_0)`, `v^n(m_0, m_1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub layout: IndexLayout,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    shat: Vec<u16>,
    u: Vec<u16>,
    v: Vec<u16>,
}

impl Codebook {
    pub fn source_words(&self) -> usize {
        1 << self.layout.total
    }

    pub fn shat(&self, j: usize) -> &[u16] {
        &self.shat[j * self.m..(j + 1) * self.m]
    }

    pub fn u(&self, m0: usize) -> &[u16] {
        &self.u[m0 * self.n..(m0 + 1) * self.n]
    }

    /// Channel codeword of flat message `(m_0 << b_1) | m_1`.
    pub fn v(&self, msg: usize) -> &[u16] {
        &self.v[msg * self.n..(msg + 1) * self.n]
    }
}

fn draw(p: &[f64], rng: &mut ChaCha8Rng) -> u16 {
    crate::prob::sample_index(p, rng) as u16
}

/// Random codebook: `ŝ` i.i.d. `P_Ŝ`, `u` i.i.d. `P_U`, `v` drawn through `P_{V|U}` letterwise.
pub fn build_codebook(
    ledger: &RateLedger,
    p_shat: &Pmf,
    p_u: &Pmf,
    pv_u: &Channel,
    seed: u64,
    memory_cap: usize,
) -> Result<Codebook> {
    let layout = ledger.layout();
    if pv_u.inputs() != p_u.alphabet_size() {
        return Err(Error::Shape(format!(
            "P_V|U has {} rows for |U| = {}",
            pv_u.inputs(),
            p_u.alphabet_size()
        )));
    }
    if p_shat.alphabet_size() > u16::MAX as usize + 1 || pv_u.outputs() > u16::MAX as usize + 1 {
        return Err(Error::Shape("alphabets above 65536 letters".into()));
    }
    let (m, n) = (ledger.m, ledger.n);
    let words = 1u128 << layout.total;
    let symbols = words * m as u128 + (1u128 << layout.common) * n as u128 + words * n as u128;
    if layout.total >= 48 || symbols > memory_cap as u128 {
        return Err(Error::CapExceeded(format!(
            "codebook needs {symbols} symbols, cap is {memory_cap}"
        )));
    }
    let words = words as usize;
    let mut rng = trial_rng(seed, 0);
    let shat = (0..words * m)
        .map(|_| draw(p_shat.probs(), &mut rng))
        .collect();
    let mut rng = trial_rng(seed, 1);
    let u: Vec<u16> = (0..(1usize << layout.common) * n)
        .map(|_| draw(p_u.probs(), &mut rng))
        .collect();
    let mut rng = trial_rng(seed, 2);
    let per_u = 1usize << layout.private;
    let mut v = Vec::with_capacity(words * n);
    for m0 in 0..1usize << layout.common {
        for _ in 0..per_u {
            v.extend((0..n).map(|i| draw(pv_u.row(u[m0 * n + i] as usize), &mut rng)));
        }
    }
    Ok(Codebook {
        layout,
        m,
        n,
        seed,
        shat,
        u,
        v,
    })
}

/// Draw `j` with probability proportional to `∏ P(s_i | ŝ_i(j))`.
pub fn likelihood_encode<R: Rng + ?Sized>(
    s: &[u16],
    cb: &Codebook,
    back: &Channel,
    rng: &mut R,
) -> Result<usize> {
    if s.len() != cb.m {
        return Err(Error::Shape(format!(
            "source block has {} letters, codebook expects {}",
            s.len(),
            cb.m
        )));
    }
    let logw: Vec<f64> = (0..cb.source_words())
        .map(|j| {
            cb.shat(j)
                .iter()
                .zip(s)
                .map(|(&r, &x)| back.get(r as usize, x as usize).ln())
                .sum()
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::Infeasible(
            "no codeword explains the source block".into(),
        ));
    }
    let w: Vec<f64> = logw.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (j, &x) in w.iter().enumerate() {
        if u < x {
            return Ok(j);
        }
        u -= x;
    }
    Ok(w.iter().rposition(|&x| x > 0.0).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ledger::RateLedger;

    fn ledger(m: usize, rt: f64) -> RateLedger {
        RateLedger {
            rk: 0.0,
            r0: 0.0,
            r1: rt,
            r1p: rt,
            rt,
            rc: 0.0,
            rp: rt,
            m,
            n: m,
            epsilon: 0.01,
            warnings: vec![],
        }
    }

    fn trivial_u() -> (Pmf, Channel) {
        (Pmf::uniform(1), Channel::new(&[vec![0.5, 0.5]]).unwrap())
    }

    #[test]
    fn sizes_follow_ceilings() {
        let (pu, pvu) = trivial_u();
        let cb = build_codebook(
            &ledger(1, 1.0),
            &Pmf::uniform(3),
            &pu,
            &pvu,
            0,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap();
        assert_eq!(cb.source_words(), 2);
        assert_eq!(cb.shat(1).len(), 1);
        let cb = build_codebook(
            &ledger(12, 0.6),
            &Pmf::uniform(3),
            &pu,
            &pvu,
            0,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap();
        assert_eq!(cb.source_words(), 256);
    }

    #[test]
    fn deterministic_in_seed() {
        let (pu, pvu) = trivial_u();
        let a = build_codebook(
            &ledger(8, 0.5),
            &Pmf::uniform(2),
            &pu,
            &pvu,
            11,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap();
        let b = build_codebook(
            &ledger(8, 0.5),
            &Pmf::uniform(2),
            &pu,
            &pvu,
            11,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap();
        let c = build_codebook(
            &ledger(8, 0.5),
            &Pmf::uniform(2),
            &pu,
            &pvu,
            12,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a.shat, c.shat);
    }

    #[test]
    fn memory_cap() {
        let (pu, pvu) = trivial_u();
        let e =
            build_codebook(&ledger(40, 0.5), &Pmf::uniform(2), &pu, &pvu, 0, 1 << 20).unwrap_err();
        assert!(matches!(e, Error::CapExceeded(_)));
    }

    fn fixed(m: usize, words: &[&[u16]]) -> Codebook {
        let bits = (words.len() as f64).log2() as u32;
        let layout = IndexLayout {
            total: bits,
            common: 0,
            private: bits,
            private_public: bits,
            channel: 0,
            key: 0,
            public: bits,
        };
        Codebook {
            layout,
            m,
            n: 0,
            seed: 0,
            shat: words.concat(),
            u: vec![],
            v: vec![],
        }
    }

    #[test]
    fn exact_match_is_certain() {
        let cb = fixed(3, &[&[0, 1, 1], &[1, 1, 0], &[0, 0, 0], &[1, 0, 1]]);
        let mut rng = trial_rng(0, 0);
        for _ in 0..100 {
            assert_eq!(
                likelihood_encode(&[1, 1, 0], &cb, &Channel::identity(2), &mut rng).unwrap(),
                1
            );
        }
        assert!(
            likelihood_encode(&[1, 1, 1], &cb, &Channel::identity(2), &mut rng)
                .unwrap_err()
                .is_infeasible()
        );
    }

    #[test]
    fn tied_codewords_split_evenly() {
        let cb = fixed(2, &[&[0, 1], &[0, 1]]);
        let mut rng = trial_rng(4, 0);
        let hits = (0..10_000)
            .filter(|_| {
                likelihood_encode(&[0, 1], &cb, &Channel::identity(2), &mut rng).unwrap() == 0
            })
            .count();
        let sd = (10_000.0f64 * 0.25).sqrt();
        assert!((hits as f64 - 5000.0).abs() < 3.0 * sd, "{hits}");
    }

    #[test]
    fn selection_matches_product_weights() {
        let words: [&[u16]; 4] = [&[0, 0, 0, 0], &[0, 1, 0, 1], &[1, 1, 1, 0], &[1, 1, 1, 1]];
        let cb = fixed(4, &words);
        let back = Channel::bsc(0.2).unwrap();
        let s = [0u16, 1, 1, 0];
        // Weights 0.8^(4-d) 0.2^d from Hamming distances to s.
        let w: Vec<f64> = words
            .iter()
            .map(|c| {
                let d = c.iter().zip(&s).filter(|(a, b)| a != b).count() as i32;
                0.8f64.powi(4 - d) * 0.2f64.powi(d)
            })
            .collect();
        let total: f64 = w.iter().sum();
        let trials = 20_000;
        let mut counts = [0usize; 4];
        let mut rng = trial_rng(9, 0);
        for _ in 0..trials {
            counts[likelihood_encode(&s, &cb, &back, &mut rng).unwrap()] += 1;
        }
        for j in 0..4 {
            let p = w[j] / total;
            let sd = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (counts[j] as f64 - trials as f64 * p).abs() < 3.0 * sd + 1e-9,
                "{j}: {counts:?}"
            );
        }
    }
}

use crate::error::{Error, Result};
use crate::gamma::GammaWitness;
use crate::prob::{entropy_of, Channel, Pmf};
use crate::regions::SystemSpec;
use serde::{Deserialize, Serialize};

/// Two-layer code auxiliaries `P_X P_{V|X} P_{U|V}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Auxiliary {
    pub px: Pmf,
    pub pv_x: Channel,
    pub pu_v: Channel,
}

impl Auxiliary {
    pub fn new(px: Pmf, pv_x: Channel, pu_v: Channel) -> Result<Self> {
        if pv_x.inputs() != px.alphabet_size() || pu_v.inputs() != pv_x.outputs() {
            return Err(Error::Shape(format!(
                "auxiliary chain sizes disagree: |X|={}, P_V|X is {}x{}, P_U|V is {}x{}",
                px.alphabet_size(),
                pv_x.inputs(),
                pv_x.outputs(),
                pu_v.inputs(),
                pu_v.outputs()
            )));
        }
        Ok(Auxiliary { px, pv_x, pu_v })
    }

    /// Constant `U`, `V = X`.
    pub fn single_layer(px: Pmf) -> Self {
        let n = px.alphabet_size();
        Auxiliary {
            px,
            pv_x: Channel::identity(n),
            pu_v: Channel::constant(n, &Pmf::uniform(1)),
        }
    }

    pub fn from_witness(w: &GammaWitness) -> Result<Self> {
        match w {
            GammaWitness::Auxiliary { px, pv_x, pu_v } => {
                Auxiliary::new(px.clone(), pv_x.clone(), pu_v.clone())
            }
            GammaWitness::Coupling { .. } => Err(Error::Config(
                "a coupling witness carries no code auxiliaries".into(),
            )),
        }
    }

    /// `P(v)`.
    pub fn pv(&self) -> Vec<f64> {
        self.pv_x.output_masses(self.px.probs())
    }

    /// `P(u)`.
    pub fn pu(&self) -> Vec<f64> {
        self.pu_v.output_masses(&self.pv())
    }

    /// `P(v|u)` by Bayes; rows with `P(u) = 0` are uniform.
    pub fn pv_u(&self) -> Channel {
        let (nv, nu) = (self.pu_v.inputs(), self.pu_v.outputs());
        let (pv, pu) = (self.pv(), self.pu());
        let mut data = vec![0.0; nu * nv];
        for u in 0..nu {
            for v in 0..nv {
                data[u * nv + v] = if pu[u] > 0.0 {
                    pv[v] * self.pu_v.get(v, u) / pu[u]
                } else {
                    1.0 / nv as f64
                };
            }
        }
        Channel::from_flat_unchecked(nu, nv, data)
    }

    /// `P(x|v)` by Bayes; rows with `P(v) = 0` follow `P_X`.
    pub fn px_v(&self) -> Channel {
        let (nx, nv) = (self.pv_x.inputs(), self.pv_x.outputs());
        let pv = self.pv();
        let px = self.px.probs();
        let mut data = vec![0.0; nv * nx];
        for v in 0..nv {
            for x in 0..nx {
                data[v * nx + x] = if pv[v] > 0.0 {
                    px[x] * self.pv_x.get(x, v) / pv[v]
                } else {
                    px[x]
                };
            }
        }
        Channel::from_flat_unchecked(nv, nx, data)
    }

    /// `(I(U;B), I(V;B|U))` for the output `B` of `ch`, using the chain `U - V - X - B`.
    fn layer_informations(&self, ch: &Channel) -> (f64, f64) {
        let pv = self.pv();
        let pb_v = self.px_v().compose(ch).expect("sizes checked");
        let nb = ch.outputs();
        let (nv, nu) = (self.pu_v.inputs(), self.pu_v.outputs());
        let pb = pb_v.output_masses(&pv);
        let mut h_b_u = 0.0;
        let pu = self.pu();
        let pv_u = self.pv_u();
        for u in 0..nu {
            if pu[u] == 0.0 {
                continue;
            }
            let row: Vec<f64> = (0..nb)
                .map(|b| (0..nv).map(|v| pv_u.get(u, v) * pb_v.get(v, b)).sum())
                .collect();
            h_b_u += pu[u] * entropy_of(&row);
        }
        let h_b_v: f64 = (0..nv)
            .filter(|&v| pv[v] > 0.0)
            .map(|v| pv[v] * entropy_of(pb_v.row(v)))
            .sum();
        ((entropy_of(&pb) - h_b_u).max(0.0), (h_b_u - h_b_v).max(0.0))
    }
}

/// Integer bit budget of each index; all counts are powers of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLayout {
    pub total: u32,
    pub common: u32,
    pub private: u32,
    pub private_public: u32,
    pub channel: u32,
    pub key: u32,
    pub public: u32,
}

impl IndexLayout {
    /// Flat source-codeword index of `(j_k, j_p, j_c)`.
    pub fn join(&self, jk: usize, jp: usize, jc: usize) -> usize {
        ((jk << self.public) | jp) << self.channel | jc
    }

    pub fn split(&self, j: usize) -> (usize, usize, usize) {
        let jc = j & mask(self.channel);
        let rest = j >> self.channel;
        (rest >> self.public, rest & mask(self.public), jc)
    }

    /// Channel message index of `(m_0, m_1', m_c)`.
    pub fn message(&self, m0: usize, m1p: usize, mc: usize) -> usize {
        (m0 << self.private) | (m1p << self.channel) | mc
    }

    pub fn split_message(&self, msg: usize) -> (usize, usize, usize) {
        let m1 = msg & mask(self.private);
        (
            msg >> self.private,
            m1 >> self.channel,
            m1 & mask(self.channel),
        )
    }
}

pub(crate) fn mask(bits: u32) -> usize {
    (1usize << bits) - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateLedger {
    pub rk: f64,
    pub r0: f64,
    pub r1: f64,
    pub r1p: f64,
    pub rt: f64,
    pub rc: f64,
    pub rp: f64,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub warnings: Vec<String>,
}

fn ceil_bits(m: usize, rate: f64) -> u32 {
    (m as f64 * rate - 1e-9).ceil().max(0.0) as u32
}

impl RateLedger {
    pub fn layout(&self) -> IndexLayout {
        let total = ceil_bits(self.m, self.rt);
        let common = ceil_bits(self.m, self.r0).min(total);
        let private = total - common;
        let private_public = ceil_bits(self.m, self.r1p).min(private);
        let channel = private - private_public;
        let key = ceil_bits(self.m, self.rk).min(total - channel);
        IndexLayout {
            total,
            common,
            private,
            private_public,
            channel,
            key,
            public: total - channel - key,
        }
    }
}

/// Code rates for the two-layer secrecy code driven by `aux`.
///
/// Negative layer rates are clipped to zero, `R_1'` to `R_1`, and a key rate
/// above `R_t - R_c` to that value; every clip is recorded in `warnings`.
pub fn derive_rates(
    sys: &SystemSpec,
    aux: &Auxiliary,
    epsilon: f64,
    m: usize,
) -> Result<RateLedger> {
    sys.validate()?;
    if !(epsilon > 0.0) || m == 0 {
        return Err(Error::OutOfRange(format!(
            "need epsilon > 0 and m ≥ 1 (epsilon={epsilon}, m={m})"
        )));
    }
    if aux.px.alphabet_size() != sys.channel.inputs() {
        return Err(Error::Shape(format!(
            "auxiliary input has {} letters, channel has {}",
            aux.px.alphabet_size(),
            sys.channel.inputs()
        )));
    }
    let g = sys.gamma;
    let (i_uy, i_vy_u) = aux.layer_informations(sys.channel.margin_y());
    let (_, i_vz_u) = aux.layer_informations(sys.channel.margin_z());
    let mut warnings = Vec::new();
    let mut clip = |name: &str, v: f64, lo: f64, hi: f64| {
        let c = v.clamp(lo, hi);
        if c != v {
            warnings.push(format!("{name} = {v:.6} clipped to {c:.6}"));
        }
        c
    };
    let r0 = clip("R_0", g * i_uy - epsilon, 0.0, f64::INFINITY);
    let r1 = clip("R_1", g * i_vy_u - epsilon, 0.0, f64::INFINITY);
    let r1p = clip("R_1'", g * i_vz_u + epsilon, 0.0, r1);
    let rt = r0 + r1;
    let rc = r1 - r1p;
    let rk = clip("R_K", sys.rk, 0.0, rt - rc);
    Ok(RateLedger {
        rk,
        r0,
        r1,
        r1p,
        rt,
        rc,
        rp: rt - rc - rk,
        m,
        n: (m as f64 * g + 1e-9).floor() as usize,
        epsilon,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Apply,
    Invert,
}

/// Modular one-time pad on `[2^bits]`.
pub fn one_time_pad(index: usize, key: usize, bits: u32, dir: Direction) -> Result<usize> {
    let size = 1usize << bits;
    if index >= size || key >= size {
        return Err(Error::OutOfRange(format!(
            "pad operands ({index}, {key}) outside [0, {size})"
        )));
    }
    Ok(match dir {
        Direction::Apply => (index + key) % size,
        Direction::Invert => (index + size - key) % size,
    })
}

/// Bijection `(m_k, j_p) <-> (m_0, m_1')` through the shared flat index `m_k 2^{b_p} + j_p`.
pub fn map_g(layout: &IndexLayout, a: usize, b: usize, dir: Direction) -> Result<(usize, usize)> {
    if layout.key + layout.public != layout.common + layout.private_public {
        return Err(Error::Config(format!(
            "inconsistent index layout {layout:?}"
        )));
    }
    let (ra, rb) = match dir {
        Direction::Apply => (layout.key, layout.public),
        Direction::Invert => (layout.common, layout.private_public),
    };
    if a >> ra != 0 || b >> rb != 0 {
        return Err(Error::OutOfRange(format!(
            "indices ({a}, {b}) outside [2^{ra}]x[2^{rb}]"
        )));
    }
    let flat = (a << rb) | b;
    Ok(match dir {
        Direction::Apply => (
            flat >> layout.private_public,
            flat & mask(layout.private_public),
        ),
        Direction::Invert => (flat >> layout.public, flat & mask(layout.public)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, DistortionMatrix, WiretapChannel};
    use crate::regions::SourceSpec;
    use crate::util::trial_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn example(rk: f64) -> SystemSpec {
        SystemSpec {
            source: SourceSpec {
                pmf: Pmf::uniform(2),
                d_b: DistortionMatrix::erasure(2),
                d_e: DistortionMatrix::erasure(2),
            },
            channel: WiretapChannel::new(Channel::bec(0.3).unwrap(), Channel::bsc(0.1).unwrap())
                .unwrap(),
            gamma: 1.0,
            rk,
        }
    }

    #[test]
    fn example_single_layer_rates() {
        let l = derive_rates(
            &example(0.0),
            &Auxiliary::single_layer(Pmf::uniform(2)),
            0.05,
            12,
        )
        .unwrap();
        assert_eq!(l.r0, 0.0);
        assert!((l.r1 - 0.65).abs() < 1e-12);
        assert!((l.r1p - (1.0 - binary_entropy(0.1).unwrap() + 0.05)).abs() < 1e-12);
        assert!((l.r1p - 0.58100).abs() < 1e-5 && (l.rc - 0.06900).abs() < 1e-5);
        assert_eq!(l.rt - l.rc - l.rp, l.rk);
        assert_eq!(l.n, 12);
        assert!(l.warnings.iter().any(|w| w.starts_with("R_0")));
    }

    #[test]
    fn key_is_clipped() {
        let l = derive_rates(
            &example(2.0),
            &Auxiliary::single_layer(Pmf::uniform(2)),
            0.05,
            12,
        )
        .unwrap();
        assert!((l.rk - (l.rt - l.rc)).abs() < 1e-12 && l.rp.abs() < 1e-12);
        assert!(l.warnings.iter().any(|w| w.starts_with("R_K")));
    }

    #[test]
    fn noiseless_two_layer() {
        // U = V = X: all rate sits in the common layer.
        let sys = SystemSpec {
            channel: WiretapChannel::new(Channel::identity(2), Channel::bsc(0.2).unwrap()).unwrap(),
            ..example(0.0)
        };
        let aux =
            Auxiliary::new(Pmf::uniform(2), Channel::identity(2), Channel::identity(2)).unwrap();
        let l = derive_rates(&sys, &aux, 0.01, 8).unwrap();
        assert!((l.r0 - 0.99).abs() < 1e-12);
        assert_eq!(l.r1, 0.0);
        assert_eq!(l.rc, 0.0);
    }

    #[test]
    fn layout_matches_example() {
        let l = derive_rates(
            &example(0.0),
            &Auxiliary::single_layer(Pmf::uniform(2)),
            0.05,
            12,
        )
        .unwrap();
        let b = l.layout();
        assert_eq!(
            (
                b.total,
                b.common,
                b.private,
                b.private_public,
                b.channel,
                b.key,
                b.public
            ),
            (8, 0, 8, 7, 1, 0, 7)
        );
    }

    #[test]
    fn pad_cases() {
        assert_eq!(one_time_pad(5, 0, 3, Direction::Apply).unwrap(), 5);
        assert!(one_time_pad(8, 0, 3, Direction::Apply).is_err());
        // Every translate of the uniform law on [2^b] is uniform.
        for k in 0..8 {
            let mut counts = [0; 8];
            for j in 0..8 {
                counts[one_time_pad(j, k, 3, Direction::Apply).unwrap()] += 1;
            }
            assert!(counts.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn map_g_convention_and_roundtrip() {
        let layout = IndexLayout {
            total: 9,
            common: 3,
            private: 6,
            private_public: 2,
            channel: 4,
            key: 1,
            public: 4,
        };
        assert_eq!(map_g(&layout, 0, 0, Direction::Apply).unwrap(), (0, 0));
        assert_eq!(
            1u64 << (layout.key + layout.public),
            1u64 << (layout.common + layout.private_public)
        );
        let mut rng = trial_rng(3, 0);
        for _ in 0..1000 {
            let (a, b) = (rng.random_range(0..2), rng.random_range(0..16));
            let (m0, m1p) = map_g(&layout, a, b, Direction::Apply).unwrap();
            assert_eq!(map_g(&layout, m0, m1p, Direction::Invert).unwrap(), (a, b));
        }
        let bad = IndexLayout { key: 2, ..layout };
        assert!(matches!(
            map_g(&bad, 0, 0, Direction::Apply),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn pad_inverts(bits in 0u32..12, a in any::<u64>(), b in any::<u64>()) {
            let size = 1u64 << bits;
            let (j, k) = ((a % size) as usize, (b % size) as usize);
            let m = one_time_pad(j, k, bits, Direction::Apply).unwrap();
            prop_assert_eq!(one_time_pad(m, k, bits, Direction::Invert).unwrap(), j);
        }

        #[test]
        fn index_split_is_bijective(c in 0u32..4, p in 0u32..4, k in 0u32..4, j in any::<u64>()) {
            let layout = IndexLayout { total: c + p + k, common: 0, private: c, private_public: 0, channel: c, key: k, public: p };
            let j = (j % (1u64 << layout.total)) as usize;
            let (jk, jp, jc) = layout.split(j);
            prop_assert_eq!(layout.join(jk, jp, jc), j);
        }
    }
}

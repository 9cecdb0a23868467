//! Finite-alphabet distributions, channels and distortion measures.
//!
//! All logarithms are base 2. Constructors validate and never renormalize:
//! a vector that misses unit mass by more than [`PMF_TOL`] is rejected.

mod degraded;
mod density;
mod measures;
mod typical;

pub use degraded::{is_degraded, DegradedVerdict};
pub use density::{entropy_density_samples, information_density_samples};
pub use measures::{
    binary_entropy, conditional_entropy, conditional_mutual_information, entropy, entropy_of,
    kl_divergence, mutual_information, mutual_information_io, tv_distance, Masses,
};
pub use typical::{typical_set_membership, TypicalityMode};

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance on the total mass of input distributions.
pub const PMF_TOL: f64 = 1e-9;

fn check_masses(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf(format!("{what}: empty")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidPmf(format!("{what}: entry {i} = {p}")));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PMF_TOL {
        return Err(Error::InvalidPmf(format!(
            "{what}: pmf sum {sum} differs from 1"
        )));
    }
    Ok(())
}

/// Draw an index from a nonnegative weight vector summing to one.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// A probability mass function on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_masses(&probs, "pmf")?;
        Ok(Pmf { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform pmf needs a nonempty alphabet");
        Pmf {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::OutOfRange(format!(
                "point mass at {at} on alphabet {n}"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Pmf { probs })
    }

    /// `[1-p, p]`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("bernoulli parameter {p}")));
        }
        Ok(Pmf {
            probs: vec![1.0 - p, p],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng)
    }
}

/// Joint pmf over two or three finite alphabets, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.len() > 3 {
            return Err(Error::Shape(format!(
                "joint pmf needs 2 or 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) || dims.iter().product::<usize>() != probs.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} do not match {} entries",
                probs.len()
            )));
        }
        check_masses(&probs, "joint pmf")?;
        Ok(JointPmf { dims, probs })
    }

    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged joint matrix".into()));
        }
        JointPmf::new(vec![rows.len(), cols], rows.concat())
    }

    /// `P(x) W(y|x)` as a two-axis joint.
    pub fn from_input(p: &Pmf, ch: &Channel) -> Result<Self> {
        if p.alphabet_size() != ch.inputs() {
            return Err(Error::Shape(format!(
                "pmf of size {} into channel with {} inputs",
                p.alphabet_size(),
                ch.inputs()
            )));
        }
        let mut probs = Vec::with_capacity(ch.inputs() * ch.outputs());
        for (x, &px) in p.probs().iter().enumerate() {
            probs.extend(ch.row(x).iter().map(|w| px * w));
        }
        Ok(JointPmf {
            dims: vec![ch.inputs(), ch.outputs()],
            probs,
        })
    }

    /// `P(x) W(y,z|x)` over `(X, Y, Z)`.
    pub fn from_wiretap(p: &Pmf, w: &WiretapChannel) -> Result<Self> {
        if p.alphabet_size() != w.inputs() {
            return Err(Error::Shape(
                "input pmf does not match wiretap channel".into(),
            ));
        }
        let (ny, nz) = (w.y_size(), w.z_size());
        let mut probs = Vec::with_capacity(w.inputs() * ny * nz);
        for (x, &px) in p.probs().iter().enumerate() {
            probs.extend(w.coupling(x).iter().map(|c| px * c));
        }
        Ok(JointPmf {
            dims: vec![w.inputs(), ny, nz],
            probs,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn axes(&self) -> usize {
        self.dims.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.probs[self.flat(idx)]
    }

    /// Unflatten a cell index into per-axis symbols.
    pub fn unflatten(&self, mut cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            out[a] = cell % self.dims[a];
            cell /= self.dims[a];
        }
        out
    }

    /// Marginal masses on the listed axes, row-major in the listed order.
    pub fn marginal_masses(&self, keep: &[usize]) -> Vec<f64> {
        let kd: Vec<usize> = keep.iter().map(|&a| self.dims[a]).collect();
        let mut out = vec![0.0; kd.iter().product()];
        for (cell, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let idx = self.unflatten(cell);
            let k = keep
                .iter()
                .zip(&kd)
                .fold(0, |acc, (&a, &d)| acc * d + idx[a]);
            out[k] += p;
        }
        out
    }

    pub fn marginal(&self, axis: usize) -> Pmf {
        Pmf {
            probs: self.marginal_masses(&[axis]),
        }
    }

    /// Two-axis marginal joint over `(a, b)`.
    pub fn marginal_joint(&self, a: usize, b: usize) -> JointPmf {
        JointPmf {
            dims: vec![self.dims[a], self.dims[b]],
            probs: self.marginal_masses(&[a, b]),
        }
    }

    /// Row `x` of a two-axis joint as a conditional channel; rows with zero mass become uniform.
    pub fn conditional_channel(&self) -> Result<Channel> {
        if self.axes() != 2 {
            return Err(Error::Shape(
                "conditional channel needs a 2-axis joint".into(),
            ));
        }
        let (nr, nc) = (self.dims[0], self.dims[1]);
        let mut data = Vec::with_capacity(nr * nc);
        for r in 0..nr {
            let row = &self.probs[r * nc..(r + 1) * nc];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                data.extend(row.iter().map(|v| v / s));
            } else {
                data.extend(std::iter::repeat_n(1.0 / nc as f64, nc));
            }
        }
        Ok(Channel {
            n_in: nr,
            n_out: nc,
            data,
        })
    }
}

/// Row-stochastic transition matrix `W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    n_in: usize,
    n_out: usize,
    data: Vec<f64>,
}

impl Channel {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n_out = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || n_out == 0 || rows.iter().any(|r| r.len() != n_out) {
            return Err(Error::Shape(
                "channel rows must be nonempty and equally long".into(),
            ));
        }
        for (x, r) in rows.iter().enumerate() {
            check_masses(r, &format!("channel row {x}"))?;
        }
        Ok(Channel {
            n_in: rows.len(),
            n_out,
            data: rows.concat(),
        })
    }

    pub fn from_flat(n_in: usize, n_out: usize, data: Vec<f64>) -> Result<Self> {
        if n_in == 0 || n_out == 0 || data.len() != n_in * n_out {
            return Err(Error::Shape(format!(
                "{n_in}x{n_out} channel from {} entries",
                data.len()
            )));
        }
        for x in 0..n_in {
            check_masses(
                &data[x * n_out..(x + 1) * n_out],
                &format!("channel row {x}"),
            )?;
        }
        Ok(Channel { n_in, n_out, data })
    }

    pub(crate) fn from_flat_unchecked(n_in: usize, n_out: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_in * n_out);
        Channel { n_in, n_out, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Channel {
            n_in: n,
            n_out: n,
            data,
        }
    }

    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("crossover probability {p}")));
        }
        Ok(Channel {
            n_in: 2,
            n_out: 2,
            data: vec![1.0 - p, p, p, 1.0 - p],
        })
    }

    /// Binary erasure channel with outputs `[0, 1, erasure]`.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::OutOfRange(format!("erasure probability {eps}")));
        }
        Ok(Channel {
            n_in: 2,
            n_out: 3,
            data: vec![1.0 - eps, 0.0, eps, 0.0, 1.0 - eps, eps],
        })
    }

    /// Every input maps to the same output distribution.
    pub fn constant(n_in: usize, out: &Pmf) -> Self {
        let data = (0..n_in)
            .flat_map(|_| out.probs().iter().copied())
            .collect();
        Channel {
            n_in,
            n_out: out.alphabet_size(),
            data,
        }
    }

    pub fn inputs(&self) -> usize {
        self.n_in
    }

    pub fn outputs(&self) -> usize {
        self.n_out
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.n_out..(x + 1) * self.n_out]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.n_out + y]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_in).map(|x| self.row(x).to_vec()).collect()
    }

    /// Cascade `self` followed by `next`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.n_out != next.n_in {
            return Err(Error::Shape(format!(
                "cannot cascade {} outputs into {} inputs",
                self.n_out, next.n_in
            )));
        }
        let mut data = vec![0.0; self.n_in * next.n_out];
        for x in 0..self.n_in {
            for (y, &w) in self.row(x).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (z, &t) in next.row(y).iter().enumerate() {
                    data[x * next.n_out + z] += w * t;
                }
            }
        }
        Ok(Channel {
            n_in: self.n_in,
            n_out: next.n_out,
            data,
        })
    }

    pub fn output_masses(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.n_out];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, &w) in self.row(x).iter().enumerate() {
                q[y] += px * w;
            }
        }
        q
    }

    pub fn output(&self, p: &Pmf) -> Result<Pmf> {
        if p.alphabet_size() != self.n_in {
            return Err(Error::Shape("input pmf does not match channel".into()));
        }
        Ok(Pmf {
            probs: self.output_masses(p.probs()),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        sample_index(self.row(x), rng)
    }
}

/// `P_{YZ|X}` given through its margins and optionally a full coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiretapChannel {
    margin_y: Channel,
    margin_z: Channel,
    joint: Option<Vec<JointPmf>>,
}

impl WiretapChannel {
    pub fn new(margin_y: Channel, margin_z: Channel) -> Result<Self> {
        if margin_y.inputs() != margin_z.inputs() {
            return Err(Error::Shape("margins must share the input alphabet".into()));
        }
        Ok(WiretapChannel {
            margin_y,
            margin_z,
            joint: None,
        })
    }

    /// Attach a coupling; each entry is a `|Y| x |Z|` joint for one input.
    pub fn with_joint(margin_y: Channel, margin_z: Channel, joint: Vec<JointPmf>) -> Result<Self> {
        let w = WiretapChannel::new(margin_y, margin_z)?;
        if joint.len() != w.inputs() {
            return Err(Error::Shape(format!(
                "{} joint rows for {} inputs",
                joint.len(),
                w.inputs()
            )));
        }
        for (x, j) in joint.iter().enumerate() {
            if j.dims() != [w.y_size(), w.z_size()] {
                return Err(Error::Shape(format!(
                    "joint row {x} has dims {:?}",
                    j.dims()
                )));
            }
            let my = j.marginal_masses(&[0]);
            let mz = j.marginal_masses(&[1]);
            let off_y = my
                .iter()
                .zip(w.margin_y.row(x))
                .any(|(a, b)| (a - b).abs() > PMF_TOL);
            let off_z = mz
                .iter()
                .zip(w.margin_z.row(x))
                .any(|(a, b)| (a - b).abs() > PMF_TOL);
            if off_y || off_z {
                return Err(Error::InvalidPmf(format!(
                    "joint row {x} does not reproduce the margins"
                )));
            }
        }
        Ok(WiretapChannel {
            joint: Some(joint),
            ..w
        })
    }

    /// Build from couplings alone; margins are derived.
    pub fn from_joint(joint: Vec<JointPmf>) -> Result<Self> {
        let first = joint
            .first()
            .ok_or_else(|| Error::Shape("empty joint".into()))?;
        let (ny, nz) = (first.dims()[0], first.dims()[1]);
        let mut ydata = Vec::new();
        let mut zdata = Vec::new();
        for j in &joint {
            if j.dims() != [ny, nz] {
                return Err(Error::Shape("joint rows disagree in shape".into()));
            }
            ydata.extend(j.marginal_masses(&[0]));
            zdata.extend(j.marginal_masses(&[1]));
        }
        let n = joint.len();
        WiretapChannel::with_joint(
            Channel::from_flat(n, ny, ydata)?,
            Channel::from_flat(n, nz, zdata)?,
            joint,
        )
    }

    pub fn margin_y(&self) -> &Channel {
        &self.margin_y
    }

    pub fn margin_z(&self) -> &Channel {
        &self.margin_z
    }

    pub fn joint(&self) -> Option<&[JointPmf]> {
        self.joint.as_deref()
    }

    pub fn inputs(&self) -> usize {
        self.margin_y.inputs()
    }

    pub fn y_size(&self) -> usize {
        self.margin_y.outputs()
    }

    pub fn z_size(&self) -> usize {
        self.margin_z.outputs()
    }

    /// Coupling of `(Y, Z)` for input `x`; conditionally independent when no joint was given.
    pub fn coupling(&self, x: usize) -> Vec<f64> {
        match &self.joint {
            Some(j) => j[x].probs().to_vec(),
            None => {
                let (ry, rz) = (self.margin_y.row(x), self.margin_z.row(x));
                ry.iter()
                    .flat_map(|a| rz.iter().map(move |b| a * b))
                    .collect()
            }
        }
    }
}

/// Per-letter distortion `d(s, ŝ)`; `f64::INFINITY` marks forbidden pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape(
                "distortion rows must be nonempty and equally long".into(),
            ));
        }
        for (s, r) in rows.iter().enumerate() {
            if r.iter().any(|&v| v.is_nan() || v < 0.0) {
                return Err(Error::OutOfRange(format!(
                    "distortion row {s} has a negative or NaN entry"
                )));
            }
            if !r.iter().any(|v| v.is_finite()) {
                return Err(Error::OutOfRange(format!(
                    "distortion row {s} is all infinite"
                )));
            }
        }
        Ok(DistortionMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn hamming(n: usize) -> Self {
        let mut data = vec![1.0; n * n];
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        DistortionMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Erasure distortion: 0 when equal, 1 on the erasure symbol (last column), infinite otherwise.
    pub fn erasure(n: usize) -> Self {
        let cols = n + 1;
        let mut data = vec![f64::INFINITY; n * cols];
        for s in 0..n {
            data[s * cols + s] = 0.0;
            data[s * cols + n] = 1.0;
        }
        DistortionMatrix {
            rows: n,
            cols,
            data,
        }
    }

    pub fn sources(&self) -> usize {
        self.rows
    }

    pub fn reconstructions(&self) -> usize {
        self.cols
    }

    pub fn get(&self, s: usize, r: usize) -> f64 {
        self.data[s * self.cols + r]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.cols..(s + 1) * self.cols]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|s| self.row(s).to_vec()).collect()
    }

    /// `Σ_s p(s) min_ŝ d(s, ŝ)`.
    pub fn d_min(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(s, &ps)| {
                weighted(
                    ps,
                    self.row(s).iter().copied().fold(f64::INFINITY, f64::min),
                )
            })
            .sum()
    }

    /// `min_ŝ Σ_s p(s) d(s, ŝ)` and its minimizing column (lowest index on ties).
    pub fn d_max(&self, p: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for r in 0..self.cols {
            let v: f64 = p
                .iter()
                .enumerate()
                .map(|(s, &ps)| weighted(ps, self.get(s, r)))
                .sum();
            if v < best.0 {
                best = (v, r);
            }
        }
        best
    }

    /// Mean per-letter distortion between two blocks.
    pub fn block(&self, s: &[usize], r: &[usize]) -> f64 {
        debug_assert_eq!(s.len(), r.len());
        let total: f64 = s.iter().zip(r).map(|(&a, &b)| self.get(a, b)).sum();
        total / s.len() as f64
    }
}

/// `p * d` with `0 * inf = 0`.
pub fn weighted(p: f64, d: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_rejects_bad_mass() {
        assert!(Pmf::new(vec![0.5, 0.48]).is_err());
        assert!(Pmf::new(vec![1.1, -0.1]).is_err());
        assert!(Pmf::new(vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn cascade_of_bscs() {
        let c = Channel::bsc(0.1)
            .unwrap()
            .compose(&Channel::bsc(0.2).unwrap())
            .unwrap();
        assert!((c.get(0, 1) - 0.26).abs() < 1e-15);
    }

    #[test]
    fn wiretap_joint_must_match_margins() {
        let y = Channel::bsc(0.1).unwrap();
        let z = Channel::bsc(0.2).unwrap();
        let bad = vec![JointPmf::from_matrix(&[vec![0.9, 0.0], vec![0.0, 0.1]]).unwrap(); 2];
        assert!(WiretapChannel::with_joint(y.clone(), z.clone(), bad).is_err());
        let w = WiretapChannel::new(y, z).unwrap();
        let rebuilt: Vec<JointPmf> = (0..2)
            .map(|x| JointPmf::new(vec![2, 2], w.coupling(x)).unwrap())
            .collect();
        let w2 = WiretapChannel::from_joint(rebuilt).unwrap();
        for (a, b) in w2.margin_y().data().iter().zip(w.margin_y().data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn distortion_limits() {
        let d = DistortionMatrix::erasure(2);
        assert_eq!(d.d_min(&[0.5, 0.5]), 0.0);
        assert_eq!(d.d_max(&[0.5, 0.5]), (1.0, 2));
        assert!(DistortionMatrix::new(&[vec![f64::INFINITY]]).is_err());
    }
}

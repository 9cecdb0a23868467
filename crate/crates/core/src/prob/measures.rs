use super::{Channel, JointPmf, Pmf};
use crate::error::{Error, Result};

/// `-Σ p log2 p` over a raw mass vector.
pub fn entropy_of(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum();
    h.max(0.0)
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("binary entropy argument {p}")));
    }
    Ok(entropy_of(&[p, 1.0 - p]))
}

fn require_axes(j: &JointPmf, n: usize) -> Result<()> {
    if j.axes() != n {
        return Err(Error::Shape(format!(
            "expected a {n}-axis joint, got {}",
            j.axes()
        )));
    }
    Ok(())
}

/// `I(X;Y)` of a two-axis joint.
pub fn mutual_information(j: &JointPmf) -> Result<f64> {
    require_axes(j, 2)?;
    let hx = entropy_of(&j.marginal_masses(&[0]));
    let hy = entropy_of(&j.marginal_masses(&[1]));
    Ok((hx + hy - entropy_of(j.probs())).max(0.0))
}

/// `H(A|B)` of a two-axis joint over `(A, B)`.
pub fn conditional_entropy(j: &JointPmf) -> Result<f64> {
    require_axes(j, 2)?;
    Ok((entropy_of(j.probs()) - entropy_of(&j.marginal_masses(&[1]))).max(0.0))
}

/// `I(X;Y|Z)` of a three-axis joint over `(X, Y, Z)`.
pub fn conditional_mutual_information(j: &JointPmf) -> Result<f64> {
    require_axes(j, 3)?;
    let hxz = entropy_of(&j.marginal_masses(&[0, 2]));
    let hyz = entropy_of(&j.marginal_masses(&[1, 2]));
    let hz = entropy_of(&j.marginal_masses(&[2]));
    Ok((hxz + hyz - entropy_of(j.probs()) - hz).max(0.0))
}

/// `I(X;Y)` for input masses `p` through `ch`, without building a joint.
pub fn mutual_information_io(p: &[f64], ch: &Channel) -> f64 {
    let q = ch.output_masses(p);
    let mut total = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &w) in ch.row(x).iter().enumerate() {
            if w > 0.0 {
                total += px * w * (w / q[y]).log2();
            }
        }
    }
    total.max(0.0)
}

/// `D(p || q)` in bits; infinite when `p` is not dominated by `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).log2();
        }
    }
    total.max(0.0)
}

/// Anything carrying a shaped mass vector.
pub trait Masses {
    fn shape(&self) -> Vec<usize>;
    fn masses(&self) -> &[f64];
}

impl Masses for Pmf {
    fn shape(&self) -> Vec<usize> {
        vec![self.alphabet_size()]
    }
    fn masses(&self) -> &[f64] {
        self.probs()
    }
}

impl Masses for JointPmf {
    fn shape(&self) -> Vec<usize> {
        self.dims().to_vec()
    }
    fn masses(&self) -> &[f64] {
        self.probs()
    }
}

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance<T: Masses>(p: &T, q: &T) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", p.shape(), q.shape())));
    }
    let s: f64 = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * s).min(1.0))
}

use crate::error::{Error, Result};
use crate::prob::{DistortionMatrix, Pmf};
use crate::rd::{rate_distortion, rd_at_slope, SolverOptions};
use serde::{Deserialize, Serialize};

/// `d`-tilted information of every source letter at one distortion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedProfile {
    pub target: f64,
    /// `-R'(D)` in bits per unit distortion.
    pub lambda: f64,
    /// Optimal reproduction marginal.
    pub output: Vec<f64>,
    /// `ȷ(s, D)` in bits, per source letter.
    pub values: Vec<f64>,
    pub rate: f64,
}

impl TiltedProfile {
    pub fn mean(&self, p: &Pmf) -> f64 {
        p.probs()
            .iter()
            .zip(&self.values)
            .filter(|(&w, _)| w > 0.0)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// `E_S[2^{λD - λd(S,š) + ȷ(S,D)}]` for reproduction `š`; at most one.
    pub fn csiszar_sum(&self, p: &Pmf, d: &DistortionMatrix, reproduction: usize) -> f64 {
        p.probs()
            .iter()
            .enumerate()
            .filter(|(s, &w)| w > 0.0 && d.get(*s, reproduction).is_finite())
            .map(|(s, &w)| {
                w * (self.lambda * (self.target - d.get(s, reproduction)) + self.values[s]).exp2()
            })
            .sum()
    }
}

/// Tilted information of a discrete source from the optimal Blahut-Arimoto test channel.
pub fn tilted_profile(
    source: &Pmf,
    d: &DistortionMatrix,
    target: f64,
    opts: &SolverOptions,
) -> Result<TiltedProfile> {
    let p = source.probs();
    if d.sources() != p.len() {
        return Err(Error::Shape(format!(
            "distortion has {} rows, source has {}",
            d.sources(),
            p.len()
        )));
    }
    let dmin = d.d_min(p);
    if !(target > dmin) {
        return Err(Error::OutOfRange(format!(
            "tilted information needs D > D_min = {dmin}, got {target}"
        )));
    }
    let rd = rate_distortion(source, d, target, opts)?;
    let lambda = rd.slope.max(0.0);
    // Re-solve at the reported slope so that the marginal and the slope form one fixed point.
    let point = rd_at_slope(
        p,
        d,
        lambda,
        Some(rd.achieving_channel.output_masses(p).as_slice()),
        1e-14,
        200_000,
    );
    let level = if lambda > 0.0 {
        point.distortion
    } else {
        target
    };
    let values = (0..p.len())
        .map(|s| {
            let e: f64 = point
                .output
                .iter()
                .enumerate()
                .filter(|(r, &q)| q > 0.0 && d.get(s, *r).is_finite())
                .map(|(r, &q)| q * (lambda * (level - d.get(s, r))).exp2())
                .sum();
            -e.log2() + lambda * (level - target)
        })
        .collect();
    Ok(TiltedProfile {
        target,
        lambda,
        output: point.output,
        values,
        rate: rd.rate,
    })
}

/// `ȷ_S(s, D)` for one letter of a discrete source.
pub fn d_tilted(
    source: &Pmf,
    d: &DistortionMatrix,
    target: f64,
    s: usize,
    opts: &SolverOptions,
) -> Result<f64> {
    if s >= source.alphabet_size() {
        return Err(Error::OutOfRange(format!(
            "letter {s} outside the source alphabet"
        )));
    }
    Ok(tilted_profile(source, d, target, opts)?.values[s])
}

/// Closed form for a zero-mean Gaussian source of variance `ns` under squared error.
pub fn gaussian_d_tilted(ns: f64, target: f64, s: f64) -> Result<f64> {
    if !(ns > 0.0) || !(target > 0.0) || target >= ns {
        return Err(Error::OutOfRange(format!(
            "need 0 < D < N_S (D={target}, N_S={ns})"
        )));
    }
    let log2e = std::f64::consts::LOG2_E;
    Ok(0.5 * (ns / target).log2() + log2e * (s * s / ns - 1.0) / 2.0)
}

/// The defining expectation over `Š* ~ N(0, N_S - D)` by composite Simpson quadrature.
pub fn gaussian_d_tilted_quadrature(ns: f64, target: f64, s: f64) -> Result<f64> {
    if !(ns > 0.0) || !(target > 0.0) || target >= ns {
        return Err(Error::OutOfRange(format!(
            "need 0 < D < N_S (D={target}, N_S={ns})"
        )));
    }
    let var = ns - target;
    let sd = var.sqrt();
    // Slope in nats per unit squared error.
    let lambda = 1.0 / (2.0 * target);
    let integrand = |x: f64| {
        let density = (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        density * (lambda * (target - (s - x).powi(2))).exp()
    };
    let (a, b) = (-12.0 * sd, 12.0 * sd);
    let steps = 20_000;
    let h = (b - a) / steps as f64;
    let mut acc = integrand(a) + integrand(b);
    for i in 1..steps {
        acc += integrand(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(-(acc * h / 3.0).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    #[test]
    fn gaussian_reference_value() {
        let v = gaussian_d_tilted(1.0, 0.25, 0.0).unwrap();
        assert!((v - (1.0 - std::f64::consts::LOG2_E / 2.0)).abs() < 1e-12);
        assert!((v - 0.27865).abs() < 1e-5);
        for s in [-2.0, -0.3, 0.0, 0.7, 1.5] {
            let q = gaussian_d_tilted_quadrature(1.0, 0.25, s).unwrap();
            assert!(
                (q - gaussian_d_tilted(1.0, 0.25, s).unwrap()).abs() < 1e-4,
                "s={s}"
            );
        }
    }

    #[test]
    fn gaussian_mean_is_rate() {
        // E[S^2] = N_S removes the second term.
        let ns: f64 = 2.0;
        let nodes = 4001;
        let (a, b) = (-12.0 * ns.sqrt(), 12.0 * ns.sqrt());
        let h = (b - a) / (nodes - 1) as f64;
        let mut mean = 0.0;
        for i in 0..nodes {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            let dens = (-x * x / (2.0 * ns)).exp() / (2.0 * std::f64::consts::PI * ns).sqrt();
            mean += w * h * dens * gaussian_d_tilted(ns, 0.5, x).unwrap();
        }
        assert!((mean - 0.5 * (ns / 0.5f64).log2()).abs() < 1e-4);
    }

    #[test]
    fn symmetric_binary_is_constant() {
        let t = tilted_profile(
            &Pmf::uniform(2),
            &DistortionMatrix::hamming(2),
            0.2,
            &SolverOptions::default(),
        )
        .unwrap();
        let want = 1.0 - binary_entropy(0.2).unwrap();
        assert!(
            t.values.iter().all(|v| (v - want).abs() < 1e-8),
            "{:?}",
            t.values
        );
    }

    #[test]
    fn mean_equals_rate_on_skewed_ternary() {
        let p = Pmf::new(vec![0.5, 0.3, 0.2]).unwrap();
        let d = DistortionMatrix::hamming(3);
        let t = tilted_profile(&p, &d, 0.15, &SolverOptions::default()).unwrap();
        assert!((t.mean(&p) - t.rate).abs() < 1e-6);
        for r in 0..3 {
            assert!(t.csiszar_sum(&p, &d, r) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn rejects_minimum_distortion() {
        let e = d_tilted(
            &Pmf::uniform(2),
            &DistortionMatrix::hamming(2),
            0.0,
            0,
            &SolverOptions::default(),
        );
        assert!(e.is_err());
        assert!(gaussian_d_tilted(1.0, 1.0, 0.0).is_err());
    }
}

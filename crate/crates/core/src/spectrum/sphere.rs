use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereCover {
    /// Upper bound on the number of unit balls covering a radius-`R` ball in `l` dimensions;
    /// `+inf` once it leaves the `f64` range.
    pub bound: f64,
    /// `(1/l) log2(bound)`, computed in the log domain.
    pub exponent: f64,
}

/// Rogers-type covering count bound, valid for `l ≥ 9` and `1 < R < l/(2 ln l)`.
pub fn sphere_cover_bound(radius: f64, l: usize) -> Result<SphereCover> {
    let lf = l as f64;
    if l < 9 {
        return Err(Error::OutOfRange(format!(
            "dimension must be at least 9, got {l}"
        )));
    }
    let upper = lf / (2.0 * lf.ln());
    if !(radius > 1.0 && radius < upper) {
        return Err(Error::OutOfRange(format!(
            "radius must lie in (1, {upper}), got {radius}"
        )));
    }
    let ln_l = lf.ln();
    let tail = lf * ln_l + lf * ln_l.ln() + lf * radius.ln() + 12.0 * (144.0 * lf).ln();
    let ln_bound = (4.0 * std::f64::consts::E).ln() + lf * radius.ln() + 1.5 * ln_l
        - (ln_l - 2.0).ln()
        + tail.ln();
    let log2_bound = ln_bound / std::f64::consts::LN_2;
    Ok(SphereCover {
        bound: log2_bound.exp2(),
        exponent: log2_bound / lf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity_range() {
        assert!(sphere_cover_bound(2.0, 8).is_err());
        assert!(sphere_cover_bound(1.0, 16).is_err());
        assert!(sphere_cover_bound(2.9, 16).is_err());
        assert!(sphere_cover_bound(2.8, 16).unwrap().bound > 1.0);
    }

    #[test]
    fn increasing_in_radius() {
        let a = sphere_cover_bound(1.5, 64).unwrap().bound;
        let b = sphere_cover_bound(3.0, 64).unwrap().bound;
        assert!(b > a);
    }

    #[test]
    fn exponent_decreases_toward_log_radius() {
        let e: Vec<f64> = [32, 64, 128, 256, 512, 1024]
            .iter()
            .map(|&l| sphere_cover_bound(2.0, l).unwrap().exponent)
            .collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!(e.iter().all(|&v| v > 1.0));
        assert!(sphere_cover_bound(2.0, 1 << 14)
            .unwrap()
            .bound
            .is_infinite());
    }
}

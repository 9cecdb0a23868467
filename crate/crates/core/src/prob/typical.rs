use super::{entropy_of, JointPmf, Masses};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalityMode {
    Strong,
    Weak,
}

fn strong(seq: &[usize], p: &[f64], delta: f64) -> bool {
    let mut counts = vec![0usize; p.len()];
    for &a in seq {
        counts[a] += 1;
    }
    let n = seq.len() as f64;
    counts.iter().zip(p).all(|(&c, &pa)| {
        let t = c as f64 / n;
        if pa == 0.0 {
            c == 0
        } else {
            (t - pa).abs() < delta * pa
        }
    })
}

fn weak(seq: impl Iterator<Item = usize>, p: &[f64], n: usize, delta: f64) -> bool {
    let mut ll = 0.0;
    for a in seq {
        if p[a] == 0.0 {
            return false;
        }
        ll -= p[a].log2();
    }
    (ll / n as f64 - entropy_of(p)).abs() <= delta
}

/// Typicality test for a sequence of symbols of `model`.
///
/// For a joint model the sequence holds flattened cell indices. Weak joint
/// typicality checks the entropy bracket for the joint and for every single-axis marginal.
pub fn typical_set_membership<M: Masses + ?Sized>(
    seq: &[usize],
    model: &M,
    delta: f64,
    mode: TypicalityMode,
) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::OutOfRange(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let p = model.masses();
    if let Some(&bad) = seq.iter().find(|&&a| a >= p.len()) {
        return Err(Error::OutOfRange(format!(
            "symbol {bad} outside alphabet of size {}",
            p.len()
        )));
    }
    if seq.is_empty() {
        return Ok(false);
    }
    Ok(match mode {
        TypicalityMode::Strong => strong(seq, p, delta),
        TypicalityMode::Weak => {
            let shape = model.shape();
            if !weak(seq.iter().copied(), p, seq.len(), delta) {
                return Ok(false);
            }
            if shape.len() > 1 {
                let j = JointPmf::new(shape.clone(), p.to_vec())?;
                for axis in 0..shape.len() {
                    let m = j.marginal_masses(&[axis]);
                    if !weak(
                        seq.iter().map(|&c| j.unflatten(c)[axis]),
                        &m,
                        seq.len(),
                        delta,
                    ) {
                        return Ok(false);
                    }
                }
            }
            true
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Pmf;
    use crate::util::trial_rng;

    #[test]
    fn exact_type_is_typical() {
        let p = Pmf::new(vec![0.25, 0.75]).unwrap();
        let seq = [0, 1, 1, 1, 1, 0, 1, 1];
        for delta in [1e-6, 0.1, 1.0] {
            assert!(typical_set_membership(&seq, &p, delta, TypicalityMode::Strong).unwrap());
        }
    }

    #[test]
    fn constant_sequence_is_atypical() {
        let p = Pmf::uniform(2);
        assert!(!typical_set_membership(&[0; 50], &p, 0.1, TypicalityMode::Strong).unwrap());
        assert!(typical_set_membership(&[2], &p, 0.1, TypicalityMode::Strong).is_err());
    }

    #[test]
    fn long_fair_sequences_are_typical() {
        let p = Pmf::uniform(2);
        let mut hits = 0;
        for seed in 0..1000u64 {
            let mut rng = trial_rng(seed, 0);
            let seq: Vec<usize> = (0..10_000).map(|_| p.sample(&mut rng)).collect();
            if typical_set_membership(&seq, &p, 0.05, TypicalityMode::Strong).unwrap() {
                hits += 1;
            }
        }
        assert!(hits as f64 / 1000.0 >= 0.99, "{hits}");
    }

    #[test]
    fn weak_bracket_on_joint() {
        let j = JointPmf::new(vec![2, 2], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        // cells: 0=(0,0), 1=(0,1), 2=(1,0), 3=(1,1); one flip in ten matches H exactly in the limit.
        let seq = [0, 3, 0, 3, 0, 3, 0, 3, 0, 1, 3, 0, 3, 0, 3, 0, 3, 0, 3, 2];
        assert!(typical_set_membership(&seq, &j, 0.05, TypicalityMode::Weak).unwrap());
        assert!(!typical_set_membership(&[1, 2, 1, 2], &j, 0.05, TypicalityMode::Weak).unwrap());
    }
}

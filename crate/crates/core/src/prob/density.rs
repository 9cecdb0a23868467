use super::{sample_index, JointPmf};
use crate::error::{Error, Result};
use crate::util::trial_rng;
use rayon::prelude::*;

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let i = cdf.partition_point(|&c| c <= u);
    i.min(cdf.len() - 1)
}

fn sample_mean_per_trial<F>(
    j: &JointPmf,
    n: usize,
    trials: usize,
    seed: u64,
    density: F,
) -> Result<Vec<f64>>
where
    F: Fn(usize) -> f64 + Sync,
{
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be at least 1".into()));
    }
    let cdf = cumulative(j.probs());
    // Zero-mass cells can be hit by the last-bin clamp only if rounding leaves a gap; skip them.
    let support: Vec<bool> = j.probs().iter().map(|&p| p > 0.0).collect();
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut total = 0.0;
            for _ in 0..n {
                let mut cell = draw(&cdf, rand::Rng::random::<f64>(&mut rng));
                if !support[cell] {
                    cell = sample_index(j.probs(), &mut rng);
                }
                total += density(cell);
            }
            total / n as f64
        })
        .collect())
}

/// Samples of the normalized information density of the product extension of `j`.
///
/// Two axes `(U, V)` give `(1/n) log P(V|U)/P(V)`; three axes `(A, B, C)` give the
/// conditional density `(1/n) log P(A,B|C)/(P(A|C) P(B|C))`.
pub fn information_density_samples(
    j: &JointPmf,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let table: Vec<f64> = match j.axes() {
        2 => {
            let pu = j.marginal_masses(&[0]);
            let pv = j.marginal_masses(&[1]);
            (0..j.probs().len())
                .map(|c| {
                    let idx = j.unflatten(c);
                    let p = j.probs()[c];
                    if p > 0.0 {
                        (p / (pu[idx[0]] * pv[idx[1]])).log2()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        3 => {
            let d = j.dims().to_vec();
            let pac = j.marginal_masses(&[0, 2]);
            let pbc = j.marginal_masses(&[1, 2]);
            let pc = j.marginal_masses(&[2]);
            (0..j.probs().len())
                .map(|c| {
                    let idx = j.unflatten(c);
                    let p = j.probs()[c];
                    if p > 0.0 {
                        let a = pac[idx[0] * d[2] + idx[2]];
                        let b = pbc[idx[1] * d[2] + idx[2]];
                        (p * pc[idx[2]] / (a * b)).log2()
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        k => return Err(Error::Shape(format!("density of a {k}-axis joint"))),
    };
    sample_mean_per_trial(j, n, trials, seed, |c| table[c])
}

/// Samples of `(1/n) log 1/P(A^n|B^n)` for a two-axis joint over `(A, B)`.
pub fn entropy_density_samples(
    j: &JointPmf,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if j.axes() != 2 {
        return Err(Error::Shape(
            "conditional entropy density needs a 2-axis joint".into(),
        ));
    }
    let pb = j.marginal_masses(&[1]);
    let table: Vec<f64> = (0..j.probs().len())
        .map(|c| {
            let p = j.probs()[c];
            if p > 0.0 {
                -(p / pb[j.unflatten(c)[1]]).log2()
            } else {
                0.0
            }
        })
        .collect();
    sample_mean_per_trial(j, n, trials, seed, |c| table[c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{mutual_information, Channel, Pmf};

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var.sqrt())
    }

    #[test]
    fn degenerate_densities() {
        let indep = JointPmf::new(vec![2, 2], vec![0.06, 0.24, 0.14, 0.56]).unwrap();
        let s = information_density_samples(&indep, 5, 100, 3).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-12));
        let id = JointPmf::from_input(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
        let s = information_density_samples(&id, 1, 100, 3).unwrap();
        assert!(s.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn density_mean_tracks_mutual_information() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
        let i = mutual_information(&j).unwrap();
        for n in [1, 100, 1000] {
            let s = information_density_samples(&j, n, 10_000, 11).unwrap();
            let (m, sd) = mean_sd(&s);
            let se = sd / (s.len() as f64).sqrt();
            assert!(
                (m - i).abs() <= 3.0 * se + 1e-12,
                "n={n} mean {m} vs {i} (se {se})"
            );
            if n == 1000 {
                assert!((m - 0.531).abs() < 0.02);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let j = JointPmf::from_input(&Pmf::uniform(2), &Channel::bsc(0.3).unwrap()).unwrap();
        let a = information_density_samples(&j, 20, 50, 9).unwrap();
        let b = information_density_samples(&j, 20, 50, 9).unwrap();
        assert_eq!(a, b);
    }
}

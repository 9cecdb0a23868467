use super::{Channel, WiretapChannel};
use minilp::{ComparisonOp, OptimizationDirection, Problem};

/// Outcome of the degradedness feasibility program.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradedVerdict {
    pub degraded: bool,
    /// `T(z|y)` with `margin_z = margin_y · T`, present when degraded.
    pub witness: Option<Channel>,
    /// Minimal L1 violation of `margin_z = margin_y · T` over stochastic `T`.
    pub residual: f64,
}

const LP_TOL: f64 = 1e-8;

/// Decide whether `Z` is a stochastically degraded version of `Y`.
pub fn is_degraded(w: &WiretapChannel) -> DegradedVerdict {
    let (wy, wz) = (w.margin_y(), w.margin_z());
    let (nx, ny, nz) = (w.inputs(), w.y_size(), w.z_size());
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t: Vec<Vec<_>> = (0..ny)
        .map(|_| (0..nz).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect())
        .collect();
    for row in &t {
        let terms: Vec<_> = row.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&terms, ComparisonOp::Eq, 1.0);
    }
    for x in 0..nx {
        for z in 0..nz {
            let up = lp.add_var(1.0, (0.0, f64::INFINITY));
            let down = lp.add_var(1.0, (0.0, f64::INFINITY));
            let mut terms: Vec<_> = (0..ny)
                .filter(|&y| wy.get(x, y) != 0.0)
                .map(|y| (t[y][z], wy.get(x, y)))
                .collect();
            terms.push((up, -1.0));
            terms.push((down, 1.0));
            lp.add_constraint(&terms, ComparisonOp::Eq, wz.get(x, z));
        }
    }
    let sol = match lp.solve() {
        Ok(s) => s,
        Err(_) => {
            return DegradedVerdict {
                degraded: false,
                witness: None,
                residual: f64::INFINITY,
            }
        }
    };
    let residual = sol.objective().max(0.0);
    if residual > LP_TOL {
        return DegradedVerdict {
            degraded: false,
            witness: None,
            residual,
        };
    }
    let mut data = Vec::with_capacity(ny * nz);
    for row in &t {
        let vals: Vec<f64> = row.iter().map(|&v| sol[v].max(0.0)).collect();
        let s: f64 = vals.iter().sum();
        data.extend(vals.into_iter().map(|v| v / s));
    }
    DegradedVerdict {
        degraded: true,
        witness: Some(Channel::from_flat_unchecked(ny, nz, data)),
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::trial_rng;
    use rand::Rng;

    fn wt(y: Channel, z: Channel) -> WiretapChannel {
        WiretapChannel::new(y, z).unwrap()
    }

    #[test]
    fn bsc_cascade_is_degraded() {
        let y = Channel::bsc(0.1).unwrap();
        let z = y.compose(&Channel::bsc(0.15).unwrap()).unwrap();
        let v = is_degraded(&wt(y.clone(), z.clone()));
        assert!(v.degraded);
        let back = y.compose(v.witness.as_ref().unwrap()).unwrap();
        for (a, b) in back.data().iter().zip(z.data()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn example_pair_is_not_degraded() {
        let v = is_degraded(&wt(Channel::bec(0.3).unwrap(), Channel::bsc(0.1).unwrap()));
        assert!(!v.degraded);
        assert!(v.residual > 1e-3);
    }

    #[test]
    fn boundary_pair_is_degraded() {
        // BEC(2p) maps onto BSC(p) by replacing erasures with a fair coin.
        let v = is_degraded(&wt(Channel::bec(0.2).unwrap(), Channel::bsc(0.1).unwrap()));
        assert!(v.degraded);
    }

    #[test]
    fn random_cascades_round_trip() {
        let mut rng = trial_rng(5, 0);
        for _ in 0..50 {
            let mut rand_ch = |n: usize, m: usize| {
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
                        let s: f64 = v.iter().sum();
                        v.iter().map(|x| x / s).collect()
                    })
                    .collect();
                Channel::new(&rows).unwrap()
            };
            let y = rand_ch(3, 3);
            let t = rand_ch(3, 2);
            let z = y.compose(&t).unwrap();
            assert!(is_degraded(&wt(y, z)).degraded);
        }
    }
}

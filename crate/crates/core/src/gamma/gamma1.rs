use super::inputs::{
    binary_feasible_interval, binary_scan_max, simplex_candidates, simplex_pattern_search,
};
use super::{margins_equal, GammaOptions, GammaResult, GammaWitness, FEAS_SLACK};
use crate::error::{Error, Result};
use crate::prob::{mutual_information_io, Channel, Pmf, WiretapChannel};
use crate::rd::{channel_capacity, CapacityResult, SolverOptions};
use crate::util::{softmax, trial_rng};
use rand::Rng;
use rayon::prelude::*;

fn capacity_of(w: &WiretapChannel) -> Result<CapacityResult> {
    channel_capacity(
        w.margin_y(),
        &SolverOptions {
            tolerance: 1e-12,
            ..SolverOptions::default()
        },
    )
}

fn check_rate(w: &WiretapChannel, rate: f64) -> Result<CapacityResult> {
    if !(rate >= 0.0) {
        return Err(Error::OutOfRange(format!("rate {rate}")));
    }
    let cap = capacity_of(w)?;
    if rate > cap.capacity + cap.gap_bound + 1e-9 {
        return Err(Error::Infeasible(format!(
            "rate {rate} exceeds the main channel capacity {}",
            cap.capacity
        )));
    }
    Ok(cap)
}

fn trivial_aux(px: Pmf) -> GammaWitness {
    let n = px.alphabet_size();
    GammaWitness::Auxiliary {
        pv_x: Channel::identity(n),
        pu_v: Channel::constant(n, &Pmf::uniform(1)),
        px,
    }
}

fn secrecy_gap(w: &WiretapChannel, p: &[f64]) -> f64 {
    mutual_information_io(p, w.margin_y()) - mutual_information_io(p, w.margin_z())
}

/// `max {I(X;Y) - I(X;Z) : I(X;Y) ≥ R}` over input distributions.
///
/// Equals `Γ1(R)` when the main channel is less noisy than the wiretapper's.
pub fn gamma1_less_noisy(
    w: &WiretapChannel,
    rate: f64,
    opts: &GammaOptions,
) -> Result<GammaResult> {
    opts.validate()?;
    let cap = check_rate(w, rate)?;
    let (px, value, certified) = shortcut(w, rate, &cap, opts);
    Ok(GammaResult {
        value: value.max(0.0),
        witness: trivial_aux(px),
        certified,
    })
}

fn shortcut(
    w: &WiretapChannel,
    rate: f64,
    cap: &CapacityResult,
    opts: &GammaOptions,
) -> (Pmf, f64, bool) {
    let nx = w.inputs();
    let q_cap = cap.achieving_input.probs().to_vec();
    if nx == 1 {
        return (Pmf::uniform(1), 0.0, true);
    }
    if nx == 2 {
        let Some((a, b)) = binary_feasible_interval(w.margin_y(), rate, q_cap[1]) else {
            return (cap.achieving_input.clone(), secrecy_gap(w, &q_cap), false);
        };
        let (q, v) = binary_scan_max(|q| secrecy_gap(w, &[1.0 - q, q]), a, b, opts.grid_points);
        let at_cap = secrecy_gap(w, &q_cap);
        let (q, v) = if at_cap > v {
            (q_cap[1], at_cap)
        } else {
            (q, v)
        };
        let px = Pmf::new(vec![1.0 - q, q]).expect("binary input");
        return (px, v, opts.grid_points >= 10_000);
    }
    let feasible = |p: &[f64]| mutual_information_io(p, w.margin_y()) >= rate - FEAS_SLACK;
    let mut best = (q_cap.clone(), secrecy_gap(w, &q_cap));
    for p in simplex_candidates(nx, opts.grid_points) {
        if feasible(&p) {
            let v = secrecy_gap(w, &p);
            if v > best.1 {
                best = (p, v);
            }
        }
    }
    let (p, v) = simplex_pattern_search(best.0, |p| secrecy_gap(w, p), feasible, 1e-7);
    let tail: f64 = p[1..].iter().sum();
    let mut p = p;
    p[0] = (1.0 - tail).max(0.0);
    (Pmf::new(p).unwrap_or(cap.achieving_input.clone()), v, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LessNoisyVerdict {
    pub less_noisy: bool,
    /// False when the verdict comes from random sampling of auxiliaries.
    pub exact: bool,
}

/// Is `Y` less noisy than `Z`?
///
/// Binary inputs: concavity of `I(X;Y) - I(X;Z)` in `P_X` on a fine grid.
/// Larger inputs: `I(V;Y) ≥ I(V;Z)` over sampled binary auxiliaries (heuristic).
pub fn is_less_noisy(w: &WiretapChannel, seed: u64) -> LessNoisyVerdict {
    if margins_equal(w.margin_y(), w.margin_z()) {
        return LessNoisyVerdict {
            less_noisy: true,
            exact: true,
        };
    }
    let nx = w.inputs();
    if nx == 2 {
        const N: usize = 4000;
        let g: Vec<f64> = (0..=N)
            .map(|k| {
                let q = k as f64 / N as f64;
                secrecy_gap(w, &[1.0 - q, q])
            })
            .collect();
        let concave = (1..N).all(|k| g[k - 1] - 2.0 * g[k] + g[k + 1] <= 1e-12);
        return LessNoisyVerdict {
            less_noisy: concave,
            exact: true,
        };
    }
    let mut rng = trial_rng(seed, 0x1e55);
    for _ in 0..2000 {
        let pv: f64 = rng.random();
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                let v: Vec<f64> = (0..nx).map(|_| rng.random::<f64>().powi(3)).collect();
                let s: f64 = v.iter().sum();
                v.iter().map(|a| a / s).collect()
            })
            .collect();
        let px_v = Channel::new(&rows).expect("normalized rows");
        let vy = px_v.compose(w.margin_y()).expect("shapes");
        let vz = px_v.compose(w.margin_z()).expect("shapes");
        let p = [1.0 - pv, pv];
        if mutual_information_io(&p, &vy) < mutual_information_io(&p, &vz) - 1e-12 {
            return LessNoisyVerdict {
                less_noisy: false,
                exact: true,
            };
        }
    }
    LessNoisyVerdict {
        less_noisy: true,
        exact: false,
    }
}

/// Quantities of one auxiliary configuration.
struct Eval {
    secrecy: f64,
    ivy: f64,
    delta_u: f64,
}

struct Ascent<'a> {
    w: &'a WiretapChannel,
    nx: usize,
    nv: usize,
    nu: usize,
    ny: usize,
    nz: usize,
}

fn h(v: &[f64]) -> f64 {
    v.iter().filter(|&&a| a > 0.0).map(|&a| -a * a.log2()).sum()
}

fn lg(v: f64) -> f64 {
    if v > 0.0 {
        v.log2()
    } else {
        0.0
    }
}

/// Backpropagate a gradient on a probability vector through its softmax logits.
fn softmax_back(p: &[f64], g: &[f64], out: &mut [f64]) {
    let mean: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
    for i in 0..p.len() {
        out[i] = p[i] * (g[i] - mean);
    }
}

impl<'a> Ascent<'a> {
    fn probs(&self, th: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (nx, nv, nu) = (self.nx, self.nv, self.nu);
        let px = softmax(&th[..nx]);
        let pv: Vec<Vec<f64>> = (0..nx)
            .map(|x| softmax(&th[nx + x * nv..nx + (x + 1) * nv]))
            .collect();
        let off = nx + nx * nv;
        let pu: Vec<Vec<f64>> = (0..nv)
            .map(|v| softmax(&th[off + v * nu..off + (v + 1) * nu]))
            .collect();
        (px, pv, pu)
    }

    fn dims(&self) -> usize {
        self.nx + self.nx * self.nv + self.nv * self.nu
    }

    /// Objective `F - ρ·penalties` and, when `grad` is given, its gradient in logit space.
    fn run(&self, th: &[f64], rate: f64, rho: f64, grad: Option<&mut [f64]>) -> Eval {
        let (nx, nv, nu, ny, nz) = (self.nx, self.nv, self.nu, self.ny, self.nz);
        let (wy, wz) = (self.w.margin_y(), self.w.margin_z());
        let (px, pv, pu) = self.probs(th);
        let mut a = vec![0.0; nv * ny];
        let mut b = vec![0.0; nv * nz];
        for x in 0..nx {
            for v in 0..nv {
                let m = px[x] * pv[x][v];
                for y in 0..ny {
                    a[v * ny + y] += m * wy.get(x, y);
                }
                for z in 0..nz {
                    b[v * nz + z] += m * wz.get(x, z);
                }
            }
        }
        let mut t = vec![0.0; nu * nv * ny];
        let mut s = vec![0.0; nu * nv * nz];
        let mut tuy = vec![0.0; nu * ny];
        let mut suz = vec![0.0; nu * nz];
        for u in 0..nu {
            for v in 0..nv {
                let c = pu[v][u];
                for y in 0..ny {
                    let val = c * a[v * ny + y];
                    t[(u * nv + v) * ny + y] = val;
                    tuy[u * ny + y] += val;
                }
                for z in 0..nz {
                    let val = c * b[v * nz + z];
                    s[(u * nv + v) * nz + z] = val;
                    suz[u * nz + z] += val;
                }
            }
        }
        let mut ty = vec![0.0; ny];
        let mut sz = vec![0.0; nz];
        for u in 0..nu {
            for y in 0..ny {
                ty[y] += tuy[u * ny + y];
            }
            for z in 0..nz {
                sz[z] += suz[u * nz + z];
            }
        }
        let av: Vec<f64> = (0..nv)
            .map(|v| a[v * ny..(v + 1) * ny].iter().sum())
            .collect();
        let secrecy = h(&tuy) - h(&t) - h(&suz) + h(&s);
        let ivy = h(&av) + h(&ty) - h(&a);
        let delta_u = (h(&ty) - h(&tuy)) - (h(&sz) - h(&suz));
        let Some(grad) = grad else {
            return Eval {
                secrecy,
                ivy,
                delta_u,
            };
        };
        let d_ivy = 2.0 * rho * (rate - ivy).max(0.0);
        let d_delta = -2.0 * rho * delta_u.max(0.0);
        let mut gt = vec![0.0; t.len()];
        let mut gs = vec![0.0; s.len()];
        for u in 0..nu {
            for v in 0..nv {
                for y in 0..ny {
                    let i = (u * nv + v) * ny + y;
                    if t[i] > 0.0 {
                        gt[i] = lg(t[i]) - lg(tuy[u * ny + y])
                            + d_delta * (lg(tuy[u * ny + y]) - lg(ty[y]));
                    }
                }
                for z in 0..nz {
                    let i = (u * nv + v) * nz + z;
                    if s[i] > 0.0 {
                        gs[i] = -(lg(s[i]) - lg(suz[u * nz + z]))
                            - d_delta * (lg(suz[u * nz + z]) - lg(sz[z]));
                    }
                }
            }
        }
        let mut ga = vec![0.0; a.len()];
        let mut gb = vec![0.0; b.len()];
        let mut gpu = vec![vec![0.0; nu]; nv];
        for v in 0..nv {
            for y in 0..ny {
                let i = v * ny + y;
                if a[i] > 0.0 {
                    ga[i] = d_ivy * (lg(a[i]) - lg(av[v]) - lg(ty[y]));
                }
            }
            for u in 0..nu {
                let c = pu[v][u];
                let mut acc = 0.0;
                for y in 0..ny {
                    let g = gt[(u * nv + v) * ny + y];
                    acc += g * a[v * ny + y];
                    ga[v * ny + y] += g * c;
                }
                for z in 0..nz {
                    let g = gs[(u * nv + v) * nz + z];
                    acc += g * b[v * nz + z];
                    gb[v * nz + z] += g * c;
                }
                gpu[v][u] = acc;
            }
        }
        let mut gpx = vec![0.0; nx];
        let mut gpv = vec![vec![0.0; nv]; nx];
        for x in 0..nx {
            for v in 0..nv {
                let mut hxv = 0.0;
                for y in 0..ny {
                    hxv += ga[v * ny + y] * wy.get(x, y);
                }
                for z in 0..nz {
                    hxv += gb[v * nz + z] * wz.get(x, z);
                }
                gpv[x][v] = px[x] * hxv;
                gpx[x] += pv[x][v] * hxv;
            }
        }
        softmax_back(&px, &gpx, &mut grad[..nx]);
        for x in 0..nx {
            softmax_back(&pv[x], &gpv[x], &mut grad[nx + x * nv..nx + (x + 1) * nv]);
        }
        let off = nx + nx * nv;
        for v in 0..nv {
            softmax_back(&pu[v], &gpu[v], &mut grad[off + v * nu..off + (v + 1) * nu]);
        }
        Eval {
            secrecy,
            ivy,
            delta_u,
        }
    }

    fn witness(&self, th: &[f64]) -> GammaWitness {
        let (px, pv, pu) = self.probs(th);
        GammaWitness::Auxiliary {
            px: Pmf::new(px).unwrap_or_else(|_| Pmf::uniform(self.nx)),
            pv_x: Channel::from_flat_unchecked(self.nx, self.nv, pv.concat()),
            pu_v: Channel::from_flat_unchecked(self.nv, self.nu, pu.concat()),
        }
    }

    /// Penalized Adam ascent; returns the best feasible secrecy value and its logits.
    fn climb(&self, init: Vec<f64>, rate: f64, steps: usize) -> Option<(f64, Vec<f64>)> {
        let n = self.dims();
        let mut th = init;
        let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
        let mut g = vec![0.0; n];
        let (b1, b2, lr) = (0.9f64, 0.999f64, 0.05);
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut k = 0;
        for rho in [10.0, 100.0, 1000.0] {
            for _ in 0..steps {
                let e = self.run(&th, rate, rho, Some(&mut g));
                if e.ivy >= rate - FEAS_SLACK
                    && e.delta_u <= FEAS_SLACK
                    && best.as_ref().is_none_or(|b| e.secrecy > b.0)
                {
                    best = Some((e.secrecy, th.clone()));
                }
                k += 1;
                let (c1, c2) = (1.0 - b1.powi(k), 1.0 - b2.powi(k));
                for i in 0..n {
                    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                    th[i] += lr * (m[i] / c1) / ((v[i] / c2).sqrt() + 1e-12);
                }
            }
        }
        let e = self.run(&th, rate, 0.0, None);
        if e.ivy >= rate - FEAS_SLACK
            && e.delta_u <= FEAS_SLACK
            && best.as_ref().is_none_or(|b| e.secrecy > b.0)
        {
            best = Some((e.secrecy, th));
        }
        best
    }
}

/// `Γ1(R)`: best secrecy rate of a two-layer wiretap code carrying message rate `R`.
///
/// The value is a lower bound unless the channel is verified less noisy (then
/// the shortcut is exact) or the two margins coincide (then it is zero).
pub fn gamma1(w: &WiretapChannel, rate: f64, opts: &GammaOptions) -> Result<GammaResult> {
    opts.validate()?;
    let cap = check_rate(w, rate)?;
    if margins_equal(w.margin_y(), w.margin_z()) {
        return Ok(GammaResult {
            value: 0.0,
            witness: trivial_aux(cap.achieving_input),
            certified: true,
        });
    }
    let (px, short, short_certified) = shortcut(w, rate, &cap, opts);
    let verdict = is_less_noisy(w, opts.seed);
    if verdict.less_noisy && verdict.exact {
        return Ok(GammaResult {
            value: short.max(0.0),
            witness: trivial_aux(px),
            certified: short_certified,
        });
    }
    let nx = w.inputs();
    let asc = Ascent {
        w,
        nx,
        nv: opts.card_v.unwrap_or(nx + 2),
        nu: opts.card_u.unwrap_or(nx + 2),
        ny: w.y_size(),
        nz: w.z_size(),
    };
    let runs: Vec<Option<(f64, Vec<f64>)>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut th = vec![0.0; asc.dims()];
            if r == 0 {
                for (x, &p) in px.probs().iter().enumerate() {
                    th[x] = p.max(1e-6).ln();
                }
                for x in 0..nx {
                    if x < asc.nv {
                        th[nx + x * asc.nv + x] = 6.0;
                    }
                }
                let off = nx + nx * asc.nv;
                for v in 0..asc.nv {
                    th[off + v * asc.nu] = 6.0;
                }
            } else {
                let mut rng = trial_rng(opts.seed, r as u64);
                th.iter_mut()
                    .for_each(|t| *t = 4.0 * rng.random::<f64>() - 2.0);
            }
            asc.climb(th, rate, opts.ascent_steps)
        })
        .collect();
    let mut value = short.max(0.0);
    let mut witness = trivial_aux(px);
    for (s, th) in runs.into_iter().flatten() {
        if s > value {
            value = s;
            witness = asc.witness(&th);
        }
    }
    Ok(GammaResult {
        value,
        witness,
        certified: false,
    })
}

/// `min{R, Γ1(R)}`.
pub fn gamma1_prime(w: &WiretapChannel, rate: f64, opts: &GammaOptions) -> Result<GammaResult> {
    let g = gamma1(w, rate, opts)?;
    Ok(GammaResult {
        value: g.value.min(rate),
        ..g
    })
}

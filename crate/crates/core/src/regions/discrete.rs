use super::{RegionSearch, SystemSpec};
use crate::error::{Error, Result};
use crate::gamma::{gamma1, gamma2};
use crate::prob::{entropy_of, mutual_information_io, weighted, Channel, JointPmf};
use crate::rd::{
    channel_capacity, conditional_rate_distortion_direct, rate_distortion, SolverOptions,
};
use crate::util::compositions;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

const RATE_SLACK: f64 = 1e-9;
const DIST_SLACK: f64 = 1e-12;

/// One lattice point of `P_{Ŝ|S}` with its cached statistics.
#[derive(Debug, Clone)]
struct TestChannel {
    rows: Vec<f64>,
    info: f64,
    dist_b: f64,
}

/// One uncoded symbol map with the statistics the bound needs.
#[derive(Debug, Clone)]
struct SymbolMap {
    dist_b: f64,
    /// Joint of `(S, Z)`.
    joint: JointPmf,
    h_cond: f64,
}

/// Max of `exact` over indices, visiting in decreasing `ub` order and pruning on it.
///
/// Returns the best exact value, its index, and an upper bound on everything left
/// unvisited when the evaluation cap stops the scan early.
fn branch_and_bound<U, E>(
    n: usize,
    ub: U,
    mut exact: E,
    cap: usize,
) -> Result<(f64, Option<usize>, f64)>
where
    U: Fn(usize) -> f64,
    E: FnMut(usize) -> Result<f64>,
{
    let mut order: Vec<(f64, usize)> = (0..n).map(|i| (ub(i), i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = (f64::NEG_INFINITY, None);
    for (visited, &(u, i)) in order.iter().enumerate() {
        if u <= best.0 + 1e-12 {
            return Ok((best.0, best.1, best.0));
        }
        if visited >= cap {
            return Ok((best.0, best.1, u));
        }
        let v = exact(i)?;
        if v > best.0 {
            best = (v, Some(i));
        }
    }
    Ok((best.0, best.1, best.0))
}

/// Separate-scheme inner bound and outer bound at one `(D_B, D_E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyBounds {
    pub sep: f64,
    pub outer: f64,
    /// Maximizing `P_{Ŝ|S}` for the inner bound.
    pub sep_channel: Option<Channel>,
    pub outer_channel: Option<Channel>,
}

/// Region evaluator for one discrete system; caches `Γ` tables and lattices across queries.
pub struct DmEngine<'a> {
    sys: &'a SystemSpec,
    search: RegionSearch,
    capacity: f64,
    nodes: Vec<f64>,
    g1_nodes: OnceLock<Result<(Vec<f64>, bool)>>,
    g2_nodes: OnceLock<Result<Vec<f64>>>,
    g1_cache: Mutex<HashMap<u64, f64>>,
    g2_cache: Mutex<HashMap<u64, f64>>,
    sep_grid: OnceLock<Vec<TestChannel>>,
    unc_grid: OnceLock<Result<Vec<SymbolMap>>>,
}

impl<'a> DmEngine<'a> {
    pub fn new(sys: &'a SystemSpec, search: &RegionSearch) -> Result<Self> {
        sys.validate()?;
        search.solver.validate()?;
        search.gamma.validate()?;
        if search.resolution == 0 || search.rate_nodes < 2 {
            return Err(Error::Config(
                "resolution must be positive and rate_nodes at least 2".into(),
            ));
        }
        let cap = channel_capacity(
            sys.channel.margin_y(),
            &SolverOptions {
                tolerance: 1e-12,
                ..SolverOptions::default()
            },
        )?;
        let capacity = cap.capacity;
        let n = search.rate_nodes;
        let nodes = (0..n)
            .map(|j| capacity * j as f64 / (n - 1) as f64)
            .collect();
        Ok(DmEngine {
            sys,
            search: search.clone(),
            capacity,
            nodes,
            g1_nodes: OnceLock::new(),
            g2_nodes: OnceLock::new(),
            g1_cache: Mutex::new(HashMap::new()),
            g2_cache: Mutex::new(HashMap::new()),
            sep_grid: OnceLock::new(),
            unc_grid: OnceLock::new(),
        })
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    fn clamp_rate(&self, r: f64) -> f64 {
        r.clamp(0.0, self.capacity)
    }

    fn g1_table(&self) -> Result<&(Vec<f64>, bool)> {
        self.g1_nodes
            .get_or_init(|| {
                let mut vals = Vec::with_capacity(self.nodes.len());
                let mut certified = true;
                for &r in &self.nodes {
                    let g = gamma1(&self.sys.channel, r, &self.search.gamma)?;
                    certified &= g.certified;
                    vals.push(g.value);
                }
                Ok((vals, certified))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn g2_table(&self) -> Result<&Vec<f64>> {
        self.g2_nodes
            .get_or_init(|| {
                self.nodes
                    .iter()
                    .map(|&r| Ok(gamma2(&self.sys.channel, r, &self.search.gamma)?.value))
                    .collect()
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Lower bound on `Γ1(r)`: exact when the channel admits the certified shortcut,
    /// otherwise the best table value at a node at or above `r` (Γ1 is nonincreasing).
    fn g1_lower(&self, r: f64) -> Result<f64> {
        let r = self.clamp_rate(r);
        let (vals, certified) = self.g1_table()?;
        if *certified {
            if let Some(&v) = self.g1_cache.lock().expect("cache").get(&r.to_bits()) {
                return Ok(v);
            }
            let v = gamma1(&self.sys.channel, r, &self.search.gamma)?.value;
            self.g1_cache.lock().expect("cache").insert(r.to_bits(), v);
            return Ok(v);
        }
        Ok(self
            .nodes
            .iter()
            .zip(vals)
            .filter(|(&n, _)| n >= r - RATE_SLACK)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max))
    }

    /// Table value at the last node at or below `r`; an upper bound on `Γ1(r)` when the table is exact.
    fn g1_hint(&self, r: f64) -> Result<f64> {
        let r = self.clamp_rate(r);
        let (vals, _) = self.g1_table()?;
        Ok(self
            .nodes
            .iter()
            .zip(vals)
            .filter(|(&n, _)| n <= r + RATE_SLACK)
            .map(|(_, &v)| v)
            .next_back()
            .unwrap_or(0.0))
    }

    /// Upper bound on `Γ2(r)` from the table (Γ2 is nonincreasing).
    fn g2_upper(&self, r: f64) -> Result<f64> {
        let r = self.clamp_rate(r);
        let vals = self.g2_table()?;
        Ok(self
            .nodes
            .iter()
            .zip(vals)
            .filter(|(&n, _)| n <= r + RATE_SLACK)
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min))
    }

    fn g2_exact(&self, r: f64) -> Result<f64> {
        let r = self.clamp_rate(r);
        if let Some(&v) = self.g2_cache.lock().expect("cache").get(&r.to_bits()) {
            return Ok(v);
        }
        let v = gamma2(&self.sys.channel, r, &self.search.gamma)?
            .value
            .min(self.g2_upper(r)?);
        self.g2_cache.lock().expect("cache").insert(r.to_bits(), v);
        Ok(v)
    }

    /// `R_S(D_E)`, infinite below the minimum distortion.
    fn rs_de(&self, de: f64) -> Result<f64> {
        let src = &self.sys.source;
        if de < src.d_e.d_min(src.pmf.probs()) - DIST_SLACK {
            return Ok(f64::INFINITY);
        }
        Ok(rate_distortion(&src.pmf, &src.d_e, de, &self.search.solver)?.rate)
    }

    /// `R_K + γ Γ1(H(S)/γ)` capped by `R_S(D_E)`; infeasible when `γ C_B < H(S)`.
    pub fn lossless(&self, de: f64) -> Result<f64> {
        self.lossless_at_key(de, self.sys.rk)
    }

    pub fn lossless_at_key(&self, de: f64, rk: f64) -> Result<f64> {
        if !(rk >= 0.0) || !rk.is_finite() {
            return Err(Error::OutOfRange(format!(
                "key rate must be nonnegative, got {rk}"
            )));
        }
        if !(de >= 0.0) {
            return Err(Error::OutOfRange(format!("D_E = {de}")));
        }
        let hs = entropy_of(self.sys.source.pmf.probs());
        let g = self.sys.gamma;
        if g * self.capacity < hs - RATE_SLACK {
            return Err(Error::Infeasible(format!(
                "γ C_B = {} is below H(S) = {hs}",
                g * self.capacity
            )));
        }
        let rs = self.rs_de(de)?;
        let secrecy = gamma1(
            &self.sys.channel,
            self.clamp_rate(hs / g),
            &self.search.gamma,
        )?
        .value;
        Ok((rk + g * secrecy).min(rs))
    }

    fn lattice_resolution(&self, options_per_row: impl Fn(usize) -> Vec<usize>) -> usize {
        let mut k = self.search.resolution;
        loop {
            let total: f64 = options_per_row(k).iter().map(|&c| c as f64).product();
            if total <= self.search.max_points as f64 || k == 1 {
                return k;
            }
            k -= 1;
        }
    }

    fn sep_lattice(&self) -> &Vec<TestChannel> {
        self.sep_grid.get_or_init(|| {
            let src = &self.sys.source;
            let (ns, nr) = (src.d_b.sources(), src.d_b.reconstructions());
            let p = src.pmf.probs();
            let allowed: Vec<Vec<usize>> = (0..ns)
                .map(|s| (0..nr).filter(|&r| src.d_b.get(s, r).is_finite()).collect())
                .collect();
            let row_options = |k: usize| -> Vec<Vec<Vec<f64>>> {
                (0..ns)
                    .map(|s| {
                        if p[s] == 0.0 {
                            let best = (0..nr)
                                .min_by(|&a, &b| src.d_b.get(s, a).total_cmp(&src.d_b.get(s, b)))
                                .unwrap();
                            let mut row = vec![0.0; nr];
                            row[best] = 1.0;
                            return vec![row];
                        }
                        compositions(allowed[s].len(), k)
                            .into_iter()
                            .map(|c| {
                                let mut row = vec![0.0; nr];
                                for (&col, &cnt) in allowed[s].iter().zip(&c) {
                                    row[col] = cnt as f64 / k as f64;
                                }
                                row
                            })
                            .collect()
                    })
                    .collect()
            };
            let k = self.lattice_resolution(|k| {
                (0..ns)
                    .map(|s| {
                        if p[s] == 0.0 {
                            1
                        } else {
                            crate::util::composition_count(allowed[s].len(), k) as usize
                        }
                    })
                    .collect()
            });
            let options = row_options(k);
            let total: usize = options.iter().map(|o| o.len()).product();
            let mut out = Vec::with_capacity(total);
            for idx in 0..total {
                let mut rest = idx;
                let mut rows = Vec::with_capacity(ns * nr);
                for o in &options {
                    rows.extend_from_slice(&o[rest % o.len()]);
                    rest /= o.len();
                }
                out.push(self.describe(rows));
            }
            out
        })
    }

    fn describe(&self, rows: Vec<f64>) -> TestChannel {
        let src = &self.sys.source;
        let (ns, nr) = (src.d_b.sources(), src.d_b.reconstructions());
        let p = src.pmf.probs();
        let ch = Channel::from_flat_unchecked(ns, nr, rows);
        let info = mutual_information_io(p, &ch);
        let mut dist_b = 0.0;
        for s in 0..ns {
            for r in 0..nr {
                let t = ch.get(s, r);
                if t > 0.0 {
                    dist_b += weighted(p[s], t * src.d_b.get(s, r));
                }
            }
        }
        TestChannel {
            rows: ch.data().to_vec(),
            info,
            dist_b,
        }
    }

    fn admissible(&self, t: &TestChannel, db: f64) -> bool {
        t.dist_b <= db + DIST_SLACK && t.info <= self.sys.gamma * self.capacity + RATE_SLACK
    }

    fn crd(&self, t: &TestChannel, de: f64) -> Result<f64> {
        let src = &self.sys.source;
        let (ns, nr) = (src.d_b.sources(), src.d_b.reconstructions());
        let p = src.pmf.probs();
        let mut joint = Vec::with_capacity(ns * nr);
        for s in 0..ns {
            joint.extend(t.rows[s * nr..(s + 1) * nr].iter().map(|v| p[s] * v));
        }
        let j =
            JointPmf::new(vec![ns, nr], joint).map_err(|e| Error::SolverFault(e.to_string()))?;
        Ok(conditional_rate_distortion_direct(&j, &src.d_e, de, &self.search.solver)?.rate)
    }

    fn h_cond(&self, t: &TestChannel) -> f64 {
        entropy_of(self.sys.source.pmf.probs()) - t.info
    }

    /// Inner (`Γ1`) and outer (`Γ2`) bounds on the maximal list rate at `(D_B, D_E)`.
    pub fn lossy_bounds(&self, db: f64, de: f64, want_outer: bool) -> Result<LossyBounds> {
        self.lossy_bounds_at_key(db, de, self.sys.rk, want_outer)
    }

    /// As [`DmEngine::lossy_bounds`] with the key rate overridden; the cached tables do not depend on it.
    pub fn lossy_bounds_at_key(
        &self,
        db: f64,
        de: f64,
        rk: f64,
        want_outer: bool,
    ) -> Result<LossyBounds> {
        if !(rk >= 0.0) || !rk.is_finite() {
            return Err(Error::OutOfRange(format!(
                "key rate must be nonnegative, got {rk}"
            )));
        }
        if !(db >= 0.0) || !(de >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "distortions must be nonnegative (D_B={db}, D_E={de})"
            )));
        }
        let grid = self.sep_lattice();
        let feasible: Vec<usize> = (0..grid.len())
            .filter(|&i| self.admissible(&grid[i], db))
            .collect();
        if feasible.is_empty() {
            return Err(Error::Infeasible(format!(
                "no test channel reaches D_B = {db} within γ C_B = {}",
                self.sys.gamma * self.capacity
            )));
        }
        let rs = self.rs_de(de)?;
        if !rs.is_finite() || rs == 0.0 {
            return Ok(LossyBounds {
                sep: rs,
                outer: rs,
                sep_channel: None,
                outer_channel: None,
            });
        }
        let g = self.sys.gamma;
        let crd_memo: Mutex<HashMap<usize, f64>> = Mutex::new(HashMap::new());
        let crd_at = |i: usize| -> Result<f64> {
            if let Some(&v) = crd_memo.lock().expect("memo").get(&i) {
                return Ok(v);
            }
            let v = self.crd(&grid[feasible[i]], de)?;
            crd_memo.lock().expect("memo").insert(i, v);
            Ok(v)
        };
        let sep_obj = |t: &TestChannel, crd: f64| -> Result<f64> {
            Ok((rk + g * self.g1_lower(t.info / g)? + crd).min(rs))
        };
        let outer_obj = |t: &TestChannel, crd: f64| -> Result<f64> {
            Ok((rk + g * self.g2_exact(t.info / g)? + crd).min(rs))
        };

        let hints: Vec<f64> = feasible
            .iter()
            .map(|&i| {
                let t = &grid[i];
                Ok((rk + g * self.g1_hint(t.info / g)? + rs.min(self.h_cond(t))).min(rs))
            })
            .collect::<Result<_>>()?;
        let (mut sep, sep_idx, _) = branch_and_bound(
            feasible.len(),
            |i| hints[i],
            |i| sep_obj(&grid[feasible[i]], crd_at(i)?),
            self.search.max_exact,
        )?;
        let mut sep_best = sep_idx.map(|i| grid[feasible[i]].clone());
        if self.search.refine {
            if let Some(start) = sep_best.clone() {
                let (t, v) = self.refine(start, sep, db, |t| sep_obj(t, self.crd(t, de)?))?;
                sep = v;
                sep_best = Some(t);
            }
        }
        let mut outer = f64::NAN;
        let mut outer_best = None;
        if want_outer {
            let ubs: Vec<f64> = feasible
                .iter()
                .map(|&i| {
                    let t = &grid[i];
                    Ok((rk + g * self.g2_upper(t.info / g)? + rs.min(self.h_cond(t))).min(rs))
                })
                .collect::<Result<_>>()?;
            let (mut best, idx, residual) = branch_and_bound(
                feasible.len(),
                |i| ubs[i],
                |i| outer_obj(&grid[feasible[i]], crd_at(i)?),
                self.search.max_exact,
            )?;
            outer_best = idx.map(|i| grid[feasible[i]].clone());
            if self.search.refine {
                if let Some(start) = outer_best.clone() {
                    let (t, v) =
                        self.refine(start, best, db, |t| outer_obj(t, self.crd(t, de)?))?;
                    best = v;
                    outer_best = Some(t);
                }
            }
            if let Some(t) = &sep_best {
                let v = outer_obj(t, self.crd(t, de)?)?;
                if v > best {
                    best = v;
                    outer_best = Some(t.clone());
                }
            }
            outer = best.max(residual);
        }
        let to_channel = |t: Option<TestChannel>| {
            let (ns, nr) = (
                self.sys.source.d_b.sources(),
                self.sys.source.d_b.reconstructions(),
            );
            t.map(|t| Channel::from_flat_unchecked(ns, nr, t.rows))
        };
        Ok(LossyBounds {
            sep,
            outer,
            sep_channel: to_channel(sep_best),
            outer_channel: to_channel(outer_best),
        })
    }

    /// Pairwise mass moves inside each row of `P_{Ŝ|S}`, accepting strict improvements.
    fn refine<F>(
        &self,
        start: TestChannel,
        start_val: f64,
        db: f64,
        objective: F,
    ) -> Result<(TestChannel, f64)>
    where
        F: Fn(&TestChannel) -> Result<f64>,
    {
        let src = &self.sys.source;
        let (ns, nr) = (src.d_b.sources(), src.d_b.reconstructions());
        let p = src.pmf.probs();
        let mut best = (start, start_val);
        let h = 1.0 / self.search.resolution as f64;
        for step in [h / 2.0, h / 4.0, h / 8.0] {
            let mut accepted = 0;
            let mut improved = true;
            while improved && accepted < 20 {
                improved = false;
                'scan: for s in (0..ns).filter(|&s| p[s] > 0.0) {
                    for i in 0..nr {
                        for j in 0..nr {
                            if i == j
                                || !src.d_b.get(s, i).is_finite()
                                || best.0.rows[s * nr + j] < step
                            {
                                continue;
                            }
                            let mut rows = best.0.rows.clone();
                            rows[s * nr + i] += step;
                            rows[s * nr + j] -= step;
                            let cand = self.describe(rows);
                            if !self.admissible(&cand, db) {
                                continue;
                            }
                            let v = objective(&cand)?;
                            if v > best.1 + 1e-12 {
                                best = (cand, v);
                                improved = true;
                                accepted += 1;
                                break 'scan;
                            }
                        }
                    }
                }
            }
        }
        Ok(best)
    }

    fn unc_lattice(&self) -> Result<&Vec<SymbolMap>> {
        self.unc_grid
            .get_or_init(|| {
                let sys = self.sys;
                if sys.gamma < 1.0 {
                    return Err(Error::Config("the uncoded scheme needs γ ≥ 1".into()));
                }
                let src = &sys.source;
                let p = src.pmf.probs();
                let ns = p.len();
                let nk = (sys.rk.exp2().floor() as usize).max(1);
                let (nx, ny, nz) = (
                    sys.channel.inputs(),
                    sys.channel.y_size(),
                    sys.channel.z_size(),
                );
                let (wy, wz) = (sys.channel.margin_y(), sys.channel.margin_z());
                let rows = ns * nk;
                let active = |r: usize| p[r / nk] > 0.0;
                let k = self.lattice_resolution(|k| {
                    (0..rows)
                        .map(|r| {
                            if active(r) {
                                crate::util::composition_count(nx, k) as usize
                            } else {
                                1
                            }
                        })
                        .collect()
                });
                let options: Vec<Vec<f64>> = compositions(nx, k)
                    .into_iter()
                    .map(|c| c.into_iter().map(|v| v as f64 / k as f64).collect())
                    .collect();
                let total: f64 = (0..rows)
                    .map(|r| if active(r) { options.len() as f64 } else { 1.0 })
                    .product();
                if total > self.search.max_points as f64 {
                    return Err(Error::CapExceeded(format!(
                        "{total} deterministic symbol maps exceed max_points = {}",
                        self.search.max_points
                    )));
                }
                let mut fixed = vec![0.0; nx];
                fixed[0] = 1.0;
                let mut maps = Vec::with_capacity(total as usize);
                for idx in 0..total as usize {
                    let mut rest = idx;
                    let map: Vec<&[f64]> = (0..rows)
                        .map(|r| {
                            if active(r) {
                                let o = &options[rest % options.len()];
                                rest /= options.len();
                                o.as_slice()
                            } else {
                                fixed.as_slice()
                            }
                        })
                        .collect();
                    // Legitimate decoder: per (y, k) the reconstruction minimizing expected d_B.
                    let mut dist_b = 0.0;
                    for kk in 0..nk {
                        for y in 0..ny {
                            let mut best = f64::INFINITY;
                            for r in 0..src.d_b.reconstructions() {
                                let mut cost = 0.0;
                                for s in 0..ns {
                                    let py: f64 =
                                        (0..nx).map(|x| map[s * nk + kk][x] * wy.get(x, y)).sum();
                                    cost += weighted(p[s] * py, src.d_b.get(s, r));
                                }
                                best = best.min(cost);
                            }
                            dist_b += best / nk as f64;
                        }
                    }
                    let mut joint = vec![0.0; ns * nz];
                    for s in 0..ns {
                        for kk in 0..nk {
                            for x in 0..nx {
                                let m = p[s] * map[s * nk + kk][x] / nk as f64;
                                if m == 0.0 {
                                    continue;
                                }
                                for z in 0..nz {
                                    joint[s * nz + z] += m * wz.get(x, z);
                                }
                            }
                        }
                    }
                    let joint = JointPmf::new(vec![ns, nz], joint)
                        .map_err(|e| Error::SolverFault(e.to_string()))?;
                    let h_cond = (entropy_of(joint.probs())
                        - entropy_of(&joint.marginal_masses(&[1])))
                    .max(0.0);
                    maps.push(SymbolMap {
                        dist_b,
                        joint,
                        h_cond,
                    });
                }
                Ok(maps)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Uncoded inner bound: `max R_{S|Z}(D_E)` over symbol maps meeting `D_B`.
    pub fn unc(&self, db: f64, de: f64) -> Result<f64> {
        if !(db >= 0.0) || !(de >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "distortions must be nonnegative (D_B={db}, D_E={de})"
            )));
        }
        let maps = self.unc_lattice()?;
        let feasible: Vec<usize> = (0..maps.len())
            .filter(|&i| maps[i].dist_b <= db + DIST_SLACK)
            .collect();
        if feasible.is_empty() {
            let best = maps.iter().map(|m| m.dist_b).fold(f64::INFINITY, f64::min);
            return Err(Error::Infeasible(format!(
                "D_B = {db} is below the best symbol-map distortion {best}"
            )));
        }
        let rs = self.rs_de(de)?;
        if !rs.is_finite() || rs == 0.0 {
            return Ok(rs);
        }
        let (best, _, _) = branch_and_bound(
            feasible.len(),
            |i| rs.min(maps[feasible[i]].h_cond),
            |i| {
                let m = &maps[feasible[i]];
                Ok(conditional_rate_distortion_direct(
                    &m.joint,
                    &self.sys.source.d_e,
                    de,
                    &self.search.solver,
                )?
                .rate
                .min(rs))
            },
            self.search.max_exact,
        )?;
        Ok(best)
    }
}

/// Lossless bound: `min{R_K + γ Γ1(H(S)/γ), R_S(D_E)}`.
pub fn lossless_max_rl(sys: &SystemSpec, de: f64, search: &RegionSearch) -> Result<f64> {
    DmEngine::new(sys, search)?.lossless(de)
}

/// Separate-scheme inner bound.
pub fn sep_inner_max_rl(sys: &SystemSpec, db: f64, de: f64, search: &RegionSearch) -> Result<f64> {
    Ok(DmEngine::new(sys, search)?.lossy_bounds(db, de, false)?.sep)
}

/// Outer bound (`Γ2` in place of `Γ1`).
pub fn outer_max_rl(sys: &SystemSpec, db: f64, de: f64, search: &RegionSearch) -> Result<f64> {
    Ok(DmEngine::new(sys, search)?
        .lossy_bounds(db, de, true)?
        .outer)
}

/// Uncoded (symbol-by-symbol) inner bound.
pub fn unc_inner_max_rl(sys: &SystemSpec, db: f64, de: f64, search: &RegionSearch) -> Result<f64> {
    DmEngine::new(sys, search)?.unc(db, de)
}

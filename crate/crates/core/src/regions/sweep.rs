use super::{gaussian_max_rl, gaussian_uncoded_max_rl};
use super::{
    Axis, BoundKind, DmEngine, GaussianSpec, RegionCurve, RegionQuery, RegionSearch, SystemSpec,
};
use crate::error::{Error, Result};
use crate::gamma::margins_equal;
use crate::prob::is_degraded;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Dm(&'a SystemSpec),
    Gaussian(&'a GaussianSpec),
}

fn check_kind(kind: BoundKind, target: Target) -> Result<()> {
    match target {
        Target::Dm(sys) => {
            if kind.is_gaussian() {
                return Err(Error::Config(format!(
                    "{} needs a Gaussian system",
                    kind.name()
                )));
            }
            if kind == BoundKind::DegradedExact && !is_degraded(&sys.channel).degraded {
                return Err(Error::Config(
                    "degraded_exact needs Z to be a degraded version of Y".into(),
                ));
            }
            if kind == BoundKind::NoiselessExact
                && !margins_equal(sys.channel.margin_y(), sys.channel.margin_z())
            {
                return Err(Error::Config(
                    "noiseless_exact needs Bob and Eve to see the same channel".into(),
                ));
            }
        }
        Target::Gaussian(_) => {
            if !kind.is_gaussian() {
                return Err(Error::Config(format!(
                    "{} needs a discrete system",
                    kind.name()
                )));
            }
        }
    }
    Ok(())
}

fn dm_value(kind: BoundKind, engine: &DmEngine, db: f64, de: f64, rk: f64) -> Result<f64> {
    match kind {
        BoundKind::LosslessExact => engine.lossless_at_key(de, rk),
        BoundKind::InnerSep | BoundKind::DegradedExact | BoundKind::NoiselessExact => {
            Ok(engine.lossy_bounds_at_key(db, de, rk, false)?.sep)
        }
        BoundKind::Outer => Ok(engine.lossy_bounds_at_key(db, de, rk, true)?.outer),
        BoundKind::InnerUnc => engine.unc(db, de),
        BoundKind::GaussianExact | BoundKind::GaussianUncoded => {
            unreachable!("checked by check_kind")
        }
    }
}

fn gaussian_value(kind: BoundKind, g: &GaussianSpec, db: f64, de: f64) -> Result<f64> {
    match kind {
        BoundKind::GaussianUncoded => gaussian_uncoded_max_rl(g, db, de),
        _ => gaussian_max_rl(g, db, de),
    }
}

/// Maximal list rate of one bound at `(q.db, q.de)`; `q.rl` is ignored.
pub fn max_rl(
    kind: BoundKind,
    target: Target,
    q: &RegionQuery,
    search: &RegionSearch,
) -> Result<f64> {
    check_kind(kind, target)?;
    match target {
        Target::Dm(sys) => dm_value(kind, &DmEngine::new(sys, search)?, q.db, q.de, sys.rk),
        Target::Gaussian(g) => gaussian_value(kind, g, q.db, q.de),
    }
}

/// Whether `q.rl` lies under the bound; infeasible or invalid queries are outside.
pub fn region_contains(
    kind: BoundKind,
    target: Target,
    q: &RegionQuery,
    search: &RegionSearch,
) -> bool {
    if !(q.rl >= 0.0) {
        return false;
    }
    match max_rl(kind, target, q, search) {
        Ok(v) => q.rl <= v + 1e-9,
        Err(_) => false,
    }
}

/// Sweep one axis with the other coordinates taken from `base`.
///
/// Points where the bound is infeasible are left out of the curve. Numerical bounds
/// are replaced by their monotone envelope along the axis (running max for inner
/// bounds, running min for the outer bound), which keeps them valid.
pub fn sweep_curve(
    kind: BoundKind,
    target: Target,
    axis: Axis,
    grid: &[f64],
    base: &RegionQuery,
    search: &RegionSearch,
) -> Result<RegionCurve> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "sweep grid must be nonempty and finite".into(),
        ));
    }
    check_kind(kind, target)?;
    let mut samples: Vec<(f64, f64)> = match target {
        Target::Dm(sys) => {
            if axis == Axis::NE {
                return Err(Error::Config(
                    "the NE axis applies to Gaussian systems only".into(),
                ));
            }
            let shared = if kind == BoundKind::InnerUnc && axis == Axis::RK {
                None
            } else {
                Some(DmEngine::new(sys, search)?)
            };
            let points: Vec<Result<Option<(f64, f64)>>> = grid
                .par_iter()
                .map(|&v| {
                    let (db, de, rk) = match axis {
                        Axis::DB => (v, base.de, sys.rk),
                        Axis::DE => (base.db, v, sys.rk),
                        _ => (base.db, base.de, v),
                    };
                    let value = match &shared {
                        Some(engine) => dm_value(kind, engine, db, de, rk),
                        None => {
                            let local = SystemSpec { rk, ..sys.clone() };
                            DmEngine::new(&local, search)
                                .and_then(|e| dm_value(kind, &e, db, de, rk))
                        }
                    };
                    keep_feasible(v, value)
                })
                .collect();
            points
                .into_iter()
                .filter_map(Result::transpose)
                .collect::<Result<_>>()?
        }
        Target::Gaussian(g) => grid
            .par_iter()
            .map(|&v| {
                let mut local = *g;
                let (mut db, mut de) = (base.db, base.de);
                match axis {
                    Axis::DB => db = v,
                    Axis::DE => de = v,
                    Axis::RK => local.rk = v,
                    Axis::NE => local.ne = v,
                }
                keep_feasible(v, gaussian_value(kind, &local, db, de))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .filter_map(Result::transpose)
            .collect::<Result<_>>()?,
    };
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if matches!(target, Target::Dm(_)) {
        envelope(&mut samples, kind, axis);
    }
    Ok(RegionCurve {
        axis,
        samples,
        bound_kind: kind,
    })
}

fn keep_feasible(v: f64, value: Result<f64>) -> Result<Option<(f64, f64)>> {
    match value {
        Ok(r) => Ok(Some((v, r))),
        Err(e) if e.is_infeasible() => Ok(None),
        Err(e) => Err(e),
    }
}

fn envelope(samples: &mut [(f64, f64)], kind: BoundKind, axis: Axis) {
    let increasing = axis != Axis::DE;
    let inner = kind != BoundKind::Outer;
    // Inner bounds may borrow from dominated points; outer bounds may borrow from dominating ones.
    let forward = increasing == inner;
    let pick = |a: f64, b: f64| if inner { a.max(b) } else { a.min(b) };
    let n = samples.len();
    for step in 1..n {
        let (prev, cur) = if forward {
            (step - 1, step)
        } else {
            (n - step, n - step - 1)
        };
        samples[cur].1 = pick(samples[cur].1, samples[prev].1);
    }
}

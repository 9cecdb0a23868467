use crate::output::{num, Output};
use crate::{CliError, Command, Extras, JobConfig, Spec};
use rayon::prelude::*;
use secrecy_core::gamma::{gamma1, gamma2, GammaOptions};
use secrecy_core::rd::{
    channel_capacity, conditional_rate_distortion, conditional_rate_distortion_direct,
    rate_distortion, slope_allocation, SolverOptions,
};
use secrecy_core::regions::{
    max_rl, sweep_curve, Axis, BoundKind, DmEngine, RegionQuery, RegionSearch, SystemSpec, Target,
};
use secrecy_core::sim::{
    gaussian_d_tilted, gaussian_uncoded_run, tilted_profile, uncoded_run, AttackSpec, Auxiliary,
    RunConfig, SeparateScheme, SimReport, DEFAULT_MEMORY_CAP,
};
use secrecy_core::spectrum::{optimal_henchman_code_oracle, OracleMode};
use secrecy_core::{Channel, DistortionMatrix, Error, JointPmf};
use serde_json::{json, Value};

/// The worked binary example: uniform bit, erasure distortions, BEC(0.3) to Bob, BSC(0.1) to Eve.
pub const EXAMPLE_SPEC: &str = include_str!("../fixtures/example.json");

const EXAMPLE_DB: f64 = 0.3;
const EXAMPLE_DE: f64 = 0.3;
const EXAMPLE_SEP: f64 = 0.16900;
const EXAMPLE_UNC: f64 = 0.19351;
const EXAMPLE_TOL: f64 = 2e-3;

type Dispatched = (Output, Result<(), CliError>);

fn solver(job: &JobConfig) -> SolverOptions {
    SolverOptions {
        tolerance: job.tol,
        ..SolverOptions::default()
    }
}

fn gamma_opts(job: &JobConfig) -> GammaOptions {
    GammaOptions {
        seed: job.seed,
        ..GammaOptions::default()
    }
}

fn search(job: &JobConfig) -> RegionSearch {
    let base = RegionSearch::default();
    RegionSearch {
        solver: SolverOptions {
            tolerance: job.tol.min(base.solver.tolerance),
            ..base.solver.clone()
        },
        gamma: gamma_opts(job),
        ..base
    }
}

fn json_of<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn need_spec(spec: Option<Spec>) -> Result<Spec, CliError> {
    spec.ok_or_else(|| CliError::Config("this command needs --config".into()))
}

fn need_dm(spec: Option<Spec>, what: &str) -> Result<SystemSpec, CliError> {
    match need_spec(spec)? {
        Spec::Dm(s) => Ok(s),
        Spec::Gaussian(_) => Err(CliError::Config(format!(
            "{what} needs a discrete (\"dm\") spec"
        ))),
    }
}

fn distortion<'a>(
    sys: &'a SystemSpec,
    x: &Extras,
    default: &str,
) -> Result<&'a DistortionMatrix, CliError> {
    match x.str("distortion").unwrap_or(default) {
        "b" => Ok(&sys.source.d_b),
        "e" => Ok(&sys.source.d_e),
        other => Err(CliError::Config(format!(
            "distortion: expected b or e, got {other:?}"
        ))),
    }
}

/// Law of `(S, W)` when `S` is sent uncoded and `W` is Bob's or Eve's output.
fn side_joint(sys: &SystemSpec, x: &Extras) -> Result<JointPmf, CliError> {
    let ch = match x.str("given").unwrap_or("z") {
        "y" => sys.channel.margin_y(),
        "z" => sys.channel.margin_z(),
        other => {
            return Err(CliError::Config(format!(
                "given: expected y or z, got {other:?}"
            )))
        }
    };
    if ch.inputs() != sys.source.pmf.alphabet_size() {
        return Err(CliError::Config(
            "side information needs the channel input alphabet to be the source alphabet".into(),
        ));
    }
    Ok(JointPmf::from_input(&sys.source.pmf, ch)?)
}

fn capacity(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    Extras(&job.extra).only(&[])?;
    let mut out = Output::new(&["quantity", "value"]);
    match need_spec(spec)? {
        Spec::Dm(sys) => {
            let opts = solver(job);
            let b = channel_capacity(sys.channel.margin_y(), &opts)?;
            let e = channel_capacity(sys.channel.margin_z(), &opts)?;
            out.row(vec!["capacity".into(), num(b.capacity)]);
            out.row(vec!["capacity_eve".into(), num(e.capacity)]);
            out.json = json!({ "capacity": json_of(&b), "capacity_eve": json_of(&e) });
        }
        Spec::Gaussian(g) => {
            let (b, e) = (
                (1.0 + g.p / g.nb).log2() / 2.0,
                (1.0 + g.p / g.ne).log2() / 2.0,
            );
            out.row(vec!["capacity".into(), num(b)]);
            out.row(vec!["capacity_eve".into(), num(e)]);
            out.json = json!({ "capacity": b, "capacity_eve": e });
        }
    }
    Ok(out)
}

fn rd(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    x.only(&["d", "distortion"])?;
    let targets: Vec<f64> = x.list("d")?;
    let mut out = Output::new(&["d", "rate", "slope"]);
    let mut reports = Vec::new();
    match need_spec(spec)? {
        Spec::Dm(sys) => {
            let dm = distortion(&sys, &x, "b")?;
            let results: Vec<_> = targets
                .par_iter()
                .map(|&d| rate_distortion(&sys.source.pmf, dm, d, &solver(job)))
                .collect::<Result<_, _>>()?;
            for (d, r) in targets.iter().zip(results) {
                out.row(vec![num(*d), num(r.rate), num(r.slope)]);
                reports.push(json!({ "d": d, "result": json_of(&r) }));
            }
        }
        Spec::Gaussian(g) => {
            for &d in &targets {
                if !(d > 0.0) {
                    return Err(CliError::Config(format!("d must be positive, got {d}")));
                }
                let (rate, slope) = if d < g.ns {
                    (
                        (g.ns / d).log2() / 2.0,
                        1.0 / (2.0 * d * std::f64::consts::LN_2),
                    )
                } else {
                    (0.0, 0.0)
                };
                out.row(vec![num(d), num(rate), num(slope)]);
                reports.push(json!({ "d": d, "rate": rate, "slope": slope }));
            }
        }
    }
    out.json = Value::Array(reports);
    Ok(out)
}

fn crd(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    x.only(&["d", "given", "distortion"])?;
    let sys = need_dm(spec, "crd")?;
    let joint = side_joint(&sys, &x)?;
    let dm = distortion(&sys, &x, "e")?;
    let targets: Vec<f64> = x.list("d")?;
    let opts = solver(job);
    let rows: Vec<_> = targets
        .par_iter()
        .map(|&d| -> Result<_, Error> {
            let direct = conditional_rate_distortion_direct(&joint, dm, d, &opts)?;
            let split = slope_allocation(&joint, dm, d, &opts)?;
            let best = conditional_rate_distortion(&joint, dm, d, &opts)?;
            Ok((d, direct.rate, split, best))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Output::new(&["d", "rate", "rate_direct", "rate_split"]);
    let mut reports = Vec::new();
    for (d, direct, split, best) in rows {
        out.row(vec![num(d), num(best.rate), num(direct), num(split.rate)]);
        reports.push(json!({ "d": d, "rate": best.rate, "rate_direct": direct, "budgets": split.budgets, "result": json_of(&best) }));
    }
    out.json = Value::Array(reports);
    Ok(out)
}

fn gamma(job: &JobConfig, spec: Option<Spec>, second: bool) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    x.only(&["r"])?;
    let sys = need_dm(spec, if second { "gamma2" } else { "gamma1" })?;
    let rates: Vec<f64> = x.list("r")?;
    let opts = gamma_opts(job);
    let results: Vec<_> = rates
        .par_iter()
        .map(|&r| {
            if second {
                gamma2(&sys.channel, r, &opts)
            } else {
                gamma1(&sys.channel, r, &opts)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut out = Output::new(&["rate", "value", "certified"]);
    let mut reports = Vec::new();
    for (r, g) in rates.iter().zip(results) {
        out.row(vec![num(*r), num(g.value), g.certified.to_string()]);
        reports.push(json!({ "rate": r, "result": json_of(&g) }));
    }
    out.json = Value::Array(reports);
    Ok(out)
}

fn default_bound(spec: &Spec) -> BoundKind {
    match spec {
        Spec::Dm(_) => BoundKind::InnerSep,
        Spec::Gaussian(_) => BoundKind::GaussianExact,
    }
}

fn target(spec: &Spec) -> Target<'_> {
    match spec {
        Spec::Dm(s) => Target::Dm(s),
        Spec::Gaussian(g) => Target::Gaussian(g),
    }
}

fn region(job: &JobConfig, spec: Option<Spec>) -> Result<Dispatched, CliError> {
    let x = Extras(&job.extra);
    x.only(&["bound", "db", "de", "rl"])?;
    let spec = need_spec(spec)?;
    let kind = match x.str("bound") {
        Some(s) => s.parse()?,
        None => default_bound(&spec),
    };
    let rl: Option<f64> = x.get("rl")?;
    let q = RegionQuery {
        rl: rl.unwrap_or(0.0),
        db: x.need("db")?,
        de: x.need("de")?,
    };
    let value = max_rl(kind, target(&spec), &q, &search(job))?;
    let contains = rl.map(|r| r <= value + 1e-12);
    let mut out = Output::new(&["bound_kind", "db", "de", "max_rl", "rl", "contains"]);
    out.row(vec![
        kind.name().into(),
        num(q.db),
        num(q.de),
        num(value),
        rl.map_or(String::new(), num),
        contains.map_or(String::new(), |c| c.to_string()),
    ]);
    out.json = json!({ "bound_kind": kind, "query": json_of(&q), "max_rl": num(value), "contains": contains });
    let verdict = match contains {
        Some(false) => Err(CliError::Outside(format!(
            "R_L = {} exceeds {} = {}",
            q.rl,
            kind.name(),
            num(value)
        ))),
        _ => Ok(()),
    };
    Ok((out, verdict))
}

fn axis(name: &str) -> Result<Axis, CliError> {
    match name {
        "de" => Ok(Axis::DE),
        "db" => Ok(Axis::DB),
        "rk" => Ok(Axis::RK),
        "ne" => Ok(Axis::NE),
        other => Err(CliError::Config(format!(
            "axis: expected de, db, rk or ne, got {other:?}"
        ))),
    }
}

fn grid(x: &Extras) -> Result<Vec<f64>, CliError> {
    if x.str("grid").is_some() {
        return x.list("grid");
    }
    let (from, to, points): (f64, f64, usize) = (x.need("from")?, x.need("to")?, x.need("points")?);
    if points < 2 {
        return Ok(vec![from]);
    }
    Ok((0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect())
}

fn sweep(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    x.only(&["axis", "bound", "db", "de", "grid", "from", "to", "points"])?;
    let spec = need_spec(spec)?;
    let ax = axis(x.require("axis")?)?;
    let kind = match x.str("bound") {
        Some(s) => s.parse()?,
        None => default_bound(&spec),
    };
    let db = if ax == Axis::DB {
        x.or("db", 0.0)?
    } else {
        x.need("db")?
    };
    let de = if ax == Axis::DE {
        x.or("de", 0.0)?
    } else {
        x.need("de")?
    };
    let base = RegionQuery { rl: 0.0, db, de };
    let curve = sweep_curve(kind, target(&spec), ax, &grid(&x)?, &base, &search(job))?;
    let mut out = Output::new(&["axis_value", "max_rl", "bound_kind"]);
    for &(v, r) in &curve.samples {
        out.row(vec![num(v), num(r), kind.name().into()]);
    }
    out.json = json!({
        "axis": curve.axis,
        "bound_kind": kind,
        "samples": curve.samples.iter().map(|(v, r)| json!([v, num(*r)])).collect::<Vec<_>>(),
    });
    Ok(out)
}

/// `x = (s + k) mod |X|`, rows indexed by `s·|K| + k`.
fn shift_map(ns: usize, nx: usize, nk: usize) -> Result<Channel, CliError> {
    if ns != nx {
        return Err(CliError::Config(
            "the default uncoded map needs |X| = |S|; pass --set map=[[...]]".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..ns * nk)
        .map(|row| {
            let mut r = vec![0.0; nx];
            r[(row / nk + row % nk) % nx] = 1.0;
            r
        })
        .collect();
    Ok(Channel::new(&rows)?)
}

fn attacks(x: &Extras) -> Result<Vec<AttackSpec>, CliError> {
    let Some(raw) = x.str("attacks") else {
        return Ok(Vec::new());
    };
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (name, rate) = item.trim().split_once('@').ok_or_else(|| {
                CliError::Config(format!("attacks: expected strategy@rate, got {item:?}"))
            })?;
            let rate = rate
                .parse()
                .map_err(|_| CliError::Config(format!("attacks: bad rate in {item:?}")))?;
            Ok(AttackSpec {
                strategy: name.parse()?,
                rate,
            })
        })
        .collect()
}

fn sim_output(rep: &SimReport) -> Output {
    let mut out = Output::new(&[
        "attack", "trials", "mean_d_b", "d_e_q10", "d_e_q50", "d_e_q90", "success",
    ]);
    let rows = rep.summary();
    if rows.is_empty() {
        let mean = rep.mean_legit_distortion();
        out.row(vec![
            String::new(),
            rep.trials.to_string(),
            num(mean),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for r in rows {
        out.row(vec![
            r.attack,
            r.trials.to_string(),
            num(r.mean_d_b),
            num(r.d_e_q10),
            num(r.d_e_q50),
            num(r.d_e_q90),
            num(r.success),
        ]);
    }
    // wall-clock time is left out so reruns are byte-identical
    let mut json = json_of(rep);
    if let Value::Object(map) = &mut json {
        map.remove("timing");
    }
    out.json = json;
    out
}

fn simulate(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    let m: usize = x.need("m")?;
    match need_spec(spec)? {
        Spec::Gaussian(g) => {
            x.only(&["m", "power", "delta"])?;
            let run = gaussian_uncoded_run(
                &g,
                x.or("power", g.p)?,
                m,
                job.trials,
                job.seed,
                x.get("delta")?,
            )?;
            let mut out = Output::new(&["trials", "m", "mean_d_b", "mean_d_e"]);
            out.row(vec![
                job.trials.to_string(),
                m.to_string(),
                num(run.mean_legit()),
                num(run.mean_wiretap()),
            ]);
            out.json = json!({ "trials": job.trials, "m": m, "mean_d_b": run.mean_legit(), "mean_d_e": run.mean_wiretap(), "run": json_of(&run) });
            Ok(out)
        }
        Spec::Dm(sys) => {
            let cfg = RunConfig {
                trials: job.trials,
                seed: job.seed,
                attacks: attacks(&x)?,
                de: x.or("de", 0.0)?,
                posterior_samples: x.or("posterior_samples", 256)?,
            };
            let rep = match x.str("scheme").unwrap_or("uncoded") {
                "uncoded" => {
                    x.only(&["m", "scheme", "attacks", "de", "posterior_samples", "map"])?;
                    let nk = ((sys.rk.exp2() + 1e-9).floor() as usize).max(1);
                    let map = match x.matrix("map")? {
                        Some(rows) => Channel::new(&rows)?,
                        None => {
                            shift_map(sys.source.pmf.alphabet_size(), sys.channel.inputs(), nk)?
                        }
                    };
                    uncoded_run(&sys, &map, m, &cfg)?
                }
                "separate" => {
                    x.only(&[
                        "m",
                        "scheme",
                        "attacks",
                        "de",
                        "posterior_samples",
                        "test_channel",
                        "epsilon",
                    ])?;
                    let test = Channel::new(&x.matrix("test_channel")?.ok_or_else(|| {
                        CliError::Config("separate scheme needs --set test_channel=[[...]]".into())
                    })?)?;
                    let px =
                        channel_capacity(sys.channel.margin_y(), &solver(job))?.achieving_input;
                    // codebook streams sit far from the trial streams of the run seed
                    let scheme = SeparateScheme::new(
                        &sys,
                        &test,
                        &Auxiliary::single_layer(px),
                        x.or("epsilon", 0.05)?,
                        m,
                        job.seed.wrapping_add(1 << 32),
                        DEFAULT_MEMORY_CAP,
                    )?;
                    scheme.run(&cfg)?
                }
                other => {
                    return Err(CliError::Config(format!(
                        "scheme: expected uncoded or separate, got {other:?}"
                    )))
                }
            };
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            Ok(sim_output(&rep))
        }
    }
}

fn verify_example(job: &JobConfig, spec: Option<Spec>) -> Result<Dispatched, CliError> {
    Extras(&job.extra).only(&[])?;
    let sys = match spec {
        Some(s) => need_dm(Some(s), "verify-example")?,
        None => need_dm(
            Some(crate::parse_system_spec(EXAMPLE_SPEC)?),
            "verify-example",
        )?,
    };
    let engine = DmEngine::new(&sys, &search(job))?;
    let b = engine.lossy_bounds(EXAMPLE_DB, EXAMPLE_DE, true)?;
    let unc = engine.unc(EXAMPLE_DB, EXAMPLE_DE)?;
    let ordered = unc > b.sep + EXAMPLE_TOL && (unc - b.outer).abs() <= EXAMPLE_TOL;
    let checks = [
        ("r_l_sep", b.sep, EXAMPLE_SEP),
        ("r_l_unc", unc, EXAMPLE_UNC),
        ("r_l_outer", b.outer, EXAMPLE_UNC),
    ];
    let close = checks.iter().all(|(_, v, e)| (v - e).abs() <= EXAMPLE_TOL);
    let mut out = Output::new(&["quantity", "value", "expected"]);
    for (name, v, e) in checks {
        out.row(vec![name.into(), num(v), num(e)]);
    }
    out.json = json!({
        "db": EXAMPLE_DB,
        "de": EXAMPLE_DE,
        "r_l_sep": b.sep,
        "r_l_unc": unc,
        "r_l_outer": b.outer,
        "tolerance": EXAMPLE_TOL,
        "uncoded_beats_separate": ordered,
        "passed": close && ordered,
    });
    let verdict = if close && ordered {
        Ok(())
    } else {
        Err(CliError::Core(Error::SolverFault(format!(
            "example not reproduced: sep {:.5}, unc {unc:.5}, outer {:.5}",
            b.sep, b.outer
        ))))
    };
    Ok((out, verdict))
}

fn tilted(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    match need_spec(spec)? {
        Spec::Dm(sys) => {
            x.only(&["d", "distortion"])?;
            let prof = tilted_profile(
                &sys.source.pmf,
                distortion(&sys, &x, "b")?,
                x.need("d")?,
                &solver(job),
            )?;
            let mut out = Output::new(&["symbol", "prob", "tilted"]);
            for (s, (p, j)) in sys.source.pmf.probs().iter().zip(&prof.values).enumerate() {
                out.row(vec![s.to_string(), num(*p), num(*j)]);
            }
            out.json = json_of(&prof);
            Ok(out)
        }
        Spec::Gaussian(g) => {
            x.only(&["d", "s"])?;
            let d: f64 = x.need("d")?;
            let points: Vec<f64> = x.list("s")?;
            let mut out = Output::new(&["s", "tilted"]);
            let mut values = Vec::new();
            for &s in &points {
                let j = gaussian_d_tilted(g.ns, d, s)?;
                out.row(vec![num(s), num(j)]);
                values.push(json!([s, j]));
            }
            out.json = json!({ "d": d, "values": values });
            Ok(out)
        }
    }
}

fn oracle(job: &JobConfig, spec: Option<Spec>) -> Result<Output, CliError> {
    let x = Extras(&job.extra);
    x.only(&["d", "rate", "m", "mode", "given", "distortion"])?;
    let sys = need_dm(spec, "oracle")?;
    let joint = side_joint(&sys, &x)?;
    let dm = distortion(&sys, &x, "e")?;
    let d: f64 = x.need("d")?;
    let mode = x.str("mode").unwrap_or("auto");
    if !matches!(mode, "auto" | "exhaustive" | "greedy") {
        return Err(CliError::Config(format!(
            "mode: expected auto, exhaustive or greedy, got {mode:?}"
        )));
    }
    let rates: Vec<f64> = x.list("rate")?;
    let ms: Vec<usize> = x.list("m")?;
    let cells: Vec<(usize, f64)> = ms
        .iter()
        .flat_map(|&m| rates.iter().map(move |&r| (m, r)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(m, r)| match mode {
            "greedy" => optimal_henchman_code_oracle(&joint, dm, d, r, m, OracleMode::Greedy),
            "exhaustive" => {
                optimal_henchman_code_oracle(&joint, dm, d, r, m, OracleMode::Exhaustive)
            }
            _ => match optimal_henchman_code_oracle(&joint, dm, d, r, m, OracleMode::Exhaustive) {
                Err(Error::CapExceeded(_)) => {
                    optimal_henchman_code_oracle(&joint, dm, d, r, m, OracleMode::Greedy)
                }
                other => other,
            },
        })
        .collect::<Result<_, _>>()?;
    let mut out = Output::new(&["m", "rate", "list_size", "coverage_prob", "method"]);
    for r in &results {
        let method = match r.method {
            OracleMode::Exhaustive => "exhaustive",
            OracleMode::Greedy => "greedy",
        };
        out.row(vec![
            r.m.to_string(),
            num(r.rate),
            r.list_size.to_string(),
            num(r.coverage_prob),
            method.into(),
        ]);
    }
    out.json = json!({ "d": d, "results": json_of(&results) });
    Ok(out)
}

pub(crate) fn dispatch(job: &JobConfig, spec: Option<Spec>) -> Result<Dispatched, CliError> {
    let plain = |r: Result<Output, CliError>| r.map(|o| (o, Ok(())));
    match job.command {
        Command::Capacity => plain(capacity(job, spec)),
        Command::Rd => plain(rd(job, spec)),
        Command::Crd => plain(crd(job, spec)),
        Command::Gamma1 => plain(gamma(job, spec, false)),
        Command::Gamma2 => plain(gamma(job, spec, true)),
        Command::Region => region(job, spec),
        Command::Sweep => plain(sweep(job, spec)),
        Command::Simulate => plain(simulate(job, spec)),
        Command::VerifyExample => verify_example(job, spec),
        Command::Tilted => plain(tilted(job, spec)),
        Command::Oracle => plain(oracle(job, spec)),
    }
}

//! JSON system specs.
//!
//! Discrete: `{"kind":"dm","source":{"pmf","dB","dE"},"channel":{"pyx","pzx","pyzx"?},"gamma","rk"}`.
//! Gaussian: `{"kind":"gaussian","ns","p","nb","ne","gamma","rk"}`. Distortion entries
//! accept the string `"inf"`.

use crate::CliError;
use secrecy_core::prob::PMF_TOL;
use secrecy_core::regions::{GaussianSpec, SourceSpec, SystemSpec};
use secrecy_core::{Channel, DistortionMatrix, JointPmf, Pmf, WiretapChannel};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Spec {
    Dm(SystemSpec),
    Gaussian(GaussianSpec),
}

fn bad(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{path}: {msg}"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, name: &str) -> Result<&'a Value, CliError> {
    obj.get(name)
        .ok_or_else(|| bad(&join(path, name), "missing field"))
}

fn join(path: &str, name: &str) -> String {
    if path.is_empty() {
        name.to_string()
    } else {
        format!("{path}.{name}")
    }
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(bad(&join(path, k), "unknown field")),
        None => Ok(()),
    }
}

fn number(v: &Value, path: &str, allow_inf: bool) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| bad(path, "not a finite number")),
        Value::String(s) if allow_inf && s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "inf" => Err(bad(path, "\"inf\" is not allowed here")),
        _ => Err(bad(path, format!("expected a number, got {v}"))),
    }
}

fn vector(v: &Value, path: &str, allow_inf: bool) -> Result<Vec<f64>, CliError> {
    let arr = v.as_array().ok_or_else(|| bad(path, "expected an array"))?;
    if arr.is_empty() {
        return Err(bad(path, "empty array"));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]"), allow_inf))
        .collect()
}

fn matrix(v: &Value, path: &str, allow_inf: bool) -> Result<Vec<Vec<f64>>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(path, "expected an array of rows"))?;
    if arr.is_empty() {
        return Err(bad(path, "no rows"));
    }
    let rows: Vec<Vec<f64>> = arr
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{path}[{i}]"), allow_inf))
        .collect::<Result<_, _>>()?;
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(bad(path, "rows differ in length"));
    }
    Ok(rows)
}

fn pmf(v: &Value, path: &str) -> Result<Pmf, CliError> {
    let p = vector(v, path, false)?;
    if let Some(i) = p.iter().position(|x| *x < 0.0) {
        return Err(bad(&format!("{path}[{i}]"), "negative mass"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PMF_TOL {
        return Err(bad(path, format!("pmf sum is {sum}, expected 1")));
    }
    Pmf::new(p).map_err(|e| bad(path, e))
}

fn channel(v: &Value, path: &str) -> Result<Channel, CliError> {
    let rows = matrix(v, path, false)?;
    for (i, r) in rows.iter().enumerate() {
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > PMF_TOL {
            return Err(bad(
                &format!("{path}[{i}]"),
                format!("pmf sum is {sum}, expected 1"),
            ));
        }
    }
    Channel::new(&rows).map_err(|e| bad(path, e))
}

fn distortion(v: &Value, path: &str) -> Result<DistortionMatrix, CliError> {
    DistortionMatrix::new(&matrix(v, path, true)?).map_err(|e| bad(path, e))
}

fn scalar(
    obj: &Map<String, Value>,
    path: &str,
    name: &str,
    allow_inf: bool,
) -> Result<f64, CliError> {
    number(field(obj, path, name)?, &join(path, name), allow_inf)
}

fn parse_dm(root: &Map<String, Value>) -> Result<SystemSpec, CliError> {
    check_keys(root, "", &["kind", "source", "channel", "gamma", "rk"])?;
    let src = object(field(root, "", "source")?, "source")?;
    check_keys(src, "source", &["pmf", "dB", "dE"])?;
    let source = SourceSpec {
        pmf: pmf(field(src, "source", "pmf")?, "source.pmf")?,
        d_b: distortion(field(src, "source", "dB")?, "source.dB")?,
        d_e: distortion(field(src, "source", "dE")?, "source.dE")?,
    };
    let ch = object(field(root, "", "channel")?, "channel")?;
    check_keys(ch, "channel", &["pyx", "pzx", "pyzx"])?;
    let pyx = channel(field(ch, "channel", "pyx")?, "channel.pyx")?;
    let pzx = channel(field(ch, "channel", "pzx")?, "channel.pzx")?;
    let wiretap = match ch.get("pyzx") {
        None | Some(Value::Null) => WiretapChannel::new(pyx, pzx),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| bad("channel.pyzx", "expected one |Y|x|Z| matrix per input"))?;
            let joints = arr
                .iter()
                .enumerate()
                .map(|(x, m)| {
                    let path = format!("channel.pyzx[{x}]");
                    let rows = matrix(m, &path, false)?;
                    JointPmf::from_matrix(&rows).map_err(|e| bad(&path, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            WiretapChannel::with_joint(pyx, pzx, joints)
        }
    }
    .map_err(|e| bad("channel", e))?;
    let sys = SystemSpec {
        source,
        channel: wiretap,
        gamma: scalar(root, "", "gamma", false)?,
        rk: scalar(root, "", "rk", false)?,
    };
    sys.validate()
        .map_err(|e| CliError::Schema(e.to_string()))?;
    Ok(sys)
}

fn parse_gaussian(root: &Map<String, Value>) -> Result<GaussianSpec, CliError> {
    check_keys(root, "", &["kind", "ns", "p", "nb", "ne", "gamma", "rk"])?;
    let g = GaussianSpec {
        ns: scalar(root, "", "ns", false)?,
        p: scalar(root, "", "p", false)?,
        nb: scalar(root, "", "nb", false)?,
        ne: scalar(root, "", "ne", false)?,
        gamma: scalar(root, "", "gamma", false)?,
        rk: scalar(root, "", "rk", false)?,
    };
    g.validate().map_err(|e| CliError::Schema(e.to_string()))?;
    Ok(g)
}

pub fn parse_system_spec(json_text: &str) -> Result<Spec, CliError> {
    let v: Value = serde_json::from_str(json_text)
        .map_err(|e| CliError::Schema(format!("malformed JSON: {e}")))?;
    let root = object(&v, "spec")?;
    match field(root, "", "kind")?.as_str() {
        Some("dm") => parse_dm(root).map(Spec::Dm),
        Some("gaussian") => parse_gaussian(root).map(Spec::Gaussian),
        _ => Err(bad("kind", "expected \"dm\" or \"gaussian\"")),
    }
}

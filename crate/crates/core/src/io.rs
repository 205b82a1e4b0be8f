//! Text formats shared by the library and the command line.
//!
//! A pmf is written as JSON `{"pmf": [p0, p1, …]}` or as CSV with one
//! probability per line. Floats are written with 12 significant digits.
//! Readers accept sub-stochastic vectors so truncated laws survive a round
//! trip.

use crate::error::{Error, Result};
use crate::families;
use crate::pmf::{FinitePmf, TailReport};
use crate::tolerance::Tolerances;

/// Default truncation point for infinite-support shorthands.
pub const DEFAULT_N_MAX: usize = 200;

/// `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn format_sig12(x: f64) -> String {
    let r = sig12(x);
    if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Recursively rounds every number in a JSON value to 12 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(sig12(f)) {
                    *n = r;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

fn probs_to_pmf(probs: Vec<f64>, tol: &Tolerances) -> Result<FinitePmf> {
    FinitePmf::with_tolerance(probs.clone(), tol).or_else(|e| match FinitePmf::sub_stochastic(probs) {
        Ok(p) => Ok(p),
        Err(_) => Err(e),
    })
}

pub fn pmf_from_json(text: &str) -> Result<FinitePmf> {
    pmf_from_json_with(text, &Tolerances::default())
}

pub fn pmf_from_json_with(text: &str, tol: &Tolerances) -> Result<FinitePmf> {
    #[derive(serde::Deserialize)]
    struct Repr {
        pmf: Vec<f64>,
    }
    let r: Repr = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    probs_to_pmf(r.pmf, tol)
}

pub fn pmf_from_csv(text: &str) -> Result<FinitePmf> {
    pmf_from_csv_with(text, &Tolerances::default())
}

pub fn pmf_from_csv_with(text: &str, tol: &Tolerances) -> Result<FinitePmf> {
    let probs = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a probability: '{l}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    probs_to_pmf(probs, tol)
}

/// JSON if the text starts with `{`, CSV otherwise.
pub fn pmf_from_str(text: &str) -> Result<FinitePmf> {
    pmf_from_str_with(text, &Tolerances::default())
}

pub fn pmf_from_str_with(text: &str, tol: &Tolerances) -> Result<FinitePmf> {
    if text.trim_start().starts_with('{') {
        pmf_from_json_with(text, tol)
    } else {
        pmf_from_csv_with(text, tol)
    }
}

pub fn pmf_to_json(pmf: &FinitePmf) -> String {
    let probs: Vec<f64> = pmf.probs().iter().map(|&p| sig12(p)).collect();
    serde_json::json!({ "pmf": probs }).to_string()
}

pub fn pmf_to_csv(pmf: &FinitePmf) -> String {
    pmf.probs().iter().map(|&p| format_sig12(p) + "\n").collect()
}

fn numbers(args: &str) -> Result<Vec<f64>> {
    if args.trim().is_empty() {
        return Ok(Vec::new());
    }
    args.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a number: '{s}'")))
        })
        .collect()
}

fn count(x: f64, name: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(Error::Parse(format!("{name} must be a nonnegative integer, got {x}")))
    }
}

/// Named distribution shorthand such as `uniform:6`, `binomial:5,0.3`,
/// `sibuya:0.5,1000` or `pmf:0.2,0.3,0.5`. Truncated laws come with their
/// tail report.
pub fn parse_dist(spec: &str) -> Result<(FinitePmf, Option<TailReport>)> {
    parse_dist_with(spec, DEFAULT_N_MAX)
}

/// [`parse_dist`] with a different truncation point for shorthands that
/// leave `n_max` out.
pub fn parse_dist_with(spec: &str, default_n_max: usize) -> Result<(FinitePmf, Option<TailReport>)> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let v = numbers(args)?;
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if (lo..=hi).contains(&v.len()) {
            Ok(())
        } else {
            Err(Error::Parse(format!("'{name}' takes {lo}..={hi} argument(s), got {}", v.len())))
        }
    };
    let n_max = |i: usize| -> Result<usize> { v.get(i).map_or(Ok(default_n_max), |&x| count(x, "n_max")) };
    match name.trim().to_ascii_lowercase().as_str() {
        "uniform" => {
            arity(1, 1)?;
            Ok((families::discrete_uniform(count(v[0], "n")?), None))
        }
        "binomial" => {
            arity(2, 2)?;
            Ok((families::binomial(count(v[0], "n")?, v[1])?, None))
        }
        "bernoulli" => {
            arity(1, 1)?;
            Ok((families::bernoulli(v[0])?, None))
        }
        "geometric" => {
            arity(2, 2)?;
            Ok((families::conditional_geometric(v[0], count(v[1], "m")?)?, None))
        }
        "point" => {
            arity(1, 1)?;
            Ok((FinitePmf::point_mass(count(v[0], "k")?), None))
        }
        "sibuya" => {
            arity(1, 2)?;
            let (p, t) = families::truncated_sibuya(v[0], n_max(1)?)?;
            Ok((p, Some(t)))
        }
        "poisson" => {
            arity(1, 2)?;
            let (p, t) = families::poisson(v[0], n_max(1)?)?;
            Ok((p, Some(t)))
        }
        "pmf" => Ok((FinitePmf::new(v)?, None)),
        other => Err(Error::Parse(format!("unknown distribution '{other}'"))),
    }
}

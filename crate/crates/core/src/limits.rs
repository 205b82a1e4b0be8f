//! Exact convergence harnesses for the thinning limit theorems.
//!
//! Each harness computes the finite-`n` law exactly and reports its total
//! variation distance to the limit. Limits with infinite support are
//! truncated; the truncated mass is reported next to every distance, and the
//! true distance lies in `[tv, tv + tail]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{truncated_mixed_poisson_to_tail, truncated_sibuya};
use crate::io::{format_sig12, round_json};
use crate::mixing::{b_n_violation, mix_binomial_with, MixingDistribution};
use crate::par::{self, Exec};
use crate::pmf::{convolve_power, thin, tv_distance, zero_truncate, FinitePmf};
use crate::tolerance::Tolerances;

/// Target tail mass for Poisson and negative binomial limits.
pub const LIMIT_TAIL: f64 = 1e-10;
const LIMIT_SEARCH: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub tv: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub limit: String,
    #[serde(skip)]
    pub limit_pmf: FinitePmf,
    pub points: Vec<ConvergencePoint>,
    pub monotone_tail: bool,
    /// Largest gap between thin-then-convolve and convolve-then-thin, when
    /// the harness checks it.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_commutation_gap: Option<f64>,
}

impl ConvergenceReport {
    fn new(limit: String, limit_pmf: FinitePmf, points: Vec<ConvergencePoint>) -> Self {
        let distances: Vec<f64> = points.iter().map(|p| p.tv).collect();
        ConvergenceReport {
            limit,
            limit_pmf,
            monotone_tail: eventually_nonincreasing(&distances),
            points,
            max_commutation_gap: None,
        }
    }

    pub fn distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tv).collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.points.iter().filter_map(|p| p.n).collect()
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_json(&mut v);
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha,tv,tail\n");
        for p in &self.points {
            let n = p.n.map(|n| n.to_string()).unwrap_or_default();
            let a = p.alpha.map(format_sig12).unwrap_or_default();
            out.push_str(&format!("{n},{a},{},{}\n", format_sig12(p.tv), format_sig12(p.tail)));
        }
        out
    }
}

/// Nonincreasing from the largest distance onward.
fn eventually_nonincreasing(d: &[f64]) -> bool {
    let Some(peak) = d
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
    else {
        return true;
    };
    d[peak.0..].windows(2).all(|w| w[1] <= w[0])
}

/// Declarative scaling sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `a_n = lambda / n`
    Reciprocal { lambda: f64 },
    /// `a_n = slope·n + offset`
    Affine { slope: f64, offset: f64 },
    /// Explicit `(n, a_n)` pairs.
    Table { values: Vec<(usize, f64)> },
}

impl SequenceSpec {
    pub fn at(&self, n: usize) -> Result<f64> {
        match self {
            SequenceSpec::Reciprocal { lambda } => Ok(lambda / n as f64),
            SequenceSpec::Affine { slope, offset } => Ok(slope * n as f64 + offset),
            SequenceSpec::Table { values } => values
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, a)| *a)
                .ok_or_else(|| Error::Parse(format!("no a_n entry for n = {n}"))),
        }
    }

    /// `lim n·a_n` where the spec determines it.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            SequenceSpec::Reciprocal { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parse("ns must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Poisson approximation for row sums: `a_n∘S_n` with `S_n` the sum of `n`
/// copies of `x1n(n)`, compared to `N(mu)`, `mu = λ·E X`.
pub fn poisson_approximation_with<X, A>(x1n: X, a_n: A, mu: f64, ns: &[usize], exec: Exec) -> Result<ConvergenceReport>
where
    X: Fn(usize) -> FinitePmf + Sync + Send,
    A: Fn(usize) -> f64 + Sync + Send,
{
    check_ns(ns)?;
    let w = MixingDistribution::point_mass(mu)?;
    let (limit, tail) = truncated_mixed_poisson_to_tail(&w, LIMIT_TAIL, LIMIT_SEARCH)?;
    let rows = par::map_with(exec, ns, |&n| -> Result<(ConvergencePoint, f64)> {
        let x = x1n(n);
        let a = a_n(n);
        let thinned = thin(&convolve_power(&x, n), a)?;
        let other = convolve_power(&thin(&x, a)?, n);
        let gap = thinned.max_abs_diff(&other);
        let point = ConvergencePoint {
            n: Some(n),
            alpha: Some(a),
            tv: tv_distance(&thinned, &limit),
            tail: tail.tail_mass,
        };
        Ok((point, gap))
    });
    let mut points = Vec::with_capacity(ns.len());
    let mut gap = 0.0f64;
    for r in rows {
        let (p, g) = r?;
        points.push(p);
        gap = gap.max(g);
    }
    let mut report = ConvergenceReport::new(format!("poisson({mu})"), limit, points);
    report.max_commutation_gap = Some(gap);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    /// Law of each summand (fixed in `n`).
    pub x: FinitePmf,
    pub a_n: SequenceSpec,
    /// `lim n·a_n`; taken from `a_n` when it is reciprocal.
    #[serde(default)]
    pub lambda: Option<f64>,
    pub ns: Vec<usize>,
}

pub fn poisson_approximation(spec: &PoissonSpec, exec: Exec) -> Result<ConvergenceReport> {
    let lambda = spec
        .lambda
        .or_else(|| spec.a_n.lambda())
        .ok_or_else(|| Error::Parse("lambda is required unless a_n is reciprocal".into()))?;
    for &n in &spec.ns {
        spec.a_n.at(n)?;
    }
    let mu = lambda * spec.x.mean();
    poisson_approximation_with(
        |_| spec.x.clone(),
        |n| spec.a_n.at(n).expect("checked above"),
        mu,
        &spec.ns,
        exec,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub w: MixingDistribution,
    pub a_n: SequenceSpec,
    pub ns: Vec<usize>,
}

/// `(W/a_n)∘n` against the mixed Poisson law `N(W)`.
pub fn mixture_limit(spec: &MixtureSpec, exec: Exec) -> Result<ConvergenceReport> {
    mixture_limit_with(spec, exec, &Tolerances::default())
}

pub fn mixture_limit_with(spec: &MixtureSpec, exec: Exec, tol: &Tolerances) -> Result<ConvergenceReport> {
    check_ns(&spec.ns)?;
    let mut scaled = Vec::with_capacity(spec.ns.len());
    let mut infeasible = Vec::new();
    for &n in &spec.ns {
        let a = spec.a_n.at(n)?;
        if !(a > 0.0 && a.is_finite()) {
            infeasible.push((n, a));
            continue;
        }
        scaled.push((n, a, spec.w.scaled(1.0 / a)));
    }
    let checks = par::map_with(exec, &scaled, |(n, _, w)| b_n_violation(w, *n, tol));
    infeasible.extend(
        scaled
            .iter()
            .zip(&checks)
            .filter(|(_, c)| c.is_some())
            .map(|((n, a, _), _)| (*n, *a)),
    );
    if !infeasible.is_empty() {
        infeasible.sort_by_key(|p| p.0);
        return Err(Error::Infeasible(infeasible));
    }
    let (limit, tail) = truncated_mixed_poisson_to_tail(&spec.w, LIMIT_TAIL, LIMIT_SEARCH)?;
    let rows = par::map_with(exec, &scaled, |(n, a, w)| -> Result<ConvergencePoint> {
        let p = mix_binomial_with(w, *n, tol)?;
        Ok(ConvergencePoint {
            n: Some(*n),
            alpha: Some(1.0 / a),
            tv: tv_distance(&p, &limit),
            tail: tail.tail_mass,
        })
    });
    let points = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(
        format!("mixed_poisson({})", family_label(&spec.w)),
        limit,
        points,
    ))
}

fn family_label(w: &MixingDistribution) -> String {
    serde_json::to_string(w).unwrap_or_else(|_| format!("{w:?}"))
}

/// Law whose zero-truncated thinnings are examined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruncatedTarget {
    /// Bounded law with finite mean; the limit is the point mass at one.
    Bounded { pmf: FinitePmf },
    /// `Sibuya(gamma)` truncated at `n_max`; the limit is itself.
    Sibuya { gamma: f64, n_max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSpec {
    pub x: TruncatedTarget,
    pub alphas: Vec<f64>,
}

/// `(α∘X)₀` as `α` decreases.
pub fn truncated_thinning_limit(spec: &TruncatedSpec, exec: Exec) -> Result<ConvergenceReport> {
    if spec.alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parse("alphas must be strictly decreasing".into()));
    }
    let (x, limit, tail, label) = match &spec.x {
        TruncatedTarget::Bounded { pmf } => (pmf.clone(), FinitePmf::point_mass(1), 0.0, "point_mass(1)".to_string()),
        TruncatedTarget::Sibuya { gamma, n_max } => {
            let (s, tail) = truncated_sibuya(*gamma, *n_max)?;
            (s.clone(), s, tail.tail_mass, format!("sibuya({gamma}, n_max = {n_max})"))
        }
    };
    if x.get(0) >= x.mass() {
        return Err(Error::Degenerate("x is concentrated at zero"));
    }
    let rows = par::map_with(exec, &spec.alphas, |&a| -> Result<ConvergencePoint> {
        let z = zero_truncate(&thin(&x, a)?)?;
        Ok(ConvergencePoint {
            n: None,
            alpha: Some(a),
            tv: tv_distance(&z, &limit),
            tail,
        })
    });
    let points = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(label, limit, points))
}

//! Inverse thinning on bounded support and the minimal thinning parameter.
//!
//! For `X` of degree `n` and `α ∈ (0, 1]`, `X ~ α∘Z` for some `Z` iff every
//!
//! ```text
//! p*_j(α) = Σ_{k=j}^{n} C(k,j) α^{-k} (α-1)^{k-j} p_k
//! ```
//!
//! is nonnegative, in which case `P(Z = j) = p*_j(α)`. The feasible set of
//! `α` is an interval `[ρ(X), 1]`, so `ρ(X)` is located by bisection on the
//! sign test. A law with a hole in its support has `ρ = 1`, and for bounded
//! support the converse holds too.

use serde::{Deserialize, Serialize};

use crate::error::{check_half_open_unit, Error, Result};
use crate::mixing::bisect_feasible;
use crate::numeric::{choose, CompensatedSum};
use crate::pmf::{find_holes_with, FinitePmf};
use crate::tolerance::Tolerances;

/// Coordinates closer to zero than this (relative to the term scale) are
/// treated as ties when the witness is built.
const WITNESS_TIE: f64 = 1e-10;

/// `q[j] = α^n p*_j(α)`, kept polynomial in `α` so nothing blows up as
/// `α → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarCoefficients {
    pub alpha: f64,
    pub q: Vec<f64>,
    /// `Σ_k |term|` for each `j`; the rounding scale of `q[j]`.
    pub magnitude: Vec<f64>,
}

impl StarCoefficients {
    /// `p*_j(α) = q[j] / α^n`.
    pub fn p_star(&self) -> Vec<f64> {
        let n = self.q.len() as i32 - 1;
        let an = self.alpha.powi(n);
        self.q.iter().map(|q| q / an).collect()
    }

    fn most_negative(&self) -> (usize, f64) {
        self.q
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best })
    }

    /// Slack allowed below zero at coordinate `j`: `eps_sign` relative to
    /// `max |q|`, or to the coordinate's own term magnitude when that is
    /// smaller, plus the rounding error of the sum that produced `q[j]`.
    fn slack(&self, j: usize, tol: &Tolerances) -> f64 {
        let top = self.q.iter().fold(0.0f64, |m, q| m.max(q.abs()));
        let rounding = 4.0 * (self.q.len() + 1) as f64 * f64::EPSILON * self.magnitude[j];
        tol.eps_sign * top.min(self.magnitude[j]) + rounding
    }

    fn admissible(&self, tol: &Tolerances) -> bool {
        (0..self.q.len()).all(|j| self.q[j] >= -self.slack(j, tol))
    }
}

pub fn star_coefficients(pmf: &FinitePmf, alpha: f64) -> Result<StarCoefficients> {
    check_half_open_unit("alpha", alpha)?;
    let p = pmf.probs();
    let n = pmf.degree();
    let alpha_pow: Vec<f64> = (0..=n).map(|i| alpha.powi(i as i32)).collect();
    let gap_pow: Vec<f64> = (0..=n).map(|i| (alpha - 1.0).powi(i as i32)).collect();
    let mut q = Vec::with_capacity(n + 1);
    let mut magnitude = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = CompensatedSum::new();
        let mut mag = 0.0;
        let mut c = 1.0; // C(k, j), starting at k = j
        for k in j..=n {
            if k > j {
                c = if k <= 60 {
                    choose(k as u64, j as u64)
                } else {
                    c * k as f64 / (k - j) as f64
                };
            }
            let t = c * alpha_pow[n - k] * gap_pow[k - j] * p[k];
            acc.add(t);
            mag += t.abs();
        }
        q.push(acc.value());
        magnitude.push(mag);
    }
    Ok(StarCoefficients { alpha, q, magnitude })
}

/// Whether `X ~ α∘Z` for some nonnegative integer `Z`.
pub fn is_member(pmf: &FinitePmf, alpha: f64) -> Result<bool> {
    is_member_with(pmf, alpha, &Tolerances::default())
}

pub fn is_member_with(pmf: &FinitePmf, alpha: f64, tol: &Tolerances) -> Result<bool> {
    Ok(star_coefficients(pmf, alpha)?.admissible(tol))
}

/// How `ρ(X)` was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMethod {
    ZeroConstant,
    Hole,
    ClosedFormN2,
    Bisection,
}

impl std::fmt::Display for RhoMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RhoMethod::ZeroConstant => "zero_constant",
            RhoMethod::Hole => "hole",
            RhoMethod::ClosedFormN2 => "closed_form_n2",
            RhoMethod::Bisection => "bisection",
        };
        f.write_str(s)
    }
}

/// `ρ(X)` with the witness `Z` satisfying `X ~ ρ∘Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub rho: f64,
    pub method: RhoMethod,
    /// `None` only for the constant zero.
    #[serde(rename = "witness")]
    pub witness_z: Option<FinitePmf>,
    #[serde(rename = "tolerance")]
    pub achieved_tolerance: f64,
}

pub fn rho(pmf: &FinitePmf) -> RhoResult {
    rho_with(pmf, &Tolerances::default())
}

pub fn rho_with(pmf: &FinitePmf, tol: &Tolerances) -> RhoResult {
    if pmf.is_zero_constant() {
        return RhoResult {
            rho: 0.0,
            method: RhoMethod::ZeroConstant,
            witness_z: None,
            achieved_tolerance: 0.0,
        };
    }
    if !find_holes_with(pmf, tol).is_empty() {
        return RhoResult {
            rho: 1.0,
            method: RhoMethod::Hole,
            witness_z: Some(pmf.clone()),
            achieved_tolerance: 0.0,
        };
    }
    if pmf.degree() <= 2 {
        let rho = closed_form_rho(pmf);
        return RhoResult {
            rho,
            method: RhoMethod::ClosedFormN2,
            witness_z: Some(witness(pmf, rho, tol)),
            achieved_tolerance: f64::EPSILON * rho,
        };
    }
    rho_bisection_with(pmf, tol)
}

/// `ρ` for support in `{0, 1, 2}` without holes:
/// `1 / (1 + (p1 - sqrt(Δ⁺)) / (2 p2))` with `Δ = p1² - 4 p0 p2`, written in
/// the cancellation-free form for `Δ > 0`. Degree one gives `ρ = p1`.
pub fn closed_form_rho(pmf: &FinitePmf) -> f64 {
    let (p0, p1, p2) = (pmf.get(0), pmf.get(1), pmf.get(2));
    if pmf.degree() == 1 {
        return p1;
    }
    let delta = p1 * p1 - 4.0 * p0 * p2;
    if delta > 0.0 {
        1.0 / (1.0 + 2.0 * p0 / (p1 + delta.sqrt()))
    } else {
        1.0 / (1.0 + p1 / (2.0 * p2))
    }
}

/// `ρ(X)` by bisection on the membership test, regardless of degree.
/// Assumes a hole-free support.
pub fn rho_bisection_with(pmf: &FinitePmf, tol: &Tolerances) -> RhoResult {
    let n = pmf.degree();
    let top = pmf.get(n);
    let lower_bound = (top.ln() / n as f64).exp();
    let member = |a: f64| star_coefficients(pmf, a).map(|s| s.admissible(tol)).unwrap_or(false);
    let lo = (0.5 * lower_bound).max(f64::MIN_POSITIVE);
    if member(lo) {
        return RhoResult {
            rho: lo,
            method: RhoMethod::Bisection,
            witness_z: Some(witness(pmf, lo, tol)),
            achieved_tolerance: lo,
        };
    }
    let (below, rho) = bisect_feasible(member, lo, 1.0);
    RhoResult {
        rho,
        method: RhoMethod::Bisection,
        witness_z: Some(witness(pmf, rho, tol)),
        achieved_tolerance: rho - below,
    }
}

/// `Z` with `X ~ α∘Z` at the critical `α`: every coordinate within tie
/// tolerance of zero (including the binding one) is set to exactly zero.
fn witness(pmf: &FinitePmf, alpha: f64, tol: &Tolerances) -> FinitePmf {
    let star = star_coefficients(pmf, alpha).expect("alpha in (0, 1]");
    let n = pmf.degree();
    let (binding, _) = star.q[..n]
        .iter()
        .zip(&star.magnitude)
        .map(|(q, m)| if *m > 0.0 { q / m } else { f64::INFINITY })
        .enumerate()
        .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best });
    let ties = Tolerances {
        eps_sign: WITNESS_TIE.max(tol.eps_sign),
        ..*tol
    };
    let mut q = star.q.clone();
    for (j, v) in q.iter_mut().enumerate() {
        if *v <= star.slack(j, &ties) || (j == binding && alpha < 1.0) {
            *v = 0.0;
        }
    }
    normalise(q, pmf.mass())
}

fn normalise(q: Vec<f64>, mass: f64) -> FinitePmf {
    let total = crate::numeric::compensated_sum(q.iter().copied());
    FinitePmf::from_raw(q.into_iter().map(|v| v / total * mass).collect())
}

/// `α⁻¹∘X`: the `Z` with `X ~ α∘Z`.
pub fn unthin(pmf: &FinitePmf, alpha: f64) -> Result<FinitePmf> {
    unthin_with(pmf, alpha, &Tolerances::default())
}

pub fn unthin_with(pmf: &FinitePmf, alpha: f64, tol: &Tolerances) -> Result<FinitePmf> {
    let star = star_coefficients(pmf, alpha)?;
    if !star.admissible(tol) {
        let (index, value) = star.most_negative();
        return Err(Error::NotRepresentable {
            alpha,
            index,
            value: value / alpha.powi(pmf.degree() as i32),
        });
    }
    let q = star.q.into_iter().map(|v| v.max(0.0)).collect();
    Ok(normalise(q, pmf.mass()))
}

//! Finite-support probability mass functions and the elementary operators
//! on them: binomial thinning, convolution, zero truncation, generating
//! functions, moments, hole detection and total variation.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::numeric::{choose, ln_choose, CompensatedSum};
use crate::tolerance::Tolerances;

/// Law of a random variable on `{0, …, n}`; `probs[k] = P(X = k)`.
///
/// Trailing zeros are trimmed on construction, so `probs[degree]` is
/// positive unless the pmf is the point mass at zero (`[1]`). Pmfs produced
/// by truncating an infinite-support law may have total mass below one; the
/// deficit is the tail mass reported alongside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct FinitePmf {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfRepr {
    pmf: Vec<f64>,
}

impl TryFrom<PmfRepr> for FinitePmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        FinitePmf::new(r.pmf)
    }
}

impl From<FinitePmf> for PmfRepr {
    fn from(p: FinitePmf) -> Self {
        PmfRepr { pmf: p.probs }
    }
}

/// Mass missing from a truncated representation of an infinite-support law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub truncation_point: usize,
    pub tail_mass: f64,
}

impl TailReport {
    pub(crate) fn for_truncated(pmf: &FinitePmf, truncation_point: usize) -> Self {
        Self {
            truncation_point,
            tail_mass: (1.0 - pmf.mass()).max(0.0),
        }
    }
}

fn validate_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty probability vector".into()));
    }
    if let Some((k, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidPmf(format!("entry {k} is {p}")));
    }
    Ok(())
}

impl FinitePmf {
    /// Validated pmf with the default mass tolerance.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, &Tolerances::default())
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        validate_entries(&probs)?;
        let mass = crate::numeric::compensated_sum(probs.iter().copied());
        if (mass - 1.0).abs() > tol.eps_mass {
            return Err(Error::InvalidPmf(format!(
                "total mass {mass} differs from 1 by more than {}",
                tol.eps_mass
            )));
        }
        Ok(Self::from_raw(probs))
    }

    /// Pmf with total mass at most one (up to `eps_mass`), as produced by
    /// truncating an infinite-support law.
    pub fn sub_stochastic(probs: Vec<f64>) -> Result<Self> {
        validate_entries(&probs)?;
        let mass = crate::numeric::compensated_sum(probs.iter().copied());
        if mass > 1.0 + Tolerances::default().eps_mass || mass <= 0.0 {
            return Err(Error::InvalidPmf(format!("total mass {mass} not in (0, 1]")));
        }
        Ok(Self::from_raw(probs))
    }

    /// Trims trailing zeros; no validation.
    pub(crate) fn from_raw(mut probs: Vec<f64>) -> Self {
        while probs.len() > 1 && probs[probs.len() - 1] == 0.0 {
            probs.pop();
        }
        if probs.is_empty() {
            probs.push(0.0);
        }
        Self { probs }
    }

    /// Point mass at `k`.
    pub fn point_mass(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self { probs }
    }

    pub fn zero() -> Self {
        Self::point_mass(0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn degree(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P(X = k)`, zero beyond the support.
    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.probs.iter().copied())
    }

    pub fn is_zero_constant(&self) -> bool {
        self.probs.len() == 1
    }

    pub fn mean(&self) -> f64 {
        crate::numeric::compensated_sum(self.probs.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn variance(&self) -> f64 {
        let m = moments(self, 2);
        m[1] - m[0] * m[0]
    }

    /// Largest elementwise difference over the union support.
    pub fn max_abs_diff(&self, other: &FinitePmf) -> f64 {
        let n = self.probs.len().max(other.probs.len());
        (0..n)
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }
}

/// Binomial(k, α) probabilities written into `row[0..=k]`, anchored at the
/// mode and extended by the multiplicative recurrence in both directions.
/// Returns the index range holding nonzero values.
pub(crate) fn binomial_row(k: usize, alpha: f64, row: &mut [f64]) -> (usize, usize) {
    debug_assert!(alpha > 0.0 && alpha < 1.0 && row.len() > k);
    let mode = (((k + 1) as f64 * alpha).floor() as usize).min(k);
    let beta = 1.0 - alpha;
    let at_mode = if k <= 60 {
        choose(k as u64, mode as u64) * alpha.powi(mode as i32) * beta.powi((k - mode) as i32)
    } else {
        (ln_choose(k as u64, mode as u64) + mode as f64 * alpha.ln() + (k - mode) as f64 * beta.ln())
            .exp()
    };
    row[mode] = at_mode;
    let up = alpha / beta;
    let mut hi = mode;
    let mut v = at_mode;
    for j in mode..k {
        v *= (k - j) as f64 / (j + 1) as f64 * up;
        if v == 0.0 {
            break;
        }
        row[j + 1] = v;
        hi = j + 1;
    }
    let down = beta / alpha;
    let mut lo = mode;
    v = at_mode;
    for j in (1..=mode).rev() {
        v *= j as f64 / (k - j + 1) as f64 * down;
        if v == 0.0 {
            break;
        }
        row[j - 1] = v;
        lo = j - 1;
    }
    if k > 60 {
        // the log-gamma anchor carries O(k ln k · ε) error; the row sums to one
        let total = crate::numeric::compensated_sum(row[lo..=hi].iter().copied());
        row[lo..=hi].iter_mut().for_each(|v| *v /= total);
    }
    (lo, hi)
}

/// Law of `α∘X`: `P(α∘X = j) = Σ_{k≥j} C(k,j) α^j (1-α)^{k-j} P(X = k)`.
pub fn thin(pmf: &FinitePmf, alpha: f64) -> Result<FinitePmf> {
    check_unit("alpha", alpha)?;
    if alpha == 1.0 {
        return Ok(pmf.clone());
    }
    if alpha == 0.0 {
        return Ok(FinitePmf::from_raw(vec![pmf.mass()]));
    }
    let n = pmf.degree();
    let mut acc = vec![CompensatedSum::new(); n + 1];
    let mut row = vec![0.0; n + 1];
    for (k, &pk) in pmf.probs.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let (lo, hi) = binomial_row(k, alpha, &mut row);
        for j in lo..=hi {
            acc[j].add(pk * row[j]);
        }
    }
    Ok(FinitePmf::from_raw(acc.iter().map(|a| a.value()).collect()))
}

/// Law of `X + Y` for independent `X ~ a`, `Y ~ b`.
pub fn convolve(a: &FinitePmf, b: &FinitePmf) -> FinitePmf {
    let (na, nb) = (a.probs.len(), b.probs.len());
    let mut out = Vec::with_capacity(na + nb - 1);
    for s in 0..na + nb - 1 {
        let lo = s.saturating_sub(nb - 1);
        let hi = s.min(na - 1);
        let acc: CompensatedSum = (lo..=hi).map(|i| a.probs[i] * b.probs[s - i]).collect();
        out.push(acc.value());
    }
    FinitePmf::from_raw(out)
}

/// `times`-fold convolution power by repeated squaring.
pub fn convolve_power(pmf: &FinitePmf, times: usize) -> FinitePmf {
    let mut result = FinitePmf::zero();
    let mut base = pmf.clone();
    let mut e = times;
    while e > 0 {
        if e & 1 == 1 {
            result = convolve(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = convolve(&base, &base);
        }
    }
    result
}

fn horner(probs: &[f64], x: f64) -> f64 {
    probs.iter().rev().fold(0.0, |acc, &p| acc * x + p)
}

/// Alternate probability generating function `G_X(s) = E (1-s)^X`.
pub fn apgf(pmf: &FinitePmf, s: f64) -> f64 {
    horner(&pmf.probs, 1.0 - s)
}

/// Probability generating function `P_X(s) = E s^X`.
pub fn pgf(pmf: &FinitePmf, s: f64) -> f64 {
    horner(&pmf.probs, s)
}

/// Law of `X` conditioned on `X >= 1`: `p_k / (1 - p_0)` for `k >= 1`.
pub fn zero_truncate(pmf: &FinitePmf) -> Result<FinitePmf> {
    let denom = 1.0 - pmf.probs[0];
    if pmf.degree() == 0 || denom <= 0.0 {
        return Err(Error::Degenerate("zero truncation of a law with P(X=0) = 1"));
    }
    let mut probs: Vec<f64> = pmf.probs.iter().map(|p| p / denom).collect();
    probs[0] = 0.0;
    Ok(FinitePmf::from_raw(probs))
}

/// Raw moments `E X, …, E X^order`.
pub fn moments(pmf: &FinitePmf, order: usize) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::new(); order];
    for (k, &p) in pmf.probs.iter().enumerate() {
        let mut pow = p;
        for a in acc.iter_mut() {
            pow *= k as f64;
            a.add(pow);
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

/// Indices `h` with `P(X = h) = 0` below some positive mass, using the
/// default zero tolerance.
pub fn find_holes(pmf: &FinitePmf) -> Vec<usize> {
    find_holes_with(pmf, &Tolerances::default())
}

pub fn find_holes_with(pmf: &FinitePmf, tol: &Tolerances) -> Vec<usize> {
    let Some(top) = pmf.probs.iter().rposition(|&p| p > tol.eps_zero) else {
        return Vec::new();
    };
    (0..top).filter(|&h| pmf.probs[h] <= tol.eps_zero).collect()
}

/// Total variation distance `(1/2) Σ_k |a_k - b_k|`.
pub fn tv_distance(a: &FinitePmf, b: &FinitePmf) -> f64 {
    let n = a.probs.len().max(b.probs.len());
    0.5 * crate::numeric::compensated_sum((0..n).map(|k| (a.get(k) - b.get(k)).abs()))
}

/// Convex combination `Σ w_i p_i` of pmfs.
pub fn mixture(components: &[(f64, &FinitePmf)]) -> FinitePmf {
    let n = components.iter().map(|(_, p)| p.probs.len()).max().unwrap_or(1);
    let probs = (0..n)
        .map(|k| crate::numeric::compensated_sum(components.iter().map(|(w, p)| w * p.get(k))))
        .collect();
    FinitePmf::from_raw(probs)
}

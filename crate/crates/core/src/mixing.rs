//! Binomial mixtures `W∘n` for mixing laws with closed-form moments.
//!
//! `W∘n` has a.p.g.f. `E (1 - sW)^n` and
//! `P(W∘n = k) = C(n,k) E[W^k (1-W)^{n-k}]`. The law is proper exactly when
//! those expectations are nonnegative for the indices `k` with `n - k` odd
//! (the set `K_n`); this holds for every `W` supported in `[0, 1]` and for
//! some unbounded `W` as well (the gamma family at a large enough scale).
//!
//! `σ_n(W)` is the least `α > 0` with `W/α` admissible. For each `k ∈ K_n`
//! the polynomial `g_k(α) = E[W^k (α - W)^{n-k}]` is strictly increasing with
//! a single positive root `α_k`; `σ_n(W) = max_k α_k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_half_open_unit, check_positive, Error, Result};
use crate::numeric::{
    choose, compensated_sum, integrate, ln_beta, ln_factorial, ln_hyp1f1_positive, ln_laplace_poly,
    CompensatedSum,
};
use crate::pmf::{FinitePmf, TailReport};
use crate::tolerance::Tolerances;

/// Nonnegative mixing law `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilySpec", into = "FamilySpec")]
pub enum MixingDistribution {
    PointMass(f64),
    FiniteDiscrete { atoms: Vec<f64>, weights: Vec<f64> },
    Uniform01,
    /// Uniform on `[0, c]`.
    ScaledUniform(f64),
    Beta { a: f64, b: f64 },
    /// `c · Beta(a, b)`; the beta family is not closed under scaling.
    ScaledBeta { a: f64, b: f64, scale: f64 },
    /// Shape `shape`, rate `rate`.
    Gamma { shape: f64, rate: f64 },
    Exponential(f64),
    Erlang { stages: u32, rate: f64 },
    ChiSquare(u32),
}

/// Wire form: `{"family": "gamma", "params": [a, b]}`. Finite discrete laws
/// interleave atoms and weights: `[x1, w1, x2, w2, …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl TryFrom<FamilySpec> for MixingDistribution {
    type Error = Error;

    fn try_from(spec: FamilySpec) -> Result<Self> {
        let p = &spec.params;
        let want = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "family '{}' takes {n} parameter(s), got {}",
                    spec.family,
                    p.len()
                )))
            }
        };
        let as_count = |x: f64, name: &'static str| -> Result<u32> {
            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(Error::Domain {
                    name,
                    value: x,
                    range: "positive integers",
                })
            }
        };
        match spec.family.to_ascii_lowercase().as_str() {
            "pointmass" | "point" => {
                want(1)?;
                MixingDistribution::point_mass(p[0])
            }
            "discrete" | "finite_discrete" => {
                if p.is_empty() || !p.len().is_multiple_of(2) {
                    return Err(Error::Parse(
                        "discrete family takes interleaved atom/weight pairs".into(),
                    ));
                }
                let atoms = p.iter().step_by(2).copied().collect();
                let weights = p.iter().skip(1).step_by(2).copied().collect();
                MixingDistribution::finite_discrete(atoms, weights)
            }
            "uniform01" | "uniform" => {
                want(0)?;
                Ok(MixingDistribution::Uniform01)
            }
            "scaled_uniform" => {
                want(1)?;
                MixingDistribution::scaled_uniform(p[0])
            }
            "beta" => {
                want(2)?;
                MixingDistribution::beta(p[0], p[1])
            }
            "scaled_beta" => {
                want(3)?;
                check_positive("scale", p[2])?;
                Ok(MixingDistribution::beta(p[0], p[1])?.scaled(p[2]))
            }
            "gamma" => {
                want(2)?;
                MixingDistribution::gamma(p[0], p[1])
            }
            "exponential" | "exp" => {
                want(1)?;
                MixingDistribution::exponential(p[0])
            }
            "erlang" => {
                want(2)?;
                MixingDistribution::erlang(as_count(p[0], "stages")?, p[1])
            }
            "chisquare" | "chi2" => {
                want(1)?;
                Ok(MixingDistribution::ChiSquare(as_count(p[0], "degrees of freedom")?))
            }
            other => Err(Error::Parse(format!("unknown mixing family '{other}'"))),
        }
    }
}

impl From<MixingDistribution> for FamilySpec {
    fn from(w: MixingDistribution) -> Self {
        let (family, params) = match w {
            MixingDistribution::PointMass(c) => ("pointmass", vec![c]),
            MixingDistribution::FiniteDiscrete { atoms, weights } => (
                "discrete",
                atoms.iter().zip(&weights).flat_map(|(x, w)| [*x, *w]).collect(),
            ),
            MixingDistribution::Uniform01 => ("uniform01", vec![]),
            MixingDistribution::ScaledUniform(c) => ("scaled_uniform", vec![c]),
            MixingDistribution::Beta { a, b } => ("beta", vec![a, b]),
            MixingDistribution::ScaledBeta { a, b, scale } => ("scaled_beta", vec![a, b, scale]),
            MixingDistribution::Gamma { shape, rate } => ("gamma", vec![shape, rate]),
            MixingDistribution::Exponential(l) => ("exponential", vec![l]),
            MixingDistribution::Erlang { stages, rate } => ("erlang", vec![stages as f64, rate]),
            MixingDistribution::ChiSquare(m) => ("chisquare", vec![m as f64]),
        };
        FamilySpec {
            family: family.to_string(),
            params,
        }
    }
}

/// A signed quantity together with the magnitude of the terms that produced
/// it; sign decisions are made relative to `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signed {
    pub value: f64,
    pub scale: f64,
}

impl Signed {
    fn exact(value: f64) -> Self {
        Self {
            value,
            scale: value.abs(),
        }
    }

    fn times(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            scale: self.scale * c.abs(),
        }
    }

    /// Nonnegative up to `eps` relative to the term scale.
    pub fn is_nonneg(&self, eps: f64) -> bool {
        self.value >= -eps * self.scale
    }
}

enum Shape {
    Atoms,
    /// `scale · Beta(a, b)`; uniforms are `Beta(1, 1)`.
    Beta { a: f64, b: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl MixingDistribution {
    pub fn point_mass(c: f64) -> Result<Self> {
        if c >= 0.0 && c.is_finite() {
            Ok(Self::PointMass(c))
        } else {
            Err(Error::Domain {
                name: "point mass location",
                value: c,
                range: "[0, inf)",
            })
        }
    }

    pub fn finite_discrete(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::Parse("atoms and weights must be nonempty and of equal length".into()));
        }
        if let Some(x) = atoms.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain {
                name: "atom",
                value: *x,
                range: "[0, inf)",
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain {
                name: "weight",
                value: *w,
                range: "[0, 1]",
            });
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > Tolerances::default().eps_mass {
            return Err(Error::InvalidPmf(format!("mixing weights sum to {total}")));
        }
        let (atoms, weights) = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        Ok(Self::FiniteDiscrete { atoms, weights })
    }

    pub fn scaled_uniform(c: f64) -> Result<Self> {
        check_positive("uniform upper endpoint", c)?;
        Ok(Self::ScaledUniform(c))
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        check_positive("beta a", a)?;
        check_positive("beta b", b)?;
        Ok(Self::Beta { a, b })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        check_positive("gamma rate", rate)?;
        Ok(Self::Gamma { shape, rate })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        check_positive("exponential rate", rate)?;
        Ok(Self::Exponential(rate))
    }

    pub fn erlang(stages: u32, rate: f64) -> Result<Self> {
        if stages == 0 {
            return Err(Error::Domain {
                name: "erlang stages",
                value: 0.0,
                range: "positive integers",
            });
        }
        check_positive("erlang rate", rate)?;
        Ok(Self::Erlang { stages, rate })
    }

    pub fn chi_square(dof: u32) -> Result<Self> {
        if dof == 0 {
            return Err(Error::Domain {
                name: "chi-square degrees of freedom",
                value: 0.0,
                range: "positive integers",
            });
        }
        Ok(Self::ChiSquare(dof))
    }

    fn shape(&self) -> Shape {
        match *self {
            Self::PointMass(_) | Self::FiniteDiscrete { .. } => Shape::Atoms,
            Self::Uniform01 => Shape::Beta {
                a: 1.0,
                b: 1.0,
                scale: 1.0,
            },
            Self::ScaledUniform(c) => Shape::Beta {
                a: 1.0,
                b: 1.0,
                scale: c,
            },
            Self::Beta { a, b } => Shape::Beta { a, b, scale: 1.0 },
            Self::ScaledBeta { a, b, scale } => Shape::Beta { a, b, scale },
            Self::Gamma { shape, rate } => Shape::Gamma { shape, rate },
            Self::Exponential(rate) => Shape::Gamma { shape: 1.0, rate },
            Self::Erlang { stages, rate } => Shape::Gamma {
                shape: stages as f64,
                rate,
            },
            Self::ChiSquare(m) => Shape::Gamma {
                shape: m as f64 / 2.0,
                rate: 0.5,
            },
        }
    }

    fn atoms(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::PointMass(c) => (vec![*c], vec![1.0]),
            Self::FiniteDiscrete { atoms, weights } => (atoms.clone(), weights.clone()),
            _ => unreachable!("atoms() on a continuous family"),
        }
    }

    /// `P(W = 0) = 1`.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::PointMass(c) => *c == 0.0,
            Self::FiniteDiscrete { atoms, .. } => atoms.iter().all(|x| *x == 0.0),
            _ => false,
        }
    }

    /// Right end of the support, `None` when unbounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self.shape() {
            Shape::Atoms => Some(self.atoms().0.into_iter().fold(0.0, f64::max)),
            Shape::Beta { scale, .. } => Some(scale),
            Shape::Gamma { .. } => None,
        }
    }

    /// Raw moment `E W^m`.
    pub fn moment(&self, m: u32) -> f64 {
        match self.shape() {
            Shape::Atoms => {
                let (xs, ws) = self.atoms();
                compensated_sum(xs.iter().zip(&ws).map(|(x, w)| w * x.powi(m as i32)))
            }
            Shape::Beta { a, b, scale } => (0..m)
                .map(|r| scale * (a + r as f64) / (a + b + r as f64))
                .product(),
            Shape::Gamma { shape, rate } => (0..m).map(|r| (shape + r as f64) / rate).product(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Laplace-Stieltjes transform `E e^{-sW}` for `s >= 0`.
    pub fn lst(&self, s: f64) -> f64 {
        match self.shape() {
            Shape::Atoms => {
                let (xs, ws) = self.atoms();
                compensated_sum(xs.iter().zip(&ws).map(|(x, w)| w * (-s * x).exp()))
            }
            Shape::Beta { a, b, scale } => {
                let z = scale * s;
                (-z + ln_hyp1f1_positive(b, a + b, z)).exp()
            }
            Shape::Gamma { shape, rate } => (rate / (rate + s)).powf(shape),
        }
    }

    /// Law of `c W`. Panics unless `c` is positive and finite.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "scale factor must be positive, got {c}");
        if c == 1.0 {
            return self.clone();
        }
        match self {
            Self::PointMass(x) => Self::PointMass(x * c),
            Self::FiniteDiscrete { atoms, weights } => Self::FiniteDiscrete {
                atoms: atoms.iter().map(|x| x * c).collect(),
                weights: weights.clone(),
            },
            Self::Uniform01 => Self::ScaledUniform(c),
            Self::ScaledUniform(d) => Self::ScaledUniform(c * d),
            Self::Beta { a, b } => Self::ScaledBeta {
                a: *a,
                b: *b,
                scale: c,
            },
            Self::ScaledBeta { a, b, scale } => Self::ScaledBeta {
                a: *a,
                b: *b,
                scale: scale * c,
            },
            Self::Gamma { shape, rate } => Self::Gamma {
                shape: *shape,
                rate: rate / c,
            },
            Self::Exponential(rate) => Self::Exponential(rate / c),
            Self::Erlang { stages, rate } => Self::Erlang {
                stages: *stages,
                rate: rate / c,
            },
            Self::ChiSquare(m) => Self::Gamma {
                shape: *m as f64 / 2.0,
                rate: 0.5 / c,
            },
        }
    }

    /// `E[W^k (1-W)^{n-k}]` by the most direct route available for the
    /// family.
    pub fn binomial_weight(&self, n: usize, k: usize) -> Signed {
        assert!(k <= n);
        let m = n - k;
        match self.shape() {
            Shape::Atoms => {
                let (xs, ws) = self.atoms();
                let mut value = CompensatedSum::new();
                let mut scale = CompensatedSum::new();
                for (x, w) in xs.iter().zip(&ws) {
                    let t = w * x.powi(k as i32) * (1.0 - x).powi(m as i32);
                    value.add(t);
                    scale.add(t.abs());
                }
                Signed {
                    value: value.value(),
                    scale: scale.value(),
                }
            }
            Shape::Beta { a, b, scale: 1.0 } => Signed::exact(Self::beta_ratio(a, b, k, m)),
            Shape::Beta { a, b, scale } if a >= 1.0 && b >= 1.0 => {
                scaled_beta_weight_quadrature(a, b, scale, k, m)
            }
            Shape::Beta { .. } => self.binomial_weight_by_moments(n, k),
            Shape::Gamma { shape, rate } => gamma_weight(shape, rate, n, k, 0.0),
        }
    }

    /// `B(a+k, b+m) / B(a, b)` as a product of factors in `(0, 1]`, falling back
/// to log-gamma for long products.
fn beta_ratio(a: f64, b: f64, k: usize, m: usize) -> f64 {
    if k + m > 4096 {
        return (ln_beta(a + k as f64, b + m as f64) - ln_beta(a, b)).exp();
    }
    let mut v = 1.0;
    for i in 0..k {
        let i = i as f64;
        v *= (a + i) / (a + b + i);
    }
    for j in 0..m {
        let j = j as f64;
        v *= (b + j) / (a + b + k as f64 + j);
    }
    v
}

/// `E[W^k (1-W)^{n-k}] = Σ_i C(n-k, i) (-1)^i E W^{k+i}`, summed with
    /// compensation. Loses accuracy to cancellation as `n` grows.
    pub fn binomial_weight_by_moments(&self, n: usize, k: usize) -> Signed {
        assert!(k <= n);
        let m = n - k;
        let mut value = CompensatedSum::new();
        let mut scale = CompensatedSum::new();
        for i in 0..=m {
            let t = choose(m as u64, i as u64) * self.moment((k + i) as u32);
            let t = if i % 2 == 0 { t } else { -t };
            value.add(t);
            scale.add(t.abs());
        }
        Signed {
            value: value.value(),
            scale: scale.value(),
        }
    }

    /// `P(N(W) = k) = E[e^{-W} W^k / k!]` for a rate-one Poisson process `N`.
    pub fn mixed_poisson_pmf(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self.shape() {
            Shape::Atoms => {
                let (xs, ws) = self.atoms();
                compensated_sum(xs.iter().zip(&ws).map(|(x, w)| w * poisson_pmf(*x, k)))
            }
            Shape::Beta { a, b, scale } => (kf * scale.ln() - ln_factorial(k as u64)
                + ln_beta(a + kf, b)
                - ln_beta(a, b)
                - scale
                + ln_hyp1f1_positive(b, a + b + kf, scale))
            .exp(),
            Shape::Gamma { shape, rate } => {
                let p = rate / (1.0 + rate);
                (ln_gamma(shape + kf) - ln_gamma(shape) - ln_factorial(k as u64)
                    + kf * (1.0 - p).ln()
                    + shape * p.ln())
                .exp()
            }
        }
    }
}

pub(crate) fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k as u64)).exp()
}

/// `E[V^k (1-V)^m]` for `V ~ Gamma(shape, rate)`, multiplied by
/// `exp(ln_factor)`. The expectation splits at `V = 1` into
///
/// ```text
/// ∫_0^1 t^{k+a-1}(1-t)^m e^{-rt} dt = B(k+a, m+1) e^{-r} 1F1(m+1; n+a+1; r)
/// ∫_1^∞ t^{k+a-1}(t-1)^m e^{-rt} dt = e^{-r} ∫_0^∞ u^m (1+u)^{k+a-1} e^{-ru} du
/// ```
///
/// both computed from positive terms in log scale.
fn gamma_weight(shape: f64, rate: f64, n: usize, k: usize, ln_factor: f64) -> Signed {
    let m = n - k;
    let (kf, mf, nf) = (k as f64, m as f64, n as f64);
    let ln_pref = ln_factor + shape * rate.ln() - ln_gamma(shape);
    let ln_lower = ln_beta(kf + shape, mf + 1.0) - rate + ln_hyp1f1_positive(mf + 1.0, nf + shape + 1.0, rate);
    let ln_upper = -rate + ln_laplace_poly(m as u64, kf + shape - 1.0, rate);
    let lower = (ln_pref + ln_lower).exp();
    let upper = (ln_pref + ln_upper).exp();
    let signed_upper = if m.is_multiple_of(2) { upper } else { -upper };
    Signed {
        value: lower + signed_upper,
        scale: lower.max(upper),
    }
}

fn scaled_beta_weight_quadrature(a: f64, b: f64, c: f64, k: usize, m: usize) -> Signed {
    let norm = (-ln_beta(a, b)).exp();
    let f = |x: f64| -> f64 {
        let v = c * x;
        v.powi(k as i32) * (1.0 - v).powi(m as i32) * x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) * norm
    };
    let mut knots = vec![0.0];
    if c > 1.0 {
        knots.push(1.0 / c);
    }
    knots.push(1.0);
    let abs_mass: f64 = knots
        .windows(2)
        .map(|w| integrate(|x| f(x).abs(), w[0], w[1], 1e-13 * c.max(1.0).powi((k + m) as i32)))
        .sum();
    let value: f64 = knots
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], 1e-15 * abs_mass.max(f64::MIN_POSITIVE)))
        .sum();
    Signed {
        value,
        scale: abs_mass,
    }
}

/// `K_n = {k ∈ {0,…,n} : n - k odd}`.
pub fn kn_set(n: usize) -> Result<Vec<usize>> {
    if n < 1 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            range: "n >= 1",
        });
    }
    Ok((0..=n).filter(|k| (n - k) % 2 == 1).collect())
}

/// First `k ∈ K_n` violating the sign condition, if any.
pub fn b_n_violation(w: &MixingDistribution, n: usize, tol: &Tolerances) -> Option<(usize, f64)> {
    kn_set(n).ok()?.into_iter().find_map(|k| {
        let s = w.binomial_weight(n, k);
        (!s.is_nonneg(tol.eps_sign)).then_some((k, s.value))
    })
}

/// Whether `E (1 - sW)^n` is a proper a.p.g.f.
pub fn in_b_n(w: &MixingDistribution, n: usize) -> bool {
    in_b_n_with(w, n, &Tolerances::default())
}

pub fn in_b_n_with(w: &MixingDistribution, n: usize, tol: &Tolerances) -> bool {
    n >= 1 && b_n_violation(w, n, tol).is_none()
}

/// Law of `W∘n`: `P(W∘n = k) = C(n,k) E[W^k (1-W)^{n-k}]`.
pub fn mix_binomial(w: &MixingDistribution, n: usize) -> Result<FinitePmf> {
    mix_binomial_with(w, n, &Tolerances::default())
}

pub fn mix_binomial_with(w: &MixingDistribution, n: usize, tol: &Tolerances) -> Result<FinitePmf> {
    kn_set(n)?;
    let mut probs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = w.binomial_weight(n, k);
        if !s.is_nonneg(tol.eps_sign) {
            return Err(Error::NotAMixture {
                n,
                k,
                value: s.value,
            });
        }
        let v = if s.value.abs() <= tol.eps_sign * s.scale {
            0.0
        } else {
            s.value
        };
        probs.push(choose(n as u64, k as u64) * v);
    }
    FinitePmf::with_tolerance(probs, tol)
}

/// `g_k(α) = E[W^k (α - W)^{n-k}]`.
pub fn g_k_eval(w: &MixingDistribution, n: usize, k: usize, alpha: f64) -> Signed {
    assert!(k <= n && alpha >= 0.0);
    if alpha == 0.0 {
        let m = w.moment(n as u32);
        return Signed::exact(if (n - k).is_multiple_of(2) { m } else { -m });
    }
    match w.shape() {
        Shape::Gamma { shape, rate } => gamma_weight(shape, rate * alpha, n, k, n as f64 * alpha.ln()),
        _ => w.scaled(1.0 / alpha).binomial_weight(n, k).times(alpha.powi(n as i32)),
    }
}

/// `σ_n(W)` with the per-index roots of `g_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaResult {
    pub sigma: f64,
    pub roots: BTreeMap<usize, f64>,
    /// Index in `K_n` attaining the maximal root; `None` when `W ≡ 0`.
    pub argmax_k: Option<usize>,
    pub n: usize,
    /// Largest `|g_k(α_k)|` relative to its term scale.
    pub max_residual: f64,
}

/// Bisects a monotone feasibility predicate (false on `lo`, true on `hi`)
/// down to machine resolution. Returns the final `(infeasible, feasible)`
/// bracket.
pub(crate) fn bisect_feasible<F: FnMut(f64) -> bool>(mut feasible: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn g_root(w: &MixingDistribution, n: usize, k: usize) -> (f64, f64) {
    let g = |a: f64| g_k_eval(w, n, k, a);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi).value <= 0.0 {
        lo = hi;
        hi *= 2.0;
        assert!(hi.is_finite(), "g_{k} has no positive root");
    }
    let (_, root) = bisect_feasible(|a| g(a).value > 0.0, lo, hi);
    let at = g(root);
    (root, at.value.abs() / at.scale.max(f64::MIN_POSITIVE))
}

pub fn sigma(w: &MixingDistribution, n: usize) -> Result<SigmaResult> {
    sigma_with(w, n, &Tolerances::default())
}

pub fn sigma_with(w: &MixingDistribution, n: usize, _tol: &Tolerances) -> Result<SigmaResult> {
    let ks = kn_set(n)?;
    if w.is_zero() {
        return Ok(SigmaResult {
            sigma: 0.0,
            roots: BTreeMap::new(),
            argmax_k: None,
            n,
            max_residual: 0.0,
        });
    }
    let found: Vec<(usize, f64, f64)> = crate::par::map(&ks, |&k| {
        let (root, residual) = g_root(w, n, k);
        (k, root, residual)
    });
    let (argmax_k, sigma) = found
        .iter()
        .map(|(k, r, _)| (*k, *r))
        .fold((ks[0], f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(SigmaResult {
        sigma,
        roots: found.iter().map(|(k, r, _)| (*k, *r)).collect(),
        argmax_k: Some(argmax_k),
        n,
        max_residual: found.iter().map(|f| f.2).fold(0.0, f64::max),
    })
}

/// Law of `c W` for `c > 0`.
pub fn scale(w: &MixingDistribution, c: f64) -> Result<MixingDistribution> {
    check_positive("scale factor", c)?;
    Ok(w.scaled(c))
}

/// Decomposition `N(Y) ~ B (α∘Z)` with `B ~ Bernoulli(p)` independent of
/// `Z`, where `P(Z = 0) = 0` and `Z` is the zero-truncated law of `N(Y/α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub bernoulli_p: f64,
    pub z: FinitePmf,
    pub tail: TailReport,
}

impl Factorization {
    /// `p · law(α∘Z) + (1 - p) δ_0`.
    pub fn reconstruct(&self, alpha: f64) -> Result<FinitePmf> {
        let thinned = crate::pmf::thin(&self.z, alpha)?;
        let mut probs: Vec<f64> = thinned.probs().iter().map(|q| self.bernoulli_p * q).collect();
        probs[0] += 1.0 - self.bernoulli_p;
        Ok(FinitePmf::from_raw(probs))
    }
}

pub fn mixed_poisson_factorize(y: &MixingDistribution, alpha: f64, n_max: usize) -> Result<Factorization> {
    check_half_open_unit("alpha", alpha)?;
    if y.is_zero() {
        return Err(Error::Degenerate("mixing law concentrated at zero"));
    }
    let bernoulli_p = 1.0 - y.lst(1.0 / alpha);
    let inflated = y.scaled(1.0 / alpha);
    let mut probs = vec![0.0; n_max + 1];
    for (k, p) in probs.iter_mut().enumerate().skip(1) {
        *p = inflated.mixed_poisson_pmf(k) / bernoulli_p;
    }
    let z = FinitePmf::sub_stochastic(probs)?;
    let tail = TailReport::for_truncated(&z, n_max);
    Ok(Factorization { bernoulli_p, z, tail })
}

//! Named constructors. Infinite-support laws are truncated at `n_max` and
//! returned with a [`TailReport`]; they are never renormalized.

use crate::error::{check_half_open_unit, check_positive, check_unit, Error, Result};
use crate::mixing::MixingDistribution;
use crate::numeric::{choose, ln_choose};
use crate::pmf::{FinitePmf, TailReport};

/// Binomial(n, p), computed term by term.
pub fn binomial(n: usize, p: f64) -> Result<FinitePmf> {
    check_unit("p", p)?;
    let probs = (0..=n)
        .map(|k| {
            if n <= 60 {
                choose(n as u64, k as u64) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
            } else if p == 0.0 || p == 1.0 {
                let hit = if p == 0.0 { 0 } else { n };
                if k == hit {
                    1.0
                } else {
                    0.0
                }
            } else {
                (ln_choose(n as u64, k as u64) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
            }
        })
        .collect();
    Ok(FinitePmf::from_raw(probs))
}

pub fn bernoulli(p: f64) -> Result<FinitePmf> {
    binomial(1, p)
}

/// Uniform on `{0, …, n}`.
pub fn discrete_uniform(n: usize) -> FinitePmf {
    FinitePmf::from_raw(vec![1.0 / (n as f64 + 1.0); n + 1])
}

/// Geometric law `P(Y = k) ∝ γ^k` conditioned on `Y < m`.
pub fn conditional_geometric(gamma: f64, m: usize) -> Result<FinitePmf> {
    check_positive("gamma", gamma)?;
    if m == 0 {
        return Err(Error::Domain {
            name: "m",
            value: 0.0,
            range: "m >= 1",
        });
    }
    let weights: Vec<f64> = (0..m).map(|k| gamma.powi(k as i32)).collect();
    let total = crate::numeric::compensated_sum(weights.iter().copied());
    Ok(FinitePmf::from_raw(weights.into_iter().map(|w| w / total).collect()))
}

/// Poisson(λ) on `{0, …, n_max}`.
pub fn poisson(lambda: f64, n_max: usize) -> Result<(FinitePmf, TailReport)> {
    truncated_mixed_poisson(&MixingDistribution::point_mass(lambda)?, n_max)
}

/// Sibuya(γ): `P(X = k) = (γ/k) Π_{j<k} (1 - γ/j)` for `k >= 1`, on
/// `{0, …, n_max}`.
pub fn truncated_sibuya(gamma: f64, n_max: usize) -> Result<(FinitePmf, TailReport)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            range: "(0, 1)",
        });
    }
    let mut probs = vec![0.0; n_max + 1];
    let mut survival = 1.0;
    for (k, p) in probs.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        *p = gamma / kf * survival;
        survival *= 1.0 - gamma / kf;
    }
    let pmf = FinitePmf::sub_stochastic(probs)?;
    let tail = TailReport::for_truncated(&pmf, n_max);
    Ok((pmf, tail))
}

/// Scaled Sibuya: law of `α∘X` for `X ~ Sibuya(γ)`, with
/// `P(0) = 1 - α^γ` and `P(k) = α^γ P(X = k)` for `k >= 1`.
pub fn scaled_sibuya(gamma: f64, alpha: f64, n_max: usize) -> Result<(FinitePmf, TailReport)> {
    check_half_open_unit("alpha", alpha)?;
    let (base, _) = truncated_sibuya(gamma, n_max)?;
    let a = alpha.powf(gamma);
    let mut probs: Vec<f64> = base.probs().iter().map(|p| a * p).collect();
    probs[0] = 1.0 - a;
    let pmf = FinitePmf::sub_stochastic(probs)?;
    let tail = TailReport::for_truncated(&pmf, n_max);
    Ok((pmf, tail))
}

/// Generalized negative binomial
/// `P(X = k) = Γ(a+k)/(Γ(a) k!) (1-p)^k p^a` on `{0, …, n_max}`.
pub fn negative_binomial(a: f64, p: f64, n_max: usize) -> Result<(FinitePmf, TailReport)> {
    check_positive("a", a)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    truncated_mixed_poisson(&MixingDistribution::gamma(a, p / (1.0 - p))?, n_max)
}

/// Mixed Poisson law `P(N(W) = k) = E[e^{-W} W^k / k!]` on `{0, …, n_max}`.
pub fn truncated_mixed_poisson(w: &MixingDistribution, n_max: usize) -> Result<(FinitePmf, TailReport)> {
    let probs = (0..=n_max).map(|k| w.mixed_poisson_pmf(k)).collect();
    let pmf = FinitePmf::sub_stochastic(probs)?;
    let tail = TailReport::for_truncated(&pmf, n_max);
    Ok((pmf, tail))
}

/// Truncation of `N(W)` at the first point where the tail mass falls below
/// `tail_target`, searching up to `limit`.
pub fn truncated_mixed_poisson_to_tail(
    w: &MixingDistribution,
    tail_target: f64,
    limit: usize,
) -> Result<(FinitePmf, TailReport)> {
    let mut probs = Vec::new();
    let mut mass = crate::numeric::CompensatedSum::new();
    for k in 0..=limit {
        let p = w.mixed_poisson_pmf(k);
        probs.push(p);
        mass.add(p);
        // tail estimate only trusted past the mean
        if k as f64 > w.mean() && 1.0 - mass.value() < tail_target {
            break;
        }
    }
    let n_max = probs.len() - 1;
    let pmf = FinitePmf::sub_stochastic(probs)?;
    let tail = TailReport::for_truncated(&pmf, n_max);
    Ok((pmf, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::{thin, tv_distance, zero_truncate};

    #[test]
    fn binomial_matches_repeated_bernoulli() {
        let b = binomial(5, 0.3).unwrap();
        let direct = crate::pmf::convolve_power(&bernoulli(0.3).unwrap(), 5);
        assert!(b.max_abs_diff(&direct) < 1e-15);
        assert_eq!(binomial(4, 0.0).unwrap(), FinitePmf::zero());
        assert_eq!(binomial(4, 1.0).unwrap(), FinitePmf::point_mass(4));
        assert!((binomial(200, 0.3).unwrap().mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sibuya_terms() {
        let g = 0.3;
        let (s, tail) = truncated_sibuya(g, 50).unwrap();
        assert_eq!(s.get(0), 0.0);
        assert!((s.get(1) - g).abs() < 1e-16);
        assert!((s.get(2) - g * (1.0 - g) / 2.0).abs() < 1e-16);
        assert!(tail.tail_mass > 0.0 && tail.truncation_point == 50);
        assert!(truncated_sibuya(1.0, 10).is_err());
        assert!(truncated_sibuya(0.0, 10).is_err());
    }

    #[test]
    fn sibuya_tail_rate() {
        // P(X > n) ~ n^{-γ}/Γ(1-γ)
        let g: f64 = 0.5;
        for &n in &[1000usize, 10000] {
            let (_, tail) = truncated_sibuya(g, n).unwrap();
            let approx = (n as f64).powf(-g) / statrs::function::gamma::gamma(1.0 - g);
            assert!((tail.tail_mass / approx - 1.0).abs() < 0.01, "n={n}");
        }
    }

    #[test]
    fn scaled_sibuya_is_thinned_sibuya() {
        let (g, n) = (0.4, 400);
        let (s, _) = truncated_sibuya(g, n).unwrap();
        let (one, _) = scaled_sibuya(g, 1.0, n).unwrap();
        assert_eq!(one.get(0), 0.0);
        assert!(one.max_abs_diff(&s) < 1e-16);
        for &a in &[0.3, 0.8] {
            let (sc, tail) = scaled_sibuya(g, a, n).unwrap();
            assert!((sc.get(0) - (1.0 - a.powf(g))).abs() < 1e-15);
            let direct = thin(&s, a).unwrap();
            assert!(tv_distance(&sc, &direct) <= tail.tail_mass + 1e-12);
            // zero truncation recovers the Sibuya coefficients
            let z = zero_truncate(&sc).unwrap();
            assert!(z.max_abs_diff(&s) < 1e-15);
        }
    }

    #[test]
    fn mixed_poisson_examples() {
        let (p, tail) = truncated_mixed_poisson(&MixingDistribution::PointMass(2.0), 40).unwrap();
        for k in 0..10 {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            assert!((p.get(k) - (-2.0f64).exp() * 2f64.powi(k as i32) / fact).abs() < 1e-15);
        }
        assert!(tail.tail_mass < 1e-15);
        // Gamma(a, 1) gives Γ(a+k)/(Γ(a) k!) 2^{-(a+k)}
        let a = 2.5;
        let (p, _) = truncated_mixed_poisson(&MixingDistribution::gamma(a, 1.0).unwrap(), 30).unwrap();
        let mut coef = 1.0;
        for k in 0..20 {
            let expected = coef * 0.5f64.powf(a + k as f64);
            assert!((p.get(k) - expected).abs() < 1e-14, "k={k}");
            coef *= (a + k as f64) / (k as f64 + 1.0);
        }
    }

    #[test]
    fn thinning_mixed_poisson_scales_the_mixer() {
        let w = MixingDistribution::gamma(2.0, 0.7).unwrap();
        let (p, tail) = truncated_mixed_poisson(&w, 150).unwrap();
        for &a in &[0.25, 0.6] {
            let (q, _) = truncated_mixed_poisson(&w.scaled(a), 150).unwrap();
            let t = thin(&p, a).unwrap();
            assert!(tv_distance(&t, &q) <= tail.tail_mass + 1e-12);
        }
    }

    #[test]
    fn tail_search() {
        let (p, tail) = truncated_mixed_poisson_to_tail(&MixingDistribution::PointMass(1.0), 1e-10, 1000).unwrap();
        assert!(tail.tail_mass < 1e-10);
        assert!(p.degree() < 30);
    }

    #[test]
    fn conditional_geometric_normalised() {
        let g = conditional_geometric(0.5, 4).unwrap();
        let total: f64 = 1.0 + 0.5 + 0.25 + 0.125;
        assert!((g.get(3) - 0.125 / total).abs() < 1e-16);
        assert!(conditional_geometric(0.5, 0).is_err());
    }
}

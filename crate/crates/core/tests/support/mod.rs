//! Randomized identity checks shared by the property tests and the
//! acceptance run. Each check drives a proptest runner so the case count and
//! seed are set by the caller.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use thinmix_core::mixing::{in_b_n, MixingDistribution};
use thinmix_core::pmf::{apgf, convolve, thin, FinitePmf};
use thinmix_core::thinning::{is_member, rho};

pub type Outcome = Result<(), String>;

/// Deterministic runner with `cases` cases.
pub fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Normalised pmf of degree up to `max_degree`, with occasional zeros and a
/// positive top coefficient.
pub fn pmf_strategy(max_degree: usize) -> impl Strategy<Value = FinitePmf> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01..1.0f64], 0..=max_degree)
        .prop_flat_map(|body| (Just(body), 0.05..1.0f64))
        .prop_map(|(mut w, top)| {
            w.push(top);
            let total: f64 = w.iter().sum();
            FinitePmf::new(w.into_iter().map(|x| x / total).collect()).expect("normalised")
        })
}

/// Pmf with every coefficient positive.
pub fn hole_free_strategy(max_degree: usize) -> impl Strategy<Value = FinitePmf> {
    prop::collection::vec(0.02..1.0f64, 1..=max_degree + 1).prop_map(|w| {
        let total: f64 = w.iter().sum();
        FinitePmf::new(w.into_iter().map(|x| x / total).collect()).expect("normalised")
    })
}

pub fn mixing_strategy() -> impl Strategy<Value = MixingDistribution> {
    prop_oneof![
        (0.3..6.0f64, 0.3..6.0f64, 0.3..3.0f64)
            .prop_map(|(a, b, c)| MixingDistribution::beta(a, b).unwrap().scaled(c)),
        (0.3..6.0f64, 0.5..12.0f64).prop_map(|(a, r)| MixingDistribution::gamma(a, r).unwrap()),
        prop::collection::vec((0.0..2.0f64, 0.05..1.0f64), 1..5).prop_map(|pairs| {
            let total: f64 = pairs.iter().map(|p| p.1).sum();
            let (xs, ws) = pairs.into_iter().map(|(x, w)| (x, w / total)).unzip();
            MixingDistribution::finite_discrete(xs, ws).unwrap()
        }),
    ]
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn run<S: Strategy>(
    runner: &mut TestRunner,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// `α∘(β∘X) = (αβ)∘X`.
pub fn semigroup(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(15), 0.0..=1.0f64, 0.0..=1.0f64), |(p, a, b)| {
        let lhs = thin(&thin(&p, b).unwrap(), a).unwrap();
        let rhs = thin(&p, a * b).unwrap();
        let d = lhs.max_abs_diff(&rhs);
        check(d <= 1e-12, || format!("gap {d:e}"))
    })
}

/// `α∘(X+Y) = α∘X + α∘Y`.
pub fn distributes_over_convolution(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(10), pmf_strategy(10), 0.0..=1.0f64), |(x, y, a)| {
        let lhs = thin(&convolve(&x, &y), a).unwrap();
        let rhs = convolve(&thin(&x, a).unwrap(), &thin(&y, a).unwrap());
        let d = lhs.max_abs_diff(&rhs);
        check(d <= 1e-12, || format!("gap {d:e}"))
    })
}

/// `G_{α∘X}(s) = G_X(αs)` on `[0, 2]`.
pub fn apgf_functional_equation(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(15), 0.0..=1.0f64, 0.0..=2.0f64), |(p, a, s)| {
        let lhs = apgf(&thin(&p, a).unwrap(), s);
        let rhs = apgf(&p, a * s);
        check((lhs - rhs).abs() <= 1e-12, || format!("{lhs} vs {rhs}"))
    })
}

/// `E[α∘X] = αE[X]` and `Var(α∘X) = α²Var(X) + α(1-α)E[X]`.
pub fn moment_identities(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(15), 0.0..=1.0f64), |(p, a)| {
        let t = thin(&p, a).unwrap();
        let mean = a * p.mean();
        let var = a * a * p.variance() + a * (1.0 - a) * p.mean();
        check((t.mean() - mean).abs() <= 1e-10, || format!("mean {} vs {mean}", t.mean()))?;
        check((t.variance() - var).abs() <= 1e-10, || format!("variance {} vs {var}", t.variance()))
    })
}

/// `ρ(α∘X) = αρ(X)`.
pub fn rho_scaling(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(10), 0.01..=1.0f64), |(p, a)| {
        let lhs = rho(&thin(&p, a).unwrap()).rho;
        let rhs = a * rho(&p).rho;
        check((lhs - rhs).abs() <= 1e-8, || format!("{lhs} vs {rhs}"))
    })
}

/// Membership at `α₁` implies membership at every `α₂ > α₁`.
pub fn monotone_membership(r: &mut TestRunner) -> Outcome {
    run(r, (pmf_strategy(10), 0.001..=1.0f64, 0.001..=1.0f64), |(p, a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m_lo = is_member(&p, lo).unwrap();
        let m_hi = is_member(&p, hi).unwrap();
        check(!m_lo || m_hi, || format!("member at {lo} but not at {hi}"))
    })
}

/// `B(n) ⊂ B(n-1)`.
pub fn b_n_nesting(r: &mut TestRunner) -> Outcome {
    run(r, (mixing_strategy(), 2usize..=12), |(w, n)| {
        check(!in_b_n(&w, n) || in_b_n(&w, n - 1), || format!("{w:?} in B({n}) but not B({})", n - 1))
    })
}

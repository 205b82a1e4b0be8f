//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Reference values are computed here from closed forms,
//! independently of the library routines under test.

mod support;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use thinmix_core::families::{binomial, conditional_geometric, discrete_uniform, truncated_sibuya};
use thinmix_core::limits::{self, MixtureSpec, PoissonSpec, SequenceSpec};
use thinmix_core::mc;
use thinmix_core::mixing::{mix_binomial, sigma, MixingDistribution};
use thinmix_core::pmf::{thin, tv_distance, zero_truncate, FinitePmf};
use thinmix_core::thinning::{rho, rho_bisection_with, unthin, RhoMethod};
use thinmix_core::{Exec, Tolerances};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn normalised(w: Vec<f64>) -> FinitePmf {
    let total: f64 = w.iter().sum();
    FinitePmf::new(w.into_iter().map(|x| x / total).collect()).unwrap()
}

fn sci(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3e}")).collect()
}

fn support(p: &FinitePmf) -> Vec<usize> {
    (0..=p.degree()).filter(|&j| p.get(j) > 0.0).collect()
}

fn c1_uniform_rho() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=20usize {
        let r = rho(&discrete_uniform(n)).rho;
        worst = worst.max((r - n as f64 / (n as f64 + 1.0)).abs());
    }
    pass_if(worst <= 1e-9, format!("max error {worst:.2e}"))
}

/// `ρ = 1 / (1 + (p1 - sqrt(Δ⁺)) / (2 p2))`, taking `Δ = 0` when the law is
/// known to be a binomial.
fn rho3(p0: f64, p1: f64, p2: f64, degenerate: bool) -> f64 {
    let delta = if degenerate { 0.0 } else { (p1 * p1 - 4.0 * p0 * p2).max(0.0) };
    1.0 / (1.0 + (p1 - delta.sqrt()) / (2.0 * p2))
}

fn c2_three_point_closed_form() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut bad_support = Vec::new();
    let mut counts = [0usize; 3];
    for i in 0..500 {
        let class = i % 3; // 0: Δ<0, 1: Δ=0, 2: Δ>0
        let (p, expected_support) = loop {
            let p = if class == 1 {
                let b = rng.gen_range(0.05..0.95);
                binomial(2, b).unwrap()
            } else {
                normalised((0..3).map(|_| rng.gen_range(0.01..1.0)).collect())
            };
            let d = p.get(1).powi(2) - 4.0 * p.get(0) * p.get(2);
            match class {
                0 if d < -1e-3 => break (p, vec![0, 2]),
                1 => break (p, vec![2]),
                2 if d > 1e-3 => break (p, vec![1, 2]),
                _ => {}
            }
        };
        counts[class] += 1;
        let r = rho_bisection_with(&p, &tol);
        let expected = rho3(p.get(0), p.get(1), p.get(2), class == 1);
        worst = worst.max((r.rho - expected).abs());
        let s = support(r.witness_z.as_ref().unwrap());
        if s != expected_support {
            bad_support.push((p.probs().to_vec(), s));
        }
    }
    pass_if(
        worst <= 1e-8 && bad_support.is_empty(),
        format!(
            "classes {counts:?}, max error {worst:.2e}, witness support mismatches {}{}",
            bad_support.len(),
            bad_support.first().map(|b| format!(" e.g. {b:?}")).unwrap_or_default()
        ),
    )
}

fn c3_conditional_geometric() -> Outcome {
    let mut worst = 0.0f64;
    for &g in &[0.2, 0.5, 0.9] {
        for &m in &[3usize, 5, 10] {
            let r = rho(&conditional_geometric(g, m).unwrap()).rho;
            let k = (m - 1) as f64 * g;
            worst = worst.max((r - k / (k + 1.0)).abs());
        }
    }
    pass_if(worst <= 1e-8, format!("max error {worst:.2e}"))
}

fn c4_hole_law() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
    let mut holed_wrong = 0;
    let mut free_wrong = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=12usize);
        let mut w: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let holes = rng.gen_range(1..=n.min(3));
        for _ in 0..holes {
            w[rng.gen_range(0..n)] = 0.0;
        }
        let r = rho(&normalised(w));
        if r.rho != 1.0 || r.method != RhoMethod::Hole {
            holed_wrong += 1;
        }
    }
    for _ in 0..200 {
        let n = rng.gen_range(1..=12usize);
        let w: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.01..1.0)).collect();
        if rho(&normalised(w)).rho >= 1.0 {
            free_wrong += 1;
        }
    }
    pass_if(
        holed_wrong == 0 && free_wrong == 0,
        format!("holed with rho != 1: {holed_wrong}/200, hole-free with rho >= 1: {free_wrong}/200"),
    )
}

fn c5_sigma_closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    let mut check = |w: MixingDistribution, n: usize, expected: f64| {
        let s = sigma(&w, n).unwrap().sigma;
        worst = worst.max((s - expected).abs());
    };
    for &a in &[0.5, 1.0, 2.0, 7.0] {
        for &b in &[0.25, 1.0, 3.0] {
            for n in 1..=10usize {
                check(MixingDistribution::gamma(a, b).unwrap(), n, (a + n as f64 - 1.0) / b);
            }
        }
    }
    for n in 1..=10usize {
        let nf = n as f64;
        for &l in &[0.5, 2.0] {
            check(MixingDistribution::exponential(l).unwrap(), n, nf / l);
            for m in [1u32, 3] {
                check(MixingDistribution::erlang(m, l).unwrap(), n, (m as f64 + nf - 1.0) / l);
            }
        }
        for m in [1u32, 2, 5] {
            check(MixingDistribution::chi_square(m).unwrap(), n, m as f64 + 2.0 * (nf - 1.0));
        }
    }
    pass_if(worst <= 1e-9, format!("max error {worst:.2e}"))
}

fn c6_rho_of_mixture_is_sigma() -> Outcome {
    let fixed = [
        MixingDistribution::Uniform01,
        MixingDistribution::beta(2.0, 3.0).unwrap(),
        MixingDistribution::finite_discrete(vec![0.2, 0.7, 1.0], vec![0.3, 0.3, 0.4]).unwrap(),
        MixingDistribution::finite_discrete(vec![0.0, 0.5], vec![0.5, 0.5]).unwrap(),
    ];
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        let g = MixingDistribution::gamma(2.0, 1.0).unwrap();
        // σ_n(Gamma(2,1)) = n + 1; shrink it to 0.8
        let scaled = g.scaled(1.0 / (1.25 * (n as f64 + 1.0)));
        for w in fixed.iter().chain(std::iter::once(&scaled)) {
            let s = sigma(w, n).unwrap().sigma;
            let r = rho(&mix_binomial(w, n).unwrap()).rho;
            worst = worst.max((r - s).abs());
        }
    }
    pass_if(worst <= 1e-7, format!("max |rho - sigma| {worst:.2e}"))
}

fn c7_uniform_mixture() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=20usize {
        let p = mix_binomial(&MixingDistribution::Uniform01, n).unwrap();
        for k in 0..=n {
            worst = worst.max((p.get(k) - 1.0 / (n as f64 + 1.0)).abs());
        }
    }
    pass_if(worst <= 1e-12, format!("max error {worst:.2e}"))
}

fn c8_z_n() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=12i32 {
        let nf = n as f64;
        let z = unthin(&discrete_uniform(n as usize), nf / (nf + 1.0)).unwrap();
        let p0 = (nf.powi(n + 1) - (-1f64).powi(n + 1)) / ((nf + 1.0).powi(2) * nf.powi(n));
        let pn = (nf + 1.0).powi(n - 1) / nf.powi(n);
        worst = worst
            .max((z.get(0) - p0).abs())
            .max(z.get(n as usize - 1).abs())
            .max((z.get(n as usize) - pn).abs());
        // every coordinate: (n+1)^{j-1} Σ_{i≥j} C(i,j) n^{-i} (-1)^{i-j}
        for j in 0..=n {
            let mut c = 1.0;
            let mut sum = 0.0;
            for i in j..=n {
                if i > j {
                    c *= i as f64 / (i - j) as f64;
                }
                sum += c * nf.powi(-i) * if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
            }
            worst = worst.max((z.get(j as usize) - (nf + 1.0).powi(j - 1) * sum).abs());
        }
    }
    pass_if(worst <= 1e-9, format!("max error {worst:.2e}"))
}

/// TV(Binomial(n, 1/n), Poisson(1)) from scratch, Poisson tail beyond the
/// binomial support included.
fn binomial_poisson_tv(n: usize) -> f64 {
    let p = 1.0 / n as f64;
    let mut b = (1.0 - p).powi(n as i32);
    let mut q = (-1.0f64).exp();
    let mut sum = 0.0;
    let mut poisson_mass = 0.0;
    for k in 0..=n {
        sum += (b - q).abs();
        poisson_mass += q;
        b *= (n - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
        q /= (k + 1) as f64;
    }
    0.5 * (sum + (1.0 - poisson_mass).max(0.0))
}

fn c9_poisson_approximation() -> Outcome {
    let spec = PoissonSpec {
        x: FinitePmf::point_mass(1),
        a_n: SequenceSpec::Reciprocal { lambda: 1.0 },
        lambda: None,
        ns: vec![10, 50, 200, 1000],
    };
    let r = limits::poisson_approximation(&spec, Exec::default()).unwrap();
    let d = r.distances();
    let oracle_gap = spec
        .ns
        .iter()
        .zip(&d)
        .map(|(&n, &tv)| (tv - binomial_poisson_tv(n)).abs())
        .fold(0.0, f64::max);
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    pass_if(
        decreasing && d[3] < 0.005 && oracle_gap < 1e-9,
        format!("tv {:?}, oracle gap {oracle_gap:.1e}", sci(&d)),
    )
}

fn c10_mixture_limit() -> Outcome {
    let spec = MixtureSpec {
        w: MixingDistribution::gamma(2.0, 1.0).unwrap(),
        a_n: SequenceSpec::Affine { slope: 1.0, offset: 1.0 },
        ns: vec![5, 20, 80, 320],
    };
    let r = limits::mixture_limit(&spec, Exec::default()).unwrap();
    // negative binomial with a = 2, p = 1/2: (k+1) / 2^{k+2}
    let limit_gap = (0..=r.limit_pmf.degree())
        .map(|k| (r.limit_pmf.get(k) - (k as f64 + 1.0) * 0.5f64.powi(k as i32 + 2)).abs())
        .fold(0.0, f64::max);
    // n = 5 by moment expansion: E W^j = (j+1)! / 6^j for W ~ Gamma(2, 6)
    let moment = |j: usize| (1..=j + 1).map(|i| i as f64).product::<f64>() / 6f64.powi(j as i32);
    let choose = |n: usize, k: usize| (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64);
    let direct = mix_binomial(&spec.w.scaled(1.0 / 6.0), 5).unwrap();
    let small_gap = (0..=5usize)
        .map(|k| {
            let e: f64 = (0..=5 - k)
                .map(|i| choose(5 - k, i) * moment(k + i) * if i % 2 == 0 { 1.0 } else { -1.0 })
                .sum();
            (direct.get(k) - choose(5, k) * e).abs()
        })
        .fold(0.0, f64::max);
    let d = r.distances();
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    pass_if(
        decreasing && d[3] < 0.02 && limit_gap < 1e-14 && small_gap < 1e-12,
        format!("tv {:?}, limit gap {limit_gap:.1e}, n=5 gap {small_gap:.1e}", sci(&d)),
    )
}

fn c11_sibuya_fixed_point() -> Outcome {
    let (s, tail) = truncated_sibuya(0.5, 5000).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for &a in &[0.9, 0.5, 0.1] {
        let tv = tv_distance(&zero_truncate(&thin(&s, a).unwrap()).unwrap(), &s);
        ok &= tv <= 2.0 * tail.tail_mass;
        detail.push(format!("alpha {a}: tv/tail {:.3}", tv / tail.tail_mass));
    }
    pass_if(ok, format!("tail {:.3e}; {}", tail.tail_mass, detail.join(", ")))
}

fn c12_property_suites() -> Outcome {
    type Suite = fn(&mut proptest::test_runner::TestRunner) -> support::Outcome;
    let suites: [(&str, Suite); 7] = [
        ("semigroup", support::semigroup),
        ("convolution", support::distributes_over_convolution),
        ("apgf", support::apgf_functional_equation),
        ("moments", support::moment_identities),
        ("rho scaling", support::rho_scaling),
        ("monotone membership", support::monotone_membership),
        ("B(n) nesting", support::b_n_nesting),
    ];
    let start = Instant::now();
    let mut failures = Vec::new();
    for (i, (name, suite)) in suites.iter().enumerate() {
        if let Err(e) = suite(&mut support::runner(1000, 120 + i as u8)) {
            failures.push(format!("{name}: {e}"));
        }
    }
    let elapsed = start.elapsed();
    pass_if(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("7 suites x 1000 cases in {elapsed:.1?}; {}", if failures.is_empty() { "no failures".into() } else { failures.join("; ") }),
    )
}

fn c13_monte_carlo() -> Outcome {
    const N: u64 = 1_000_000;
    let runs = [
        ("thin uniform{0..5} by 0.4", mc::sample_thin(&discrete_uniform(5), 0.4, N, 1301)),
        ("mix Uniform01, n=3", mc::sample_mix(&MixingDistribution::Uniform01, 3, N, 1302)),
        ("mix Beta(2,3), n=6", mc::sample_mix(&MixingDistribution::beta(2.0, 3.0).unwrap(), 6, N, 1303)),
        (
            "mix discrete, n=4",
            mc::sample_mix(
                &MixingDistribution::finite_discrete(vec![0.2, 0.9], vec![0.5, 0.5]).unwrap(),
                4,
                N,
                1304,
            ),
        ),
        ("mixed Poisson PointMass(3)", mc::sample_mixed_poisson(&MixingDistribution::PointMass(3.0), N, 1305)),
        (
            "mixed Poisson Gamma(2,1)",
            mc::sample_mixed_poisson(&MixingDistribution::gamma(2.0, 1.0).unwrap(), N, 1306),
        ),
        ("Sibuya(0.5) to 200", mc::sample_sibuya(0.5, 200, N, 1307)),
    ];
    let mut failures = Vec::new();
    let mut thin_dev = 0.0;
    for (name, r) in &runs {
        match r {
            Ok(r) if r.passes() => {}
            Ok(r) => failures.push(format!(
                "{name}: within_3_sigma {} chi2 {:.1} / {:.1}",
                r.within_3_sigma, r.chi_square_stat, r.chi_square_critical
            )),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if let Ok(r) = &runs[0].1 {
        thin_dev = r.max_abs_dev;
    }
    let thin_bound = 4.0 * (0.25f64 / N as f64).sqrt() * 3.0;
    pass_if(
        failures.is_empty() && thin_dev < thin_bound,
        format!(
            "{} comparisons; thinning max dev {thin_dev:.2e} < {thin_bound:.2e}; {}",
            runs.len(),
            if failures.is_empty() { "all within policy".into() } else { failures.join("; ") }
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 13] = [
        ("rho of discrete uniform", c1_uniform_rho, Some(Duration::from_secs(1))),
        ("three-point closed form", c2_three_point_closed_form, Some(Duration::from_secs(5))),
        ("conditional geometric", c3_conditional_geometric, None),
        ("hole law", c4_hole_law, None),
        ("sigma closed forms", c5_sigma_closed_forms, None),
        ("rho(W∘n) = sigma_n(W)", c6_rho_of_mixture_is_sigma, None),
        ("uniform mixture pmf", c7_uniform_mixture, None),
        ("Z_n formulas", c8_z_n, None),
        ("Poisson approximation", c9_poisson_approximation, Some(Duration::from_secs(5))),
        ("mixture limit", c10_mixture_limit, None),
        ("Sibuya fixed point", c11_sibuya_fixed_point, None),
        ("property suites", c12_property_suites, Some(Duration::from_secs(60))),
        ("Monte Carlo oracles", c13_monte_carlo, None),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        let budget_note = budget.map(|b| format!(" (budget {b:?})")).unwrap_or_default();
        println!(
            "criterion {:>2} {} {name}: {} [{elapsed:.2?}{budget_note}]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

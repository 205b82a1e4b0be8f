//! Seeded Monte Carlo samplers, used as an independent oracle for the exact
//! operators.
//!
//! Every sampler follows the literal definition of its operator: thinning
//! draws `X` and keeps each unit with probability `α`, binomial mixing draws
//! `W` and counts uniforms below it, mixed Poisson draws `Y` and then a
//! Poisson count.
//!
//! The generator is xoshiro256++ seeded through SplitMix64. Work is split
//! into [`CHUNKS`] chunks; chunk `i` uses the seeded generator advanced by
//! `i` jumps of `2^128` steps, so the streams never overlap and the report is
//! identical whether chunks run sequentially or in parallel.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, Poisson};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{check_unit, Error, Result};
use crate::families::{truncated_mixed_poisson_to_tail, truncated_sibuya};
use crate::mixing::{mix_binomial, MixingDistribution};
use crate::par::{self, Exec};
use crate::pmf::{thin, FinitePmf};

pub const CHUNKS: usize = 64;
/// Cells with smaller expected counts are pooled for the chi-square test.
const MIN_EXPECTED: f64 = 5.0;
const CHI_SQUARE_LEVEL: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub seed: u64,
    pub n_samples: u64,
    /// Observed frequencies `counts / n_samples` on `0..=degree`.
    pub empirical: Vec<f64>,
    /// Fraction of draws beyond the support of the exact (truncated) law.
    pub overflow: f64,
    pub max_abs_dev: f64,
    pub chi_square_stat: f64,
    pub dof: usize,
    pub chi_square_critical: f64,
    /// Every cell within `3·sqrt(p(1-p)/N) + 10/N` of its exact value.
    pub within_3_sigma: bool,
}

impl SampleReport {
    pub fn passes(&self) -> bool {
        self.within_3_sigma && (self.dof == 0 || self.chi_square_stat <= self.chi_square_critical)
    }

    fn build(seed: u64, counts: &[u64], overflow: u64, exact: &FinitePmf) -> Self {
        let total: u64 = counts.iter().sum::<u64>() + overflow;
        let nf = total as f64;
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        let len = counts.len().max(exact.degree() + 1);
        // the last cell collects everything past the exact support
        let mut cells: Vec<(f64, f64)> = (0..len)
            .map(|k| (counts.get(k).copied().unwrap_or(0) as f64, exact.get(k)))
            .collect();
        cells.push((overflow as f64, (1.0 - exact.mass()).max(0.0)));

        let mut max_abs_dev = 0.0f64;
        let mut within = true;
        for &(c, p) in &cells {
            let dev = (c / nf - p).abs();
            max_abs_dev = max_abs_dev.max(dev);
            if dev > 3.0 * (p * (1.0 - p) / nf).sqrt() + 10.0 / nf {
                within = false;
            }
        }

        let mut groups: Vec<(f64, f64)> = Vec::new();
        let mut pending = (0.0, 0.0);
        for &(c, p) in &cells {
            pending = (pending.0 + c, pending.1 + p * nf);
            if pending.1 >= MIN_EXPECTED {
                groups.push(pending);
                pending = (0.0, 0.0);
            }
        }
        if pending.0 > 0.0 || pending.1 > 0.0 {
            match groups.last_mut() {
                Some(last) => {
                    last.0 += pending.0;
                    last.1 += pending.1;
                }
                None => groups.push(pending),
            }
        }
        let chi_square_stat: f64 = groups
            .iter()
            .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
            .sum();
        let dof = groups.len().saturating_sub(1);
        let chi_square_critical = if dof == 0 {
            0.0
        } else {
            ChiSquared::new(dof as f64).expect("dof > 0").inverse_cdf(CHI_SQUARE_LEVEL)
        };
        SampleReport {
            seed,
            n_samples: total,
            empirical,
            overflow: overflow as f64 / nf,
            max_abs_dev,
            chi_square_stat,
            dof,
            chi_square_critical,
            within_3_sigma: within,
        }
    }
}

/// Generator for chunk `index` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, index: usize) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// Runs `draw` `n_samples` times over the chunked streams and tallies values
/// up to `cap`; larger values land in the overflow count.
fn tally<F>(n_samples: u64, seed: u64, cap: usize, exec: Exec, draw: F) -> Result<(Vec<u64>, u64)>
where
    F: Fn(&mut Xoshiro256PlusPlus) -> usize + Sync + Send,
{
    if n_samples == 0 {
        return Err(Error::Domain {
            name: "n_samples",
            value: 0.0,
            range: "n_samples >= 1",
        });
    }
    let chunks: Vec<usize> = (0..CHUNKS).collect();
    let base = n_samples / CHUNKS as u64;
    let extra = (n_samples % CHUNKS as u64) as usize;
    let parts = par::map_with(exec, &chunks, |&i| {
        let mut rng = chunk_rng(seed, i);
        let size = base + u64::from(i < extra);
        let mut counts = vec![0u64; cap + 1];
        let mut overflow = 0u64;
        for _ in 0..size {
            let v = draw(&mut rng);
            match counts.get_mut(v) {
                Some(c) => *c += 1,
                None => overflow += 1,
            }
        }
        (counts, overflow)
    });
    let mut counts = vec![0u64; cap + 1];
    let mut overflow = 0;
    for (c, o) in parts {
        counts.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
        overflow += o;
    }
    while counts.len() > 1 && counts.last() == Some(&0) {
        counts.pop();
    }
    Ok((counts, overflow))
}

/// Inverse-cdf sampler for a finite pmf (normalised by its mass).
struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        Categorical { cdf }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

fn bernoulli_count<R: Rng>(rng: &mut R, trials: usize, p: f64) -> usize {
    (0..trials).filter(|_| rng.gen::<f64>() < p).count()
}

/// Draw from a mixing law: gammas by Marsaglia–Tsang, betas as a ratio of
/// gammas.
struct MixerSampler {
    kind: MixerKind,
}

enum MixerKind {
    Atoms(Vec<f64>, Categorical),
    Uniform(f64),
    Beta(Gamma<f64>, Gamma<f64>, f64),
    Gamma(Gamma<f64>),
}

impl MixerSampler {
    fn new(w: &MixingDistribution) -> Self {
        use MixingDistribution as M;
        let gamma = |shape: f64, rate: f64| Gamma::new(shape, 1.0 / rate).expect("validated parameters");
        let kind = match w {
            M::PointMass(x) => MixerKind::Atoms(vec![*x], Categorical::new(&[1.0])),
            M::FiniteDiscrete { atoms, weights } => MixerKind::Atoms(atoms.clone(), Categorical::new(weights)),
            M::Uniform01 => MixerKind::Uniform(1.0),
            M::ScaledUniform(c) => MixerKind::Uniform(*c),
            M::Beta { a, b } => MixerKind::Beta(gamma(*a, 1.0), gamma(*b, 1.0), 1.0),
            M::ScaledBeta { a, b, scale } => MixerKind::Beta(gamma(*a, 1.0), gamma(*b, 1.0), *scale),
            M::Gamma { shape, rate } => MixerKind::Gamma(gamma(*shape, *rate)),
            M::Exponential(rate) => MixerKind::Gamma(gamma(1.0, *rate)),
            M::Erlang { stages, rate } => MixerKind::Gamma(gamma(*stages as f64, *rate)),
            M::ChiSquare(m) => MixerKind::Gamma(gamma(*m as f64 / 2.0, 0.5)),
        };
        MixerSampler { kind }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            MixerKind::Atoms(xs, cat) => xs[cat.draw(rng)],
            MixerKind::Uniform(c) => c * rng.gen::<f64>(),
            MixerKind::Beta(ga, gb, c) => {
                let x = ga.sample(rng);
                let y = gb.sample(rng);
                c * x / (x + y)
            }
            MixerKind::Gamma(g) => g.sample(rng),
        }
    }
}

/// `α∘X` sampled as `X` Bernoulli(α) trials after drawing `X`.
pub fn sample_thin(pmf: &FinitePmf, alpha: f64, n_samples: u64, seed: u64) -> Result<SampleReport> {
    sample_thin_with(pmf, alpha, n_samples, seed, Exec::default())
}

pub fn sample_thin_with(pmf: &FinitePmf, alpha: f64, n_samples: u64, seed: u64, exec: Exec) -> Result<SampleReport> {
    check_unit("alpha", alpha)?;
    let exact = thin(pmf, alpha)?;
    let x = Categorical::new(pmf.probs());
    let (counts, overflow) = tally(n_samples, seed, pmf.degree(), exec, |rng| {
        let k = x.draw(rng);
        bernoulli_count(rng, k, alpha)
    })?;
    Ok(SampleReport::build(seed, &counts, overflow, &exact))
}

/// `W∘n` sampled as the number of `n` uniforms falling below `W`. Only
/// available when `W` lives in `[0, 1]`.
pub fn sample_mix(w: &MixingDistribution, n: usize, n_samples: u64, seed: u64) -> Result<SampleReport> {
    sample_mix_with(w, n, n_samples, seed, Exec::default())
}

pub fn sample_mix_with(w: &MixingDistribution, n: usize, n_samples: u64, seed: u64, exec: Exec) -> Result<SampleReport> {
    match w.support_upper() {
        Some(top) if top <= 1.0 => {}
        Some(top) => {
            return Err(Error::SamplerInapplicable(format!(
                "mixing law reaches {top} > 1; W∘n has no urn interpretation"
            )))
        }
        None => {
            return Err(Error::SamplerInapplicable(
                "mixing law has unbounded support; W∘n has no urn interpretation".into(),
            ))
        }
    }
    let exact = mix_binomial(w, n)?;
    let sampler = MixerSampler::new(w);
    let (counts, overflow) = tally(n_samples, seed, n, exec, |rng| {
        let v = sampler.draw(rng);
        (0..n).filter(|_| rng.gen::<f64>() <= v).count()
    })?;
    Ok(SampleReport::build(seed, &counts, overflow, &exact))
}

/// `N(Y)` sampled as a Poisson count with random mean `Y`.
pub fn sample_mixed_poisson(y: &MixingDistribution, n_samples: u64, seed: u64) -> Result<SampleReport> {
    sample_mixed_poisson_with(y, n_samples, seed, Exec::default())
}

pub fn sample_mixed_poisson_with(y: &MixingDistribution, n_samples: u64, seed: u64, exec: Exec) -> Result<SampleReport> {
    let (exact, _) = truncated_mixed_poisson_to_tail(y, 1e-12, 1_000_000)?;
    let sampler = MixerSampler::new(y);
    let (counts, overflow) = tally(n_samples, seed, exact.degree(), exec, |rng| {
        let mean = sampler.draw(rng);
        if mean <= 0.0 {
            0
        } else {
            Poisson::new(mean).expect("positive mean").sample(rng) as usize
        }
    })?;
    Ok(SampleReport::build(seed, &counts, overflow, &exact))
}

/// Sibuya(γ) by its sequential-trial definition: trial `k` succeeds with
/// probability `γ/k` and `X` is the first success. Values past `n_max` are
/// reported as overflow.
pub fn sample_sibuya(gamma: f64, n_max: usize, n_samples: u64, seed: u64) -> Result<SampleReport> {
    sample_sibuya_with(gamma, n_max, n_samples, seed, Exec::default())
}

pub fn sample_sibuya_with(gamma: f64, n_max: usize, n_samples: u64, seed: u64, exec: Exec) -> Result<SampleReport> {
    let (exact, _) = truncated_sibuya(gamma, n_max)?;
    let (counts, overflow) = tally(n_samples, seed, n_max, exec, |rng| {
        (1..=n_max).find(|&k| rng.gen::<f64>() < gamma / k as f64).unwrap_or(n_max + 1)
    })?;
    Ok(SampleReport::build(seed, &counts, overflow, &exact))
}

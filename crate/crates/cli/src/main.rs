//! `thinmix`: batch front end for binomial thinning and mixing.
//!
//! Exit status is 0 on success, 2 for invalid input or a domain error and 3
//! for I/O failures.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thinmix_core::io::{parse_dist_with, pmf_from_str_with};
use thinmix_core::limits::{self, MixtureSpec, PoissonSpec, TruncatedSpec};
use thinmix_core::mixing::{self, FamilySpec};
use thinmix_core::{mc, pmf, thinning, Error, Exec, FinitePmf, MixingDistribution, TailReport};

use config::CliConfig;
use output::{Format, Output};

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Domain { name, .. } => Failure::Invalid(format!("{name} out of range: {e}")),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "thinmix", version, about = "Binomial thinning and binomial mixing of count distributions")]
struct Cli {
    /// JSON config with tolerances, default truncation point, seed and output format.
    #[arg(long, global = true, env = "THINMIX_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// A pmf from a JSON/CSV file or a shorthand such as `uniform:6`.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct PmfInput {
    input: Option<PathBuf>,
    #[arg(long)]
    dist: Option<String>,
}

#[derive(Args)]
struct Family {
    /// pointmass, discrete, uniform01, scaled_uniform, beta, scaled_beta,
    /// gamma, exponential, erlang, chisquare
    #[arg(long)]
    family: String,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Vec<f64>,
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Law of α∘X.
    Thin {
        #[command(flatten)]
        input: PmfInput,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Law of Z with X ~ α∘Z.
    Unthin {
        #[command(flatten)]
        input: PmfInput,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Minimal thinning parameter ρ(X) and its witness.
    Rho {
        #[command(flatten)]
        input: PmfInput,
    },
    /// Whether X is an α-thinning.
    Member {
        #[command(flatten)]
        input: PmfInput,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Law of the sum of independent inputs.
    Convolve {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        dist: Vec<String>,
    },
    /// Law of W∘n.
    Mix {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        n: usize,
    },
    /// Minimal mixing scale σ_n(W).
    Sigma {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        n: usize,
    },
    /// Whether E(1-sW)^n is a proper a.p.g.f.
    Bmember {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        n: usize,
    },
    /// Splits N(Y) into B·(α∘Z).
    Factorize {
        #[command(flatten)]
        family: Family,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Convergence reports for the limit theorems.
    Limits {
        #[command(subcommand)]
        kind: LimitsKind,
    },
    /// Monte Carlo check of an exact law.
    Sample {
        #[command(subcommand)]
        kind: SampleKind,
    },
}

#[derive(Subcommand)]
enum LimitsKind {
    Poisson { spec: PathBuf },
    Mixture { spec: PathBuf },
    Truncated { spec: PathBuf },
}

#[derive(Subcommand)]
enum SampleKind {
    Thin {
        #[command(flatten)]
        input: PmfInput,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
    Mix {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    Mpoisson {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        sampling: Sampling,
    },
}

struct Ctx {
    config: CliConfig,
}

impl Ctx {
    fn read_text(&self, path: &Path) -> Outcome<String> {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
    }

    fn read_pmf(&self, path: &Path) -> Outcome<FinitePmf> {
        let text = self.read_text(path)?;
        pmf_from_str_with(&text, &self.config.tolerances())
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    }

    fn shorthand(&self, spec: &str) -> Outcome<(FinitePmf, Option<TailReport>)> {
        Ok(parse_dist_with(spec, self.config.n_max_default)?)
    }

    fn load(&self, input: &PmfInput) -> Outcome<(FinitePmf, Option<TailReport>)> {
        match (&input.input, &input.dist) {
            (Some(path), _) => Ok((self.read_pmf(path)?, None)),
            (None, Some(spec)) => self.shorthand(spec),
            (None, None) => Err(Failure::Invalid("no input pmf given".into())),
        }
    }

    fn spec<T: serde::de::DeserializeOwned>(&self, path: &Path) -> Outcome<T> {
        let text = self.read_text(path)?;
        serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    }
}

fn mixing_law(f: &Family) -> Outcome<MixingDistribution> {
    Ok(MixingDistribution::try_from(FamilySpec {
        family: f.family.clone(),
        params: f.params.clone(),
    })?)
}

/// Tail of a law derived from a truncated input: whatever mass is missing.
fn carried_tail(pmf: &FinitePmf, source: Option<TailReport>) -> Option<TailReport> {
    source.map(|t| TailReport {
        truncation_point: t.truncation_point,
        tail_mass: (1.0 - pmf.mass()).max(0.0),
    })
}

fn sample_output(report: mc::SampleReport) -> Output {
    let passes = report.passes();
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["passes"] = json!(passes);
    Output::Record(v)
}

fn run(cli: &Cli, ctx: &Ctx) -> Outcome<Output> {
    let tol = ctx.config.tolerances();
    let exec = Exec::default();
    let out = match &cli.command {
        Command::Thin { input, alpha } => {
            let (x, tail) = ctx.load(input)?;
            let t = pmf::thin(&x, *alpha)?;
            let tail = carried_tail(&t, tail);
            Output::Pmf { pmf: t, tail }
        }
        Command::Unthin { input, alpha } => {
            let (x, tail) = ctx.load(input)?;
            let z = thinning::unthin_with(&x, *alpha, &tol)?;
            let tail = carried_tail(&z, tail);
            Output::Pmf { pmf: z, tail }
        }
        Command::Rho { input } => {
            let (x, _) = ctx.load(input)?;
            Output::record(&thinning::rho_with(&x, &tol))
        }
        Command::Member { input, alpha } => {
            let (x, _) = ctx.load(input)?;
            let member = thinning::is_member_with(&x, *alpha, &tol)?;
            let p_star = thinning::star_coefficients(&x, *alpha)?.p_star();
            Output::Record(json!({ "alpha": alpha, "member": member, "p_star": p_star }))
        }
        Command::Convolve { inputs, dist } => {
            let mut laws = Vec::new();
            for path in inputs {
                laws.push(ctx.read_pmf(path)?);
            }
            for spec in dist {
                laws.push(ctx.shorthand(spec)?.0);
            }
            if laws.len() < 2 {
                return Err(Failure::Invalid("convolve needs at least two inputs".into()));
            }
            let sum = laws[1..].iter().fold(laws[0].clone(), |acc, x| pmf::convolve(&acc, x));
            Output::pmf(sum)
        }
        Command::Mix { family, n } => Output::pmf(mixing::mix_binomial_with(&mixing_law(family)?, *n, &tol)?),
        Command::Sigma { family, n } => Output::record(&mixing::sigma_with(&mixing_law(family)?, *n, &tol)?),
        Command::Bmember { family, n } => {
            let w = mixing_law(family)?;
            mixing::kn_set(*n)?;
            let v = mixing::b_n_violation(&w, *n, &tol);
            Output::Record(json!({
                "n": n,
                "member": v.is_none(),
                "violating_k": v.map(|v| v.0),
                "violation": v.map(|v| v.1),
            }))
        }
        Command::Factorize { family, alpha, n_max } => {
            let y = mixing_law(family)?;
            let f = mixing::mixed_poisson_factorize(&y, *alpha, n_max.unwrap_or(ctx.config.n_max_default))?;
            Output::record(&f)
        }
        Command::Limits { kind } => Output::Report(match kind {
            LimitsKind::Poisson { spec } => limits::poisson_approximation(&ctx.spec::<PoissonSpec>(spec)?, exec)?,
            LimitsKind::Mixture { spec } => limits::mixture_limit_with(&ctx.spec::<MixtureSpec>(spec)?, exec, &tol)?,
            LimitsKind::Truncated { spec } => limits::truncated_thinning_limit(&ctx.spec::<TruncatedSpec>(spec)?, exec)?,
        }),
        Command::Sample { kind } => {
            let seed = |s: &Sampling| s.seed.unwrap_or(ctx.config.seed);
            sample_output(match kind {
                SampleKind::Thin { input, alpha, sampling } => {
                    let (x, _) = ctx.load(input)?;
                    mc::sample_thin_with(&x, *alpha, sampling.samples, seed(sampling), exec)?
                }
                SampleKind::Mix { family, n, sampling } => {
                    mc::sample_mix_with(&mixing_law(family)?, *n, sampling.samples, seed(sampling), exec)?
                }
                SampleKind::Mpoisson { family, sampling } => {
                    mc::sample_mixed_poisson_with(&mixing_law(family)?, sampling.samples, seed(sampling), exec)?
                }
            })
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = CliConfig::load(cli.config.as_deref()).and_then(|config| {
        let ctx = Ctx { config };
        let output = run(&cli, &ctx)?;
        let text = output.render(cli.format.unwrap_or(ctx.config.output_format));
        match &cli.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

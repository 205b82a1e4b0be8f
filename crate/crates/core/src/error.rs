use thiserror::Error;

/// Errors raised by the distribution operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("not an {alpha}-thinning: p*_{index}({alpha}) = {value:e} < 0")]
    NotRepresentable { alpha: f64, index: usize, value: f64 },

    #[error("E(1-sW)^{n} is not a proper a.p.g.f.: E[W^k(1-W)^(n-k)] = {value:e} < 0 at k = {k}")]
    NotAMixture { n: usize, k: usize, value: f64 },

    #[error("sampler not applicable: {0}")]
    SamplerInapplicable(String),

    #[error("infeasible (n, a_n) pairs: {0:?}")]
    Infeasible(Vec<(usize, f64)>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_half_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "(0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "(0, inf)",
        })
    }
}

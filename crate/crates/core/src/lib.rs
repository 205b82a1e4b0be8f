//! Binomial thinning `α∘X` and binomial mixing `W∘n` on count distributions
//! with bounded support.
//!
//! * [`pmf`]: the finite pmf type and elementary operators (thinning,
//!   convolution, generating functions, zero truncation, distances).
//! * [`families`]: named constructors, including truncated infinite-support
//!   laws reported with their tail mass.
//! * [`thinning`]: membership in the α-thinned class, inverse thinning and the
//!   minimal thinning parameter `ρ(X)`.
//! * [`mixing`]: mixing laws, proper binomial mixtures, `σ_n(W)` and the
//!   mixed-Poisson factorization.
//! * [`limits`]: exact convergence harnesses for the thinning limit theorems.
//! * [`mc`]: seeded Monte Carlo samplers used as independent oracles.
//! * [`io`]: JSON/CSV readers and writers shared with the CLI.

pub mod error;
pub mod families;
pub mod io;
pub mod limits;
pub mod mc;
pub mod mixing;
pub mod numeric;
pub mod par;
pub mod pmf;
pub mod thinning;
pub mod tolerance;

pub use error::{Error, Result};
pub use mixing::{MixingDistribution, SigmaResult};
pub use par::Exec;
pub use pmf::{FinitePmf, TailReport};
pub use thinning::{RhoMethod, RhoResult};
pub use tolerance::Tolerances;

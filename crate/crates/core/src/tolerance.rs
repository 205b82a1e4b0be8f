use serde::{Deserialize, Serialize};

/// Numerical tolerances governing validation and sign decisions.
///
/// `eps_mass` bounds `|Σ p_k - 1|`, `eps_zero` decides when a probability
/// counts as zero (holes), `eps_sign` is the relative slack for the sign
/// conditions behind membership tests and `eps_root` the relative residual
/// accepted at a root of `g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub eps_mass: f64,
    pub eps_zero: f64,
    pub eps_sign: f64,
    pub eps_root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_mass: 1e-12,
            eps_zero: 1e-12,
            eps_sign: 1e-11,
            eps_root: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        [self.eps_mass, self.eps_zero, self.eps_sign, self.eps_root]
            .iter()
            .all(|e| *e > 0.0 && e.is_finite())
    }
}

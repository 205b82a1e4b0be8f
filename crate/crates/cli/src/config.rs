use std::path::Path;

use serde::Deserialize;
use thinmix_core::io::DEFAULT_N_MAX;
use thinmix_core::Tolerances;

use crate::output::Format;
use crate::Failure;

/// Settings read from the JSON file named by `--config` or `THINMIX_CONFIG`.
/// Missing keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub eps_mass: f64,
    pub eps_zero: f64,
    pub eps_sign: f64,
    pub eps_root: f64,
    pub n_max_default: usize,
    pub seed: u64,
    pub output_format: Format,
}

impl Default for CliConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            eps_mass: t.eps_mass,
            eps_zero: t.eps_zero,
            eps_sign: t.eps_sign,
            eps_root: t.eps_root,
            n_max_default: DEFAULT_N_MAX,
            seed: 20_240_601,
            output_format: Format::Json,
        }
    }
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", path.display())))?;
        let config: CliConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), Failure> {
        if !self.tolerances().is_valid() {
            return Err(Failure::Invalid("config: tolerances must be positive and finite".into()));
        }
        if self.n_max_default < 1 {
            return Err(Failure::Invalid("config: n_max_default must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            eps_mass: self.eps_mass,
            eps_zero: self.eps_zero,
            eps_sign: self.eps_sign,
            eps_root: self.eps_root,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: CliConfig = serde_json::from_str(r#"{"eps_sign": 1e-9, "output_format": "csv"}"#).unwrap();
        assert_eq!(c.eps_sign, 1e-9);
        assert_eq!(c.eps_mass, 1e-12);
        assert_eq!(c.output_format, Format::Csv);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn invalid_configs() {
        let bad: CliConfig = serde_json::from_str(r#"{"eps_zero": 0}"#).unwrap();
        assert!(bad.validate().is_err());
        let bad: CliConfig = serde_json::from_str(r#"{"n_max_default": 0}"#).unwrap();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<CliConfig>(r#"{"eps": 1}"#).is_err());
    }
}

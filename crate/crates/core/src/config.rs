//! Run configuration, loadable from TOML and overridden by CLI flags.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::EnumLimits;
use crate::forest::Tolerances;
use crate::io::FULL_DIGITS;
use crate::perturbation::DEFAULT_REFRESH_INTERVAL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("alpha must be a finite positive number, got {0}")]
    Alpha(f64),
    #[error("tolerance `{name}` must be positive, got {value}")]
    Tolerance { name: &'static str, value: f64 },
    #[error("digits must be between 1 and 17, got {0}")]
    Digits(usize),
    #[error("cannot read config: {0}")]
    Toml(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub tolerances: Tolerances,
    /// Entrywise tolerance of the rank-one certificate.
    pub rank_one_tol: f64,
    pub limits: EnumLimits,
    pub format: OutputFormat,
    pub refresh_interval: usize,
    /// Significant digits of numeric output.
    pub digits: usize,
    /// Highest power kept in the series partial sum.
    pub terms: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            tolerances: Tolerances::default(),
            rank_one_tol: 1e-10,
            limits: EnumLimits::default(),
            format: OutputFormat::Csv,
            refresh_interval: DEFAULT_REFRESH_INTERVAL,
            digits: FULL_DIGITS,
            terms: 60,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        for (name, value) in [
            ("stochastic", self.tolerances.stochastic),
            ("structural_zero", self.tolerances.structural_zero),
            ("rank_one_tol", self.rank_one_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::Tolerance { name, value });
            }
        }
        if !(1..=FULL_DIGITS).contains(&self.digits) {
            return Err(ConfigError::Digits(self.digits));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = RunConfig::from_toml("alpha = 0.5\nformat = \"json\"\n[limits]\nmax_vertices = 6\nmax_edges = 9\n")
            .unwrap();
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.limits, EnumLimits { max_vertices: 6, max_edges: 9 });
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.refresh_interval, 32);
    }

    #[test]
    fn rejects_invalid_values() {
        assert_eq!(RunConfig::from_toml("alpha = -1.0"), Err(ConfigError::Alpha(-1.0)));
        assert!(matches!(
            RunConfig::from_toml("[tolerances]\nstochastic = 0.0\nstructural_zero = 1e-12"),
            Err(ConfigError::Tolerance { name: "stochastic", .. })
        ));
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(ConfigError::Toml(_))));
    }
}

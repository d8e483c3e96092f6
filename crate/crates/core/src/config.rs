//! Run configuration shared by every subcommand.
//!
//! Values are layered: built-in defaults, then the `LOGVVMF_PRECISION`
//! environment variable, then a JSON config file, then command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PRECISION_ENV: &str = "LOGVVMF_PRECISION";

/// Digits carried by `f64`; larger requests are clamped.
pub const MAX_PRECISION: usize = 17;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Decimal digits written for floating-point output.
    pub precision: usize,
    /// Coset cutoff `N` for Poincare sums.
    pub n_trunc: u64,
    /// Number of q-orders fitted during extraction.
    pub nq: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            precision: MAX_PRECISION,
            n_trunc: 100,
            nq: 4,
            seed: 0,
            format: Format::Json,
        }
    }
}

/// Flag values that override the file and environment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub precision: Option<usize>,
    pub n_trunc: Option<u64>,
    pub nq: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl RunConfig {
    /// Builds the effective configuration. `env_precision` is the raw value of
    /// [`PRECISION_ENV`], passed in so callers control the environment.
    pub fn load(file: Option<&Path>, env_precision: Option<&str>, flags: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(raw) = env_precision {
            cfg.precision = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("{PRECISION_ENV}={raw:?} is not a digit count")))?;
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let from_file: serde_json::Value = serde_json::from_str(&text)?;
            let mut merged = serde_json::to_value(&cfg)?;
            if let (Some(m), Some(f)) = (merged.as_object_mut(), from_file.as_object()) {
                for (k, v) in f {
                    m.insert(k.clone(), v.clone());
                }
            } else {
                return Err(Error::InvalidInput("config file must hold a JSON object".into()));
            }
            cfg = serde_json::from_value(merged)?;
        }
        if let Some(p) = flags.precision {
            cfg.precision = p;
        }
        if let Some(n) = flags.n_trunc {
            cfg.n_trunc = n;
        }
        if let Some(n) = flags.nq {
            cfg.nq = n;
        }
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if let Some(f) = flags.format {
            cfg.format = f;
        }
        if cfg.precision == 0 {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
        if cfg.precision > MAX_PRECISION {
            log::warn!(
                "precision {} exceeds the {MAX_PRECISION} digits carried by f64; clamping",
                cfg.precision
            );
            cfg.precision = MAX_PRECISION;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn layering() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"precision": 9, "n_trunc": 40}}"#).unwrap();
        let flags = Overrides {
            n_trunc: Some(50),
            ..Default::default()
        };
        let cfg = RunConfig::load(Some(f.path()), Some("12"), &flags).unwrap();
        assert_eq!((cfg.precision, cfg.n_trunc, cfg.nq), (9, 50, 4));
        let cfg = RunConfig::load(None, Some("12"), &Overrides::default()).unwrap();
        assert_eq!(cfg.precision, 12);
        let cfg = RunConfig::load(None, Some("40"), &Overrides::default()).unwrap();
        assert_eq!(cfg.precision, MAX_PRECISION);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::load(None, Some("many"), &Overrides::default()).is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"precison": 9}}"#).unwrap();
        assert!(RunConfig::load(Some(f.path()), None, &Overrides::default()).is_err());
    }
}

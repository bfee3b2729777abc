//! The experiment configuration file (TOML).
//!
//! ```toml
//! horizon = 4096
//! seeds = 20            # or an explicit list: [1, 2, 3]
//! out = "results"
//!
//! [instance]
//! kind = "hard_b1"
//! k = 10
//!
//! [policy]
//! name = "exp3linear"
//!
//! [menu]
//! kind = "auto"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::policy::PolicySpec;
use super::scenario::{InstanceSource, MenuSpec};
use crate::error::{invalid, Error, Result};

/// A seed count `n` (meaning seeds `0..n`) or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }

    /// `"20"` or `"1,2,5"`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |_| Error::InvalidArgument(format!("bad seed list '{text}'"));
        if text.contains(',') {
            let v = text
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(bad))
                .collect::<Result<Vec<_>>>()?;
            Ok(Seeds::List(v))
        } else {
            Ok(Seeds::Count(text.trim().parse().map_err(bad)?))
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub policy: PolicySpec,
    #[serde(default)]
    pub menu: MenuSpec,
    pub horizon: u64,
    pub seeds: Seeds,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Write per-round tuples into the record files.
    #[serde(default = "default_true")]
    pub keep_rounds: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return invalid("horizon must be at least 1");
        }
        if self.seeds.resolve().is_empty() {
            return invalid("at least one seed is required");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Relative instance paths are resolved against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let InstanceSource::File { path: p } = &mut cfg.instance {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }
}

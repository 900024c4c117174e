//! Experiment configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use extrapolab_core::{FamilySpec, Grid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

impl ConfigError {
    pub(crate) fn field(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError::Field { path: path.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Identity,
    Exponents,
    Lemma33,
    Remark34,
    Mmax,
    Sawyer,
    Offdiag,
    Prop31a,
    Prop31b,
    Endpoint,
    Applications,
}

impl SuiteName {
    pub const ALL: [SuiteName; 11] = [
        SuiteName::Identity,
        SuiteName::Exponents,
        SuiteName::Lemma33,
        SuiteName::Remark34,
        SuiteName::Mmax,
        SuiteName::Sawyer,
        SuiteName::Offdiag,
        SuiteName::Prop31a,
        SuiteName::Prop31b,
        SuiteName::Endpoint,
        SuiteName::Applications,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Identity => "identity",
            SuiteName::Exponents => "exponents",
            SuiteName::Lemma33 => "lemma33",
            SuiteName::Remark34 => "remark34",
            SuiteName::Mmax => "mmax",
            SuiteName::Sawyer => "sawyer",
            SuiteName::Offdiag => "offdiag",
            SuiteName::Prop31a => "prop31a",
            SuiteName::Prop31b => "prop31b",
            SuiteName::Endpoint => "endpoint",
            SuiteName::Applications => "applications",
        }
    }

    /// The configuration shipped in `configs/<suite>.json`.
    pub fn bundled_config(self) -> &'static str {
        match self {
            SuiteName::Identity => include_str!("../configs/identity.json"),
            SuiteName::Exponents => include_str!("../configs/exponents.json"),
            SuiteName::Lemma33 => include_str!("../configs/lemma33.json"),
            SuiteName::Remark34 => include_str!("../configs/remark34.json"),
            SuiteName::Mmax => include_str!("../configs/mmax.json"),
            SuiteName::Sawyer => include_str!("../configs/sawyer.json"),
            SuiteName::Offdiag => include_str!("../configs/offdiag.json"),
            SuiteName::Prop31a => include_str!("../configs/prop31a.json"),
            SuiteName::Prop31b => include_str!("../configs/prop31b.json"),
            SuiteName::Endpoint => include_str!("../configs/endpoint.json"),
            SuiteName::Applications => include_str!("../configs/applications.json"),
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Refinement sweep; most suites compare consecutive entries.
    pub levels: Vec<u32>,
}

fn default_family() -> FamilySpec {
    FamilySpec::SHIFTED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub suite: SuiteName,
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub cases: Option<usize>,
    #[serde(default = "default_family")]
    pub family: FamilySpec,
    /// Suite-specific parameters; each suite parses its own block.
    #[serde(default)]
    pub params: serde_json::Value,
    /// Frozen regression values, compared within the suite's tolerance.
    #[serde(default)]
    pub goldens: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::field(if path == "." { "config".into() } else { path }, e.inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        ExperimentConfig::from_json(&text)
    }

    pub fn bundled(suite: SuiteName) -> Result<Self, ConfigError> {
        ExperimentConfig::from_json(suite.bundled_config())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::field(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.grid.levels.is_empty() {
            return Err(ConfigError::field("grid.levels", "at least one level is required"));
        }
        for (i, &l) in self.grid.levels.iter().enumerate() {
            Grid::new(self.grid.dim, l).map_err(|e| ConfigError::field(format!("grid.levels[{i}]"), e))?;
        }
        if self.cases == Some(0) {
            return Err(ConfigError::field("cases", "must be positive"));
        }
        // parse once so that parameter errors surface before any compute
        crate::suites::validate_params(self)
    }

    pub fn grids(&self) -> Vec<Grid> {
        self.grid.levels.iter().map(|&l| Grid::new(self.grid.dim, l).expect("validated")).collect()
    }

    pub fn cases_or(&self, default: usize) -> usize {
        self.cases.unwrap_or(default)
    }

    /// Typed view of `params`; a missing block gives the defaults.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T, ConfigError> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_path_to_error::deserialize(self.params.clone()).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "params".to_string() } else { format!("params.{path}") };
            ConfigError::field(path, e.inner())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for s in SuiteName::ALL {
            let cfg = ExperimentConfig::bundled(s).unwrap();
            assert_eq!(cfg.suite, s);
            assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        }
    }

    #[test]
    fn field_paths_in_errors() {
        let text = r#"{"schema_version":1,"suite":"mmax","seed":1,"grid":{"dim":1,"levels":[8]},"params":{"p":[2.0,"x"]}}"#;
        let msg = ExperimentConfig::from_json(text).unwrap_err().to_string();
        assert!(msg.starts_with("params.p[1]"), "{msg}");
        let text = r#"{"schema_version":2,"suite":"mmax","seed":1,"grid":{"dim":1,"levels":[8]}}"#;
        assert!(ExperimentConfig::from_json(text).unwrap_err().to_string().starts_with("schema_version"));
        let text = r#"{"schema_version":1,"suite":"mmax","seed":1,"grid":{"dim":1,"levels":[8]},"extra":0}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"schema_version":1,"suite":"mmax","grid":{"dim":1,"levels":[8]}}"#;
        assert!(ExperimentConfig::from_json(text).unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in SuiteName::ALL {
            assert_eq!(s.as_str().parse::<SuiteName>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<SuiteName>(), Err(ConfigError::UnknownSuite(_))));
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{McmcConfig, PriorSpec};
use crate::precision::PrecisionKind;

/// Which joint model to fit: DAGAR marginals or the proper-CAR comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    #[default]
    Bdagar,
    Gmcar,
}

impl ModelChoice {
    pub fn kind(self) -> PrecisionKind {
        match self {
            ModelChoice::Bdagar => PrecisionKind::Dagar,
            ModelChoice::Gmcar => PrecisionKind::Car,
        }
    }
}

impl fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelChoice::Bdagar => "BDAGAR",
            ModelChoice::Gmcar => "GMCAR",
        })
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdagar" => Ok(ModelChoice::Bdagar),
            "gmcar" => Ok(ModelChoice::Gmcar),
            _ => Err(Error::Config(format!("unknown model {s:?} (expected bdagar or gmcar)"))),
        }
    }
}

/// Transformation applied to outcomes before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    Log,
}

/// Everything a `fit` run needs besides the input files. Every field has a
/// default, so `{}` is a valid configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelChoice,
    /// `[first, second]`: the first disease is modelled marginally, the
    /// second conditionally on it. Defaults to the dataset's column order.
    pub disease_order: Option<[String; 2]>,
    /// Covariate columns per disease name. A disease without an entry uses
    /// the columns prefixed `<disease>_` if there are any, else every
    /// non-outcome column.
    pub covariates: BTreeMap<String, Vec<String>>,
    pub prior: PriorSpec,
    pub mcmc: McmcConfig,
    /// Region ids in DAGAR order; defaults to the graph file order.
    pub vertex_order: Option<Vec<String>>,
    pub transform: Transform,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses a JSON config. Values are checked by [`validate`](Self::validate),
    /// which [`fit`](crate::io::fit) calls, so overrides can be applied first.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        self.mcmc.validate()?;
        if let Some([a, b]) = &self.disease_order {
            if a == b {
                return Err(Error::Config(format!("disease_order repeats {a:?}")));
            }
        }
        Ok(())
    }

    /// Table label such as `BDAGAR (lung | esophagus)`: the second disease
    /// conditioned on the first.
    pub fn label(&self, diseases: &[String; 2]) -> String {
        format!("{} ({} | {})", self.model, diseases[1], diseases[0])
    }
}

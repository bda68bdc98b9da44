//! Pipeline configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use extremal_core::bvpp::FamilyTag;
use extremal_core::cmev::TargetThreshold;
use extremal_core::simulate::{demo_correlation, DEMO_MARKETS, DEMO_RETURNS, DEMO_SEED, DEMO_START_PRICES};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub input: InputConfig,
    pub simulate: SimConfig,
    pub margins: MarginConfig,
    pub cmev: CmevConfig,
    pub pp: PpConfig,
}

/// Where prices come from. Without a path the bundled demo panel is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub prices: Option<PathBuf>,
    pub delimiter: char,
}

/// Gaussian-copula price generator used by the `simulate` stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub markets: Vec<String>,
    pub correlation: Vec<Vec<f64>>,
    pub start_prices: Vec<f64>,
    pub n_returns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginConfig {
    /// Quantile levels tried for every market's GPD fit.
    pub grid: Vec<f64>,
    /// Threshold level used for the marginal transforms.
    pub level: f64,
    /// Per-market replacements for `level`.
    pub overrides: BTreeMap<String, f64>,
    pub histogram_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmevConfig {
    pub dep_quantile: f64,
    pub pred_quantile: f64,
    pub n_importance: usize,
    pub target: TargetThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpConfig {
    pub quantile: f64,
    pub families: Vec<FamilyTag>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: DEMO_SEED,
            out_dir: PathBuf::from("out"),
            input: InputConfig::default(),
            simulate: SimConfig::default(),
            margins: MarginConfig::default(),
            cmev: CmevConfig::default(),
            pp: PpConfig::default(),
        }
    }
}

impl Default for InputConfig {
    fn default() -> Self {
        Self { prices: None, delimiter: ',' }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            markets: DEMO_MARKETS.iter().map(|s| s.to_string()).collect(),
            correlation: demo_correlation(),
            start_prices: DEMO_START_PRICES.to_vec(),
            n_returns: DEMO_RETURNS,
        }
    }
}

impl Default for MarginConfig {
    fn default() -> Self {
        Self { grid: vec![0.70, 0.75, 0.80, 0.85, 0.90, 0.95], level: 0.70, overrides: BTreeMap::new(), histogram_bins: 20 }
    }
}

impl Default for CmevConfig {
    fn default() -> Self {
        Self { dep_quantile: 0.70, pred_quantile: 0.90, n_importance: 100_000, target: TargetThreshold::DependenceQuantile }
    }
}

impl Default for PpConfig {
    fn default() -> Self {
        Self { quantile: 0.70, families: FamilyTag::ALL.to_vec() }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.margins.grid.is_empty() {
            return Err(CliError::Config("margins.grid is empty".into()));
        }
        for &q in &self.margins.grid {
            unit("margins.grid", q)?;
        }
        unit("margins.level", self.margins.level)?;
        for (m, &q) in &self.margins.overrides {
            unit(&format!("margins.overrides.{m}"), q)?;
        }
        if self.margins.histogram_bins == 0 {
            return Err(CliError::Config("margins.histogram_bins must be positive".into()));
        }
        let c = &self.cmev;
        unit("cmev.dep_quantile", c.dep_quantile)?;
        unit("cmev.pred_quantile", c.pred_quantile)?;
        if c.dep_quantile <= 0.5 {
            return Err(CliError::Config("cmev.dep_quantile must exceed 0.5 (positive Laplace threshold)".into()));
        }
        if c.pred_quantile < c.dep_quantile {
            return Err(CliError::Config(format!(
                "cmev.pred_quantile = {} is below cmev.dep_quantile = {}",
                c.pred_quantile, c.dep_quantile
            )));
        }
        if c.n_importance == 0 {
            return Err(CliError::Config("cmev.n_importance must be positive".into()));
        }
        if let TargetThreshold::Quantile(q) = c.target {
            unit("cmev.target.quantile", q)?;
        }
        unit("pp.quantile", self.pp.quantile)?;
        if self.pp.families.is_empty() {
            return Err(CliError::Config("pp.families is empty".into()));
        }
        let s = &self.simulate;
        if s.markets.len() != s.correlation.len() || s.markets.len() != s.start_prices.len() || s.n_returns == 0 {
            return Err(CliError::Config("simulate: markets, correlation rows and start prices must match".into()));
        }
        Ok(())
    }

    /// Marginal threshold level for `market`.
    pub fn margin_level(&self, market: &str) -> f64 {
        self.margins.overrides.get(market).copied().unwrap_or(self.margins.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        let back: PipelineConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg: PipelineConfig = toml::from_str("seed = 7\n[cmev]\npred_quantile = 0.95\n[margins.overrides]\nIMOEX = 0.8\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.cmev.pred_quantile, 0.95);
        assert_eq!(cfg.cmev.dep_quantile, 0.7);
        assert_eq!(cfg.margin_level("IMOEX"), 0.8);
        assert_eq!(cfg.margin_level("IBOV"), 0.7);
    }

    #[test]
    fn prediction_below_dependence_is_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.cmev.pred_quantile = 0.5;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sede = 1").is_err());
    }

    #[test]
    fn quantiles_outside_unit_interval() {
        let mut cfg = PipelineConfig::default();
        cfg.margins.grid.push(1.2);
        assert!(cfg.validate().is_err());
    }
}

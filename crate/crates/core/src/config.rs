//! Versioned JSON run configuration.
//!
//! Every block is optional; missing values fall back to per-campaign
//! defaults. Unknown keys are rejected and range errors name the offending
//! field path, e.g. `algorithm.delta`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::DepthPolicy;
use crate::ft::ProblemInstance;
use crate::rfe::KStrategy;

pub const SCHEMA: &str = "rfe-lab/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("unsupported schema `{found}` (expected `{SCHEMA}`)")]
    Schema { found: String },
    #[error("{path}: {message}")]
    Range { path: String, message: String },
}

fn range_err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    #[serde(alias = "validate")]
    ValidateBound,
}

impl CampaignKind {
    pub fn name(self) -> &'static str {
        match self {
            CampaignKind::Fig2 => "fig2",
            CampaignKind::Fig3 => "fig3",
            CampaignKind::Fig4 => "fig4",
            CampaignKind::Fig5 => "fig5",
            CampaignKind::Fig6 => "fig6",
            CampaignKind::ValidateBound => "validate-bound",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            CampaignKind::Fig2 | CampaignKind::Fig3 | CampaignKind::ValidateBound
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<u64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_strategy: Option<KStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_policy: Option<DepthPolicy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignBlock {
    pub kind: CampaignKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_decades: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_decade: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plots: Option<bool>,
}

impl CampaignBlock {
    pub fn new(kind: CampaignKind) -> Self {
        Self {
            kind,
            seed: None,
            trials: None,
            lambdas: None,
            epsilons: None,
            epsilon_decades: None,
            points_per_decade: None,
            n_values: None,
            rates: None,
            depths: None,
            plots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub campaign: Option<CampaignBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<ProblemInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
}

impl RunConfig {
    pub fn for_kind(kind: CampaignKind) -> Self {
        Self {
            schema: SCHEMA.into(),
            campaign: Some(CampaignBlock::new(kind)),
            algorithm: None,
            instance: None,
            model: None,
        }
    }

    /// Pretty-printed JSON with a fixed key order and a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA {
            return Err(ConfigError::Schema {
                found: self.schema.clone(),
            });
        }
        if let Some(a) = &self.algorithm {
            validate_algorithm(a)?;
        }
        if let Some(i) = &self.instance {
            validate_instance(i)?;
        }
        if let Some(m) = &self.model {
            validate_model(m)?;
        }
        if let Some(c) = &self.campaign {
            validate_campaign(c)?;
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(path: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(range_err(path, format!("must be positive and finite, got {x}")))
    }
}

fn unit_open(path: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(range_err(path, format!("must lie in (0, 1), got {x}")))
    }
}

fn non_negative(path: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(range_err(path, format!("must be non-negative and finite, got {x}")))
    }
}

fn validate_algorithm(a: &AlgorithmBlock) -> Result<(), ConfigError> {
    if let Some(t) = a.theta {
        if !(0.0..std::f64::consts::TAU).contains(&t) {
            return Err(range_err("algorithm.theta", format!("must lie in [0, 2π), got {t}")));
        }
    }
    if let Some(e) = a.epsilon {
        positive("algorithm.epsilon", e)?;
    }
    if let Some(d) = a.delta {
        unit_open("algorithm.delta", d)?;
    }
    if let Some(l) = a.lambda {
        non_negative("algorithm.lambda", l)?;
    }
    if let Some(j) = a.grid {
        if j < 2 {
            return Err(range_err("algorithm.J", format!("must be at least 2, got {j}")));
        }
    }
    if let Some(k) = a.max_depth {
        if k < 2 {
            return Err(range_err("algorithm.K", format!("must be at least 2, got {k}")));
        }
        let j = a
            .grid
            .or_else(|| a.epsilon.map(crate::rfe::grid_size));
        if let Some(j) = j {
            if k > j {
                return Err(range_err(
                    "algorithm.K",
                    format!("violates K ≤ J (K = {k}, J = {j})"),
                ));
            }
        }
    }
    if let (Some(j), Some(e)) = (a.grid, a.epsilon) {
        if std::f64::consts::TAU / j as f64 > e * (1.0 + 1e-12) {
            return Err(range_err(
                "algorithm.J",
                format!("grid resolution 2π/{j} is coarser than epsilon = {e}"),
            ));
        }
    }
    if a.shots == Some(0) {
        return Err(range_err("algorithm.M", "must be at least 1"));
    }
    Ok(())
}

fn validate_instance(i: &ProblemInstance) -> Result<(), ConfigError> {
    if i.n == 0 {
        return Err(range_err("instance.N", "must be at least 1"));
    }
    if i.depth == 0 {
        return Err(range_err("instance.D", "must be at least 1"));
    }
    positive("instance.epsilon", i.epsilon)?;
    unit_open("instance.delta", i.delta)
}

fn validate_model(m: &ModelBlock) -> Result<(), ConfigError> {
    positive("model.A", m.a)?;
    positive("model.B", m.b)?;
    if m.d_min == Some(0) {
        return Err(range_err("model.d_min", "must be at least 1"));
    }
    if let (Some(lo), Some(hi)) = (m.d_min, m.d_max) {
        if lo > hi {
            return Err(range_err("model.d_max", format!("must be ≥ d_min = {lo}, got {hi}")));
        }
    }
    Ok(())
}

fn validate_campaign(c: &CampaignBlock) -> Result<(), ConfigError> {
    if c.trials == Some(0) {
        return Err(range_err("campaign.trials", "must be at least 1"));
    }
    let lists: [(&str, &Option<Vec<f64>>, fn(&str, f64) -> Result<(), ConfigError>); 3] = [
        ("campaign.lambdas", &c.lambdas, non_negative),
        ("campaign.epsilons", &c.epsilons, positive),
        ("campaign.rates", &c.rates, rate_in_unit),
    ];
    for (name, list, check) in lists {
        if let Some(v) = list {
            if v.is_empty() {
                return Err(range_err(name, "must not be empty"));
            }
            for (i, &x) in v.iter().enumerate() {
                check(&format!("{name}[{i}]"), x)?;
            }
        }
    }
    if let Some([lo, hi]) = c.epsilon_decades {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && hi <= 1.0) {
            return Err(range_err(
                "campaign.epsilon_decades",
                format!("need lo < hi ≤ 1, got [{lo}, {hi}]"),
            ));
        }
    }
    if c.points_per_decade == Some(0) {
        return Err(range_err("campaign.points_per_decade", "must be at least 1"));
    }
    for (name, list) in [("campaign.n_values", &c.n_values), ("campaign.depths", &c.depths)] {
        if let Some(v) = list {
            if v.is_empty() {
                return Err(range_err(name, "must not be empty"));
            }
            if let Some(i) = v.iter().position(|&x| x == 0) {
                return Err(range_err(format!("{name}[{i}]"), "must be at least 1"));
            }
        }
    }
    Ok(())
}

fn rate_in_unit(path: &str, x: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(range_err(path, format!("must lie in [0, 1], got {x}")))
    }
}

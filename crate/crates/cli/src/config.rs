//! The single JSON document every command reads.

use std::path::Path;

use qdp_core::asymptotics::EpsPower;
use qdp_core::poset::PowerSet;
use qdp_core::report::Scales;
use qdp_core::simulate::{characteristics_from_rates, ModelTemplate, Record};
use qdp_core::validate::{Check, PipelineConfig, Thresholds};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Exactly one of the `(F, G)` pair or `model`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Input {
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<PowerSet>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<PowerSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelTemplate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramOptions {
    pub points: usize,
    /// Smallest λ on the grid, as `ε^{lam_floor_exp}`.
    pub lam_floor_exp: f64,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        DiagramOptions { points: 200, lam_floor_exp: 3.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// `None` is `λ ≡ 0`.
    #[serde(default)]
    pub lambda: Option<EpsPower>,
    pub x0: f64,
    pub t_end: f64,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub record: Option<Record>,
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default)]
    pub format: PathFormat,
}

/// A pipeline without its model, which comes from `input`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default)]
    pub lambda: Option<EpsPower>,
    pub a: EpsPower,
    pub b: EpsPower,
    #[serde(default)]
    pub center: Option<EpsPower>,
    pub y0: f64,
    pub replicas: usize,
    pub seed: u64,
    pub check: Check,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Input,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Scales>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub diagram: DiagramOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        let i = &self.input;
        match (&i.f, &i.g, &i.model) {
            (Some(_), Some(_), None) | (None, None, Some(_)) => {}
            _ => return Err(Failure::Usage("input needs exactly one of {F, G} or model".into())),
        }
        if let Some(m) = &i.model {
            if m.jumps.is_empty() {
                return Err(Failure::Usage("model has no jumps".into()));
            }
        }
        if self.epsilon.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Failure::Usage("every ε must lie in (0, 1)".into()));
        }
        if self.simulation.as_ref().is_some_and(|s| s.replicas == 0) || self.validation.as_ref().is_some_and(|v| v.replicas == 0) {
            return Err(Failure::Usage("replica count must be positive".into()));
        }
        Ok(())
    }

    /// `(F, G)`, derived from the model's rates when needed.
    pub fn characteristics(&self) -> Result<(PowerSet, PowerSet), Failure> {
        match (&self.input.f, &self.input.g, &self.input.model) {
            (Some(f), Some(g), _) => Ok((f.clone(), g.clone())),
            (_, _, Some(m)) => {
                let rc = characteristics_from_rates(&m.jumps).map_err(Failure::Analysis)?;
                Ok((rc.f, rc.g))
            }
            _ => unreachable!("checked on load"),
        }
    }

    pub fn model(&self) -> Result<&ModelTemplate, Failure> {
        self.input.model.as_ref().ok_or_else(|| Failure::Usage("this command needs input.model".into()))
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, Failure> {
        let v = self.validation.as_ref().ok_or_else(|| Failure::Usage("validate needs a validation section".into()))?;
        Ok(PipelineConfig {
            model: self.model()?.clone(),
            lambda: v.lambda.clone(),
            a: v.a.clone(),
            b: v.b.clone(),
            center: v.center.clone(),
            y0: v.y0,
            replicas: v.replicas,
            seed: v.seed,
            check: v.check.clone(),
            thresholds: v.thresholds.clone(),
        })
    }
}

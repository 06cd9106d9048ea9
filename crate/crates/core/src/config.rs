//! TOML run configuration.
//!
//! See `config/example.toml` at the repository root for an annotated
//! example. Every field is optional; an empty document runs the bundled
//! sample with baseline parameters, the three named inflow scenarios and
//! the default sensitivity settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::DEFAULT_THRESHOLD;
use crate::params::{ModelParams, ParamName};
use crate::scenario::{Projection, ScenarioSpec};
use crate::sensitivity::{linspace, Outcome, ParamRange, DEFAULT_AF_GRID, DEFAULT_KF_GRID};
use crate::state::Regime;

/// Seed used when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_200_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    /// Estimate r_M, r_D from the loaded series.
    #[default]
    Estimate,
    /// Use r_M, r_D from the params block.
    Fixed,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Degree CSV; the bundled sample when absent.
    pub data: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub override_feasibility: bool,
    pub threads: Option<usize>,
    #[serde(default)]
    pub composition: CompositionMode,
    /// Overrides over the baseline parameters, keyed by symbol (`a_F`, `K_F`, ...).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(default)]
    pub sensitivity: SensitivityConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub label: String,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default = "one")]
    pub inflow_scale: f64,
    #[serde(default)]
    pub projection: Projection,
    #[serde(default)]
    pub horizon: u32,
    #[serde(rename = "initial_P")]
    pub initial_p: Option<f64>,
    #[serde(rename = "initial_F")]
    pub initial_f: Option<f64>,
    pub direct_inflow: Option<Vec<f64>>,
    /// Per-scenario overrides applied after the global params block.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    /// Regime for OAT and PRCC runs. The heatmap is always vacancy-limited.
    pub regime: Regime,
    pub threshold: f64,
    pub oat: OatConfig,
    pub prcc: PrccConfig,
    pub heatmap: HeatmapConfig,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            regime: Regime::Unconstrained,
            threshold: DEFAULT_THRESHOLD,
            oat: OatConfig::default(),
            prcc: PrccConfig::default(),
            heatmap: HeatmapConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OatConfig {
    pub parameters: Vec<String>,
    pub points: usize,
    /// Relative half-width of each sweep around the baseline value.
    pub span: f64,
    pub skip_infeasible: bool,
}

impl Default for OatConfig {
    fn default() -> Self {
        OatConfig {
            parameters: eligible_names(),
            points: 21,
            span: 0.5,
            skip_infeasible: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrccConfig {
    pub parameters: Vec<String>,
    pub samples: usize,
    pub span: f64,
    pub outcome: Outcome,
}

impl Default for PrccConfig {
    fn default() -> Self {
        PrccConfig {
            parameters: eligible_names(),
            samples: 1000,
            span: 0.5,
            outcome: Outcome::FinalF,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapConfig {
    #[serde(rename = "a_F")]
    pub a_f: GridSpec,
    #[serde(rename = "K_F")]
    pub k_f: GridSpec,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        let (start, stop, points) = DEFAULT_AF_GRID;
        let a_f = GridSpec { start, stop, points };
        let (start, stop, points) = DEFAULT_KF_GRID;
        let k_f = GridSpec { start, stop, points };
        HeatmapConfig { a_f, k_f }
    }
}

fn one() -> f64 {
    1.0
}

fn eligible_names() -> Vec<String> {
    ParamName::SWEEP_ELIGIBLE
        .iter()
        .map(|p| p.as_str().to_string())
        .collect()
}

fn apply_overrides(mut params: ModelParams, overrides: &BTreeMap<String, f64>) -> Result<ModelParams> {
    for (name, &value) in overrides {
        let key: ParamName = name.parse()?;
        params.set(key, value);
    }
    // keep the composition consistent when only one share is given
    match (overrides.contains_key("r_M"), overrides.contains_key("r_D")) {
        (true, false) => params.r_d = 1.0 - params.r_m,
        (false, true) => params.r_m = 1.0 - params.r_d,
        _ => {}
    }
    Ok(params)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text =
            std::str::from_utf8(&bytes).map_err(|e| Error::Config(format!("{}: not utf-8: {e}", path.display())))?;
        Ok((Self::from_toml(text)?, bytes))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Baseline parameters with the global overrides applied. Not yet
    /// checked for feasibility.
    pub fn resolved_params(&self) -> Result<ModelParams> {
        apply_overrides(ModelParams::BASELINE, &self.params)
    }

    /// Scenario specs built on `params`; the three named inflow scenarios
    /// when the config lists none.
    pub fn scenario_specs(&self, params: &ModelParams) -> Result<Vec<ScenarioSpec>> {
        if self.scenarios.is_empty() {
            return Ok(ScenarioSpec::named_defaults(Regime::VacancyLimited, *params));
        }
        let mut seen = std::collections::BTreeSet::new();
        self.scenarios
            .iter()
            .map(|e| {
                if !seen.insert(e.label.as_str()) {
                    return Err(Error::Config(format!("duplicate scenario label `{}`", e.label)));
                }
                Ok(ScenarioSpec {
                    label: e.label.clone(),
                    regime: e.regime,
                    inflow_scale: e.inflow_scale,
                    projection: e.projection,
                    horizon: e.horizon,
                    initial_p: e.initial_p,
                    initial_f: e.initial_f,
                    direct_inflow: e.direct_inflow.clone(),
                    params: apply_overrides(*params, &e.params)?,
                })
            })
            .collect()
    }

    /// PRCC ranges of `±span` around the resolved parameter values.
    pub fn prcc_ranges(&self, params: &ModelParams) -> Result<Vec<ParamRange>> {
        let span = self.sensitivity.prcc.span;
        self.sensitivity
            .prcc
            .parameters
            .iter()
            .map(|name| {
                let key = ParamName::parse_sweepable(name)?;
                let v = params.get(key);
                let upper = key.upper_bound().unwrap_or(f64::INFINITY);
                Ok(ParamRange::new(
                    name.clone(),
                    (v * (1.0 - span)).max(0.0),
                    (v * (1.0 + span)).min(upper),
                ))
            })
            .collect()
    }
}

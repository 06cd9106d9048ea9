use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{nonneg, Error, Result};

/// Latent stocks (persons) at one annual step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineState {
    pub u: f64,
    pub g: f64,
    pub p: f64,
    pub f: f64,
    /// Year index, counted from the first year of the run.
    pub t: u32,
}

impl PipelineState {
    pub fn new(u: f64, g: f64, p: f64, f: f64) -> Self {
        PipelineState { u, g, p, f, t: 0 }
    }

    /// True when every stock is finite and nonnegative.
    pub fn is_feasible(&self) -> bool {
        [self.u, self.g, self.p, self.f]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }

    pub(crate) fn check(&self) -> Result<()> {
        nonneg("U", self.u)?;
        nonneg("G", self.g)?;
        nonneg("P", self.p)?;
        nonneg("F", self.f)?;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.u + self.g + self.p + self.f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every candidate is hired at the modeled transition rates.
    Unconstrained,
    /// Hires are capped by vacancies from faculty exits.
    #[default]
    VacancyLimited,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Unconstrained => "unconstrained",
            Regime::VacancyLimited => "vacancy_limited",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconstrained" => Ok(Regime::Unconstrained),
            "vacancy_limited" => Ok(Regime::VacancyLimited),
            other => Err(Error::Scenario(format!("unknown regime `{other}`"))),
        }
    }
}

/// Flow accounting for a single annual step (persons or positions per year).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepLedger {
    pub inflow: f64,
    pub undergrad_completions: f64,
    pub grad_completions: f64,
    pub exit_u: f64,
    pub exit_g: f64,
    pub exit_p: f64,
    pub exit_f: f64,
    pub vacancies: f64,
    pub c_dir: f64,
    pub c_post: f64,
    pub hires_total: f64,
    pub hires_post: f64,
    pub hires_dir: f64,
    pub p_ug_eff: f64,
    pub p_pf_eff: f64,
    pub regime: Regime,
}

impl StepLedger {
    pub fn candidates(&self) -> f64 {
        self.c_dir + self.c_post
    }
}

/// An ordered run of states with the ledgers connecting them.
///
/// `ledgers[k]` holds the flows that carry `states[k]` to `states[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub regime: Regime,
    /// Calendar year of `states[0]`.
    pub first_year: i32,
    pub states: Vec<PipelineState>,
    pub ledgers: Vec<StepLedger>,
}

impl Trajectory {
    pub fn new(label: impl Into<String>, regime: Regime, first_year: i32, initial: PipelineState) -> Self {
        Trajectory {
            label: label.into(),
            regime,
            first_year,
            states: vec![PipelineState { t: 0, ..initial }],
            ledgers: Vec::new(),
        }
    }

    /// Appends a step; the state's time index is assigned here.
    pub fn push(&mut self, ledger: StepLedger, next: PipelineState) {
        let t = self.states.len() as u32;
        self.ledgers.push(ledger);
        self.states.push(PipelineState { t, ..next });
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn year(&self, index: usize) -> i32 {
        self.first_year + index as i32
    }

    pub fn last(&self) -> &PipelineState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// P/F per state; `None` where F = 0.
    pub fn pf_ratios(&self) -> Vec<Option<f64>> {
        self.states.iter().map(|s| (s.f > 0.0).then(|| s.p / s.f)).collect()
    }

    /// Structural invariants: contiguous time indices and one ledger per step.
    pub fn is_well_formed(&self) -> bool {
        !self.states.is_empty()
            && self.ledgers.len() + 1 == self.states.len()
            && self.states.iter().enumerate().all(|(i, s)| s.t as usize == i)
    }
}

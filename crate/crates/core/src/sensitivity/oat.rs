use rayon::prelude::*;

use super::OutcomeSummary;
use crate::error::{Error, Result};
use crate::feasibility::feasibility_check;
use crate::ingest::DegreeSeries;
use crate::metrics::DEFAULT_THRESHOLD;
use crate::params::ParamName;
use crate::scenario::{run_scenario_with, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Congestion threshold for first-threshold years.
    pub threshold: f64,
    /// Drop infeasible values with a warning instead of failing.
    pub skip_infeasible: bool,
    pub override_feasibility: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            threshold: DEFAULT_THRESHOLD,
            skip_infeasible: false,
            override_feasibility: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OatSweep {
    pub param: ParamName,
    pub rows: Vec<(f64, OutcomeSummary)>,
    /// Values dropped as infeasible, with the failing condition.
    pub skipped: Vec<(f64, String)>,
}

/// `points` evenly spaced values spanning `±span` around `base`, clipped to
/// the parameter's domain.
pub fn default_oat_grid(param: ParamName, base: f64, points: usize, span: f64) -> Vec<f64> {
    let lo = base * (1.0 - span);
    let hi = base * (1.0 + span);
    let upper = param.upper_bound().unwrap_or(f64::INFINITY);
    super::linspace(lo, hi, points)
        .into_iter()
        .map(|v| v.clamp(0.0, upper))
        .collect()
}

/// Perturbs one parameter at a time, holding the rest of `base` fixed, and
/// summarizes each run.
pub fn oat_sweep(
    base: &ScenarioSpec,
    series: &DegreeSeries,
    param_name: &str,
    values: &[f64],
    options: &SweepOptions,
) -> Result<OatSweep> {
    let param = ParamName::parse_sweepable(param_name)?;

    let outcomes: Vec<(f64, Result<OutcomeSummary>)> = values
        .par_iter()
        .map(|&v| {
            let spec = ScenarioSpec {
                params: base.params.with(param, v),
                ..base.clone()
            };
            let res = feasibility_check(&spec.params)
                .gate(options.override_feasibility)
                .and_then(|()| run_scenario_with(&spec, series, options.override_feasibility))
                .and_then(|tr| OutcomeSummary::from_trajectory(&tr, options.threshold));
            (v, res)
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut skipped = Vec::new();
    for (v, res) in outcomes {
        match res {
            Ok(summary) => rows.push((v, summary)),
            Err(Error::Infeasible { condition }) | Err(Error::InvalidParam { reason: condition, .. })
                if options.skip_infeasible =>
            {
                skipped.push((v, condition));
            }
            Err(Error::Infeasible { condition }) => {
                return Err(Error::Infeasible {
                    condition: format!("{param} = {v}: {condition}"),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OatSweep { param, rows, skipped })
}

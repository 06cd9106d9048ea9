use rayon::prelude::*;

use super::{OutcomeSummary, SweepOptions};
use crate::error::{Error, Result};
use crate::ingest::DegreeSeries;
use crate::params::ParamName;
use crate::scenario::{run_scenario_with, ScenarioSpec};
use crate::state::Regime;

/// Default faculty exit rates: 8 points over [0.01, 0.08].
pub const DEFAULT_AF_GRID: (f64, f64, usize) = (0.01, 0.08, 8);
/// Default faculty capacity scales: 7 points over [2000, 8000].
pub const DEFAULT_KF_GRID: (f64, f64, usize) = (2_000.0, 8_000.0, 7);

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let last = (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i + 1 == points {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / last
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapCell {
    pub a_f: f64,
    pub k_f: f64,
    /// `None` when the cell is infeasible or ends with no faculty.
    pub terminal_ratio: Option<f64>,
    pub first_threshold_year: Option<i32>,
    pub feasible: bool,
}

/// Row-major grid: rows follow `a_f_values`, columns follow `k_f_values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub a_f_values: Vec<f64>,
    pub k_f_values: Vec<f64>,
    pub cells: Vec<HeatmapCell>,
    pub threshold: f64,
}

impl Heatmap {
    pub fn cell(&self, row: usize, col: usize) -> &HeatmapCell {
        &self.cells[row * self.k_f_values.len() + col]
    }
}

/// One vacancy-limited run per `(a_F, K_F)` pair. Infeasible cells are kept
/// with absent values and the sweep continues.
pub fn heatmap_sweep(
    a_f_values: &[f64],
    k_f_values: &[f64],
    base: &ScenarioSpec,
    series: &DegreeSeries,
    options: &SweepOptions,
) -> Result<Heatmap> {
    if a_f_values.is_empty() || k_f_values.is_empty() {
        return Err(Error::Config("heatmap grids must be nonempty".into()));
    }
    let pairs: Vec<(f64, f64)> = a_f_values
        .iter()
        .flat_map(|&a| k_f_values.iter().map(move |&k| (a, k)))
        .collect();

    let cells = pairs
        .par_iter()
        .map(|&(a_f, k_f)| {
            let spec = ScenarioSpec {
                regime: Regime::VacancyLimited,
                params: base.params.with(ParamName::AF, a_f).with(ParamName::KF, k_f),
                ..base.clone()
            };
            match run_scenario_with(&spec, series, options.override_feasibility) {
                Ok(tr) => {
                    let s = OutcomeSummary::from_trajectory(&tr, options.threshold)?;
                    Ok(HeatmapCell {
                        a_f,
                        k_f,
                        terminal_ratio: s.terminal_pf_ratio,
                        first_threshold_year: s.first_threshold_year,
                        feasible: true,
                    })
                }
                Err(Error::Infeasible { .. } | Error::InvalidParam { .. }) => Ok(HeatmapCell {
                    a_f,
                    k_f,
                    terminal_ratio: None,
                    first_threshold_year: None,
                    feasible: false,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Heatmap {
        a_f_values: a_f_values.to_vec(),
        k_f_values: k_f_values.to_vec(),
        cells,
        threshold: options.threshold,
    })
}

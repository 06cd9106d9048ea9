//! Local and global sensitivity analyses and the structural congestion sweep.
//!
//! Every evaluation is an independent scenario run. Sweeps fan out over the
//! current rayon pool and collect in input order, so results do not depend
//! on the thread count.

mod heatmap;
mod lhs;
mod oat;
mod prcc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::first_threshold_year;
use crate::state::Trajectory;

pub use heatmap::{heatmap_sweep, linspace, Heatmap, HeatmapCell, DEFAULT_AF_GRID, DEFAULT_KF_GRID};
pub use lhs::{lhs_sample, LhsDesign, ParamRange};
pub use oat::{default_oat_grid, oat_sweep, OatSweep, SweepOptions};
pub use prcc::{prcc, prcc_analysis, rank_average, PrccEntry, PrccResult};

/// Summary of a run used by every sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeSummary {
    pub final_f: f64,
    pub peak_f: f64,
    pub final_p: f64,
    pub peak_p: f64,
    pub terminal_pf_ratio: Option<f64>,
    pub first_threshold_year: Option<i32>,
}

impl OutcomeSummary {
    pub fn from_trajectory(trajectory: &Trajectory, threshold: f64) -> Result<Self> {
        let last = trajectory.last();
        let peak = |sel: fn(&crate::state::PipelineState) -> f64| {
            trajectory.states.iter().map(sel).fold(f64::NEG_INFINITY, f64::max)
        };
        Ok(OutcomeSummary {
            final_f: last.f,
            peak_f: peak(|s| s.f),
            final_p: last.p,
            peak_p: peak(|s| s.p),
            terminal_pf_ratio: (last.f > 0.0).then(|| last.p / last.f),
            first_threshold_year: first_threshold_year(trajectory, threshold)?,
        })
    }

    pub fn get(&self, outcome: Outcome) -> Option<f64> {
        match outcome {
            Outcome::FinalF => Some(self.final_f),
            Outcome::PeakF => Some(self.peak_f),
            Outcome::FinalP => Some(self.final_p),
            Outcome::PeakP => Some(self.peak_p),
            Outcome::TerminalRatio => self.terminal_pf_ratio,
        }
    }
}

/// Scalar outcome fed to PRCC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Outcome {
    #[default]
    #[serde(rename = "final_F")]
    FinalF,
    #[serde(rename = "peak_F")]
    PeakF,
    #[serde(rename = "final_P")]
    FinalP,
    #[serde(rename = "peak_P")]
    PeakP,
    #[serde(rename = "terminal_ratio")]
    TerminalRatio,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::FinalF => "final_F",
            Outcome::PeakF => "peak_F",
            Outcome::FinalP => "final_P",
            Outcome::PeakP => "peak_P",
            Outcome::TerminalRatio => "terminal_ratio",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Outcome::FinalF,
            Outcome::PeakF,
            Outcome::FinalP,
            Outcome::PeakP,
            Outcome::TerminalRatio,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown outcome `{s}`")))
    }
}

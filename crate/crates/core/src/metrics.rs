//! Derived metrics over ledgers and trajectories. Undefined values (zero
//! denominators) are `None`, never zero or infinity.

use crate::error::{Error, Result};
use crate::state::{Regime, StepLedger, Trajectory};

/// Default congestion threshold in postdocs per faculty member.
pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// Candidates per opening, `(c_dir + c_post) / V`.
pub fn market_pressure(ledger: &StepLedger) -> Option<f64> {
    (ledger.vacancies > 0.0).then(|| ledger.candidates() / ledger.vacancies)
}

/// Candidates per opening under vacancy-limited hiring. Same quantity as
/// [`market_pressure`]; the name follows the regime.
pub fn competition_intensity(ledger: &StepLedger) -> Option<f64> {
    market_pressure(ledger)
}

/// Fraction of faculty hires drawn from the postdoc pool.
pub fn postdoc_share(ledger: &StepLedger) -> Option<f64> {
    (ledger.hires_total > 0.0).then(|| ledger.hires_post / ledger.hires_total)
}

/// Index of the first state with `P / F > threshold`. States with no
/// faculty are skipped.
pub fn first_threshold_index(trajectory: &Trajectory, threshold: f64) -> Result<Option<usize>> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParam {
            name: "threshold".into(),
            value: threshold,
            reason: "must be > 0".into(),
        });
    }
    Ok(trajectory
        .states
        .iter()
        .position(|s| s.f > 0.0 && s.p / s.f > threshold))
}

/// Calendar year of the first strict exceedance of the congestion threshold.
pub fn first_threshold_year(trajectory: &Trajectory, threshold: f64) -> Result<Option<i32>> {
    Ok(first_threshold_index(trajectory, threshold)?.map(|i| trajectory.year(i)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub year: i32,
    pub market_pressure: Option<f64>,
    pub competition_intensity: Option<f64>,
    pub postdoc_share: Option<f64>,
    pub pf_ratio: Option<f64>,
    /// P relative to its first-year value.
    pub p_index: Option<f64>,
    /// F relative to its first-year value.
    pub f_index: Option<f64>,
}

/// Per-year metrics for one trajectory. Flow-based metrics come from the
/// ledger leaving each year, so the final year carries only stock metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub label: String,
    pub regime: Regime,
    pub rows: Vec<MetricRow>,
}

impl MetricSeries {
    pub fn from_trajectory(trajectory: &Trajectory) -> Self {
        let first = trajectory.states[0];
        let index = |v: f64, base: f64| (base > 0.0).then(|| v / base);
        let rows = trajectory
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let ledger = trajectory.ledgers.get(i);
                let pressure = ledger.and_then(market_pressure);
                let (market_pressure, competition_intensity) = match trajectory.regime {
                    Regime::Unconstrained => (pressure, None),
                    Regime::VacancyLimited => (None, pressure),
                };
                MetricRow {
                    year: trajectory.year(i),
                    market_pressure,
                    competition_intensity,
                    postdoc_share: ledger.and_then(postdoc_share),
                    pf_ratio: (s.f > 0.0).then(|| s.p / s.f),
                    p_index: index(s.p, first.p),
                    f_index: index(s.f, first.f),
                }
            })
            .collect();
        MetricSeries {
            label: trajectory.label.clone(),
            regime: trajectory.regime,
            rows,
        }
    }

    /// Candidates per opening regardless of which column holds it.
    pub fn pressure(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.rows.iter().map(|r| r.market_pressure.or(r.competition_intensity))
    }

    /// Mean candidates per opening over the last `years` defined entries.
    pub fn mean_pressure_tail(&self, years: usize) -> Option<f64> {
        let defined: Vec<f64> = self.pressure().flatten().collect();
        if defined.is_empty() {
            return None;
        }
        let tail = &defined[defined.len().saturating_sub(years)..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }

    /// Last defined postdoc share.
    pub fn final_postdoc_share(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.postdoc_share)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PipelineState;

    fn ledger(v: f64, cd: f64, cp: f64, h: f64, hp: f64) -> StepLedger {
        StepLedger {
            vacancies: v,
            c_dir: cd,
            c_post: cp,
            hires_total: h,
            hires_post: hp,
            hires_dir: h - hp,
            ..StepLedger::default()
        }
    }

    #[test]
    fn pressure_examples() {
        let m = market_pressure(&ledger(120.0, 136.0, 90.0, 120.0, 0.0)).unwrap();
        assert!((m - 226.0 / 120.0).abs() < 1e-12);
        assert_eq!(market_pressure(&ledger(10.0, 0.0, 0.0, 0.0, 0.0)), Some(0.0));
        assert_eq!(market_pressure(&ledger(0.0, 5.0, 5.0, 0.0, 0.0)), None);
    }

    #[test]
    fn share_examples() {
        assert_eq!(postdoc_share(&ledger(0.0, 0.0, 0.0, 120.0, 90.0)), Some(0.75));
        assert_eq!(postdoc_share(&ledger(0.0, 0.0, 0.0, 7.0, 7.0)), Some(1.0));
        assert_eq!(postdoc_share(&ledger(0.0, 0.0, 0.0, 0.0, 0.0)), None);
    }

    fn with_ratios(ratios: &[f64]) -> Trajectory {
        let mut tr = Trajectory::new(
            "r",
            Regime::VacancyLimited,
            2000,
            PipelineState::new(0.0, 0.0, ratios[0] * 10.0, 10.0),
        );
        for r in &ratios[1..] {
            tr.push(StepLedger::default(), PipelineState::new(0.0, 0.0, r * 10.0, 10.0));
        }
        tr
    }

    #[test]
    fn threshold_examples() {
        let tr = with_ratios(&[0.2, 0.9, 1.4, 1.1]);
        assert_eq!(first_threshold_index(&tr, 1.0).unwrap(), Some(2));
        assert_eq!(first_threshold_year(&tr, 1.0).unwrap(), Some(2002));
        assert_eq!(first_threshold_year(&with_ratios(&[0.2, 0.3]), 1.0).unwrap(), None);
        assert_eq!(first_threshold_index(&with_ratios(&[3.0, 0.3]), 1.0).unwrap(), Some(0));
        // exact equality is not an exceedance
        assert_eq!(first_threshold_index(&with_ratios(&[1.0, 0.5]), 1.0).unwrap(), None);
        assert!(first_threshold_year(&tr, 0.0).is_err());
    }

    #[test]
    fn zero_faculty_years_skipped() {
        let mut tr = Trajectory::new(
            "z",
            Regime::VacancyLimited,
            2000,
            PipelineState::new(0.0, 0.0, 5.0, 0.0),
        );
        tr.push(StepLedger::default(), PipelineState::new(0.0, 0.0, 5.0, 2.0));
        assert_eq!(first_threshold_index(&tr, 1.0).unwrap(), Some(1));
        let m = MetricSeries::from_trajectory(&tr);
        assert_eq!(m.rows[0].pf_ratio, None);
        assert_eq!(m.rows[1].f_index, None);
    }

    #[test]
    fn metric_columns_follow_regime() {
        let mut tr = Trajectory::new(
            "m",
            Regime::Unconstrained,
            2000,
            PipelineState::new(0.0, 0.0, 10.0, 10.0),
        );
        tr.push(
            ledger(10.0, 5.0, 5.0, 10.0, 5.0),
            PipelineState::new(0.0, 0.0, 20.0, 5.0),
        );
        let m = MetricSeries::from_trajectory(&tr);
        assert_eq!(m.rows[0].market_pressure, Some(1.0));
        assert_eq!(m.rows[0].competition_intensity, None);
        assert_eq!(m.rows[1].postdoc_share, None);
        assert_eq!(m.rows[1].p_index, Some(2.0));
        assert_eq!(m.rows[1].f_index, Some(0.5));
        assert_eq!(m.rows[1].pf_ratio, Some(4.0));
        assert_eq!(m.mean_pressure_tail(10), Some(1.0));
    }
}

//! Scenario construction and trajectory runs in either hiring regime.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::feasibility_check;
use crate::ingest::{reconstruct_stocks, DegreeRecord, DegreeSeries};
use crate::params::ModelParams;
use crate::state::{PipelineState, Regime, StepLedger, Trajectory};
use crate::step::{step_unconstrained, step_vacancy_limited};
use crate::transition::p_pf_unchecked;

/// Window used to estimate the slope for linear-trend projections.
pub const TREND_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    #[default]
    None,
    /// Repeat the final observed year.
    HoldLast,
    /// Continue each channel along its recent least-squares slope.
    LinearTrend,
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Projection::None),
            "hold_last" => Ok(Projection::HoldLast),
            "linear_trend" => Ok(Projection::LinearTrend),
            other => Err(Error::Scenario(format!("unknown projection `{other}`"))),
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Projection::None => "none",
            Projection::HoldLast => "hold_last",
            Projection::LinearTrend => "linear_trend",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub regime: Regime,
    /// Factor applied to every degree count.
    pub inflow_scale: f64,
    pub projection: Projection,
    /// Years appended after the data window.
    pub horizon: u32,
    /// Initial postdoc stock; defaults to the stationary level for the first year.
    pub initial_p: Option<f64>,
    /// Initial faculty stock; defaults to `K_F`.
    pub initial_f: Option<f64>,
    /// Undergraduate entrants per year for the unconstrained regime, one per
    /// scenario year. Replaces the default derived from bachelor's degrees.
    pub direct_inflow: Option<Vec<f64>>,
    pub params: ModelParams,
}

impl ScenarioSpec {
    pub fn new(label: impl Into<String>, regime: Regime, params: ModelParams) -> Self {
        ScenarioSpec {
            label: label.into(),
            regime,
            inflow_scale: 1.0,
            projection: Projection::None,
            horizon: 0,
            initial_p: None,
            initial_f: None,
            direct_inflow: None,
            params,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.inflow_scale = scale;
        self
    }

    pub fn with_projection(mut self, projection: Projection, horizon: u32) -> Self {
        self.projection = projection;
        self.horizon = horizon;
        self
    }

    /// The reduced, baseline and expanded inflow scenarios (0.75, 1.0, 1.25).
    pub fn named_defaults(regime: Regime, params: ModelParams) -> Vec<ScenarioSpec> {
        [("reduced", 0.75), ("baseline", 1.0), ("expanded", 1.25)]
            .into_iter()
            .map(|(label, scale)| ScenarioSpec::new(label, regime, params).with_scale(scale))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.inflow_scale.is_finite() && self.inflow_scale > 0.0) {
            return Err(Error::Scenario(format!("{}: inflow_scale must be > 0", self.label)));
        }
        if self.horizon > 0 && self.projection == Projection::None {
            return Err(Error::Scenario(format!(
                "{}: horizon {} requires a projection mode",
                self.label, self.horizon
            )));
        }
        for (name, v) in [("initial_P", self.initial_p), ("initial_F", self.initial_f)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Scenario(format!("{}: {name} must be >= 0", self.label)));
                }
            }
        }
        Ok(())
    }
}

/// Scales the series and appends projected years.
pub fn build_scenario(series: &DegreeSeries, spec: &ScenarioSpec) -> Result<DegreeSeries> {
    spec.validate()?;
    let mut table = if spec.inflow_scale == 1.0 {
        series.clone()
    } else {
        series.scaled(spec.inflow_scale)
    };
    let last = *table.last();
    let horizon = spec.horizon as usize;
    let extra: Vec<DegreeRecord> = match spec.projection {
        Projection::None => Vec::new(),
        Projection::HoldLast => (1..=horizon)
            .map(|k| DegreeRecord {
                year: last.year + k as i32,
                ..last
            })
            .collect(),
        Projection::LinearTrend => {
            let recs = table.records();
            let window = &recs[recs.len().saturating_sub(TREND_WINDOW)..];
            let sb = ols_slope(window.iter().map(|r| r.bachelors));
            let sm = ols_slope(window.iter().map(|r| r.masters));
            let sd = ols_slope(window.iter().map(|r| r.doctorates));
            (1..=horizon)
                .map(|k| {
                    let k_f = k as f64;
                    DegreeRecord {
                        year: last.year + k as i32,
                        bachelors: (last.bachelors + sb * k_f).max(0.0),
                        masters: (last.masters + sm * k_f).max(0.0),
                        doctorates: (last.doctorates + sd * k_f).max(0.0),
                    }
                })
                .collect()
        }
    };
    table.extend(extra);
    Ok(table)
}

/// Least-squares slope of equally spaced values.
fn ols_slope(values: impl ExactSizeIterator<Item = f64> + Clone) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = values.clone().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Stationary postdoc level given the first year's graduate stock and
/// faculty stock.
pub fn stationary_postdoc(g0: f64, f0: f64, params: &ModelParams) -> f64 {
    let loss = params.a_p + p_pf_unchecked(f0, params);
    if loss > 0.0 {
        params.p_gp * params.g_g * g0 / loss
    } else {
        0.0
    }
}

/// Runs a scenario, refusing parameters that fail a feasibility condition.
pub fn run_scenario(spec: &ScenarioSpec, series: &DegreeSeries) -> Result<Trajectory> {
    run_scenario_with(spec, series, false)
}

/// Runs a scenario; `override_feasibility` skips the positivity and
/// boundedness gate (domain checks still apply).
pub fn run_scenario_with(spec: &ScenarioSpec, series: &DegreeSeries, override_feasibility: bool) -> Result<Trajectory> {
    let params = &spec.params;
    feasibility_check(params).gate(override_feasibility)?;
    let table = build_scenario(series, spec)?;
    let stocks = reconstruct_stocks(&table, params)?;
    let n = table.len();

    let inflow: Vec<f64> = match &spec.direct_inflow {
        Some(direct) => {
            if direct.len() != n {
                return Err(Error::Scenario(format!(
                    "{}: direct_inflow has {} values, scenario has {n} years",
                    spec.label,
                    direct.len()
                )));
            }
            direct.clone()
        }
        // entrants that keep the reconstructed undergraduate stock in balance
        None => stocks.undergrad.iter().map(|u| u * (params.g_u + params.a_u)).collect(),
    };

    let u0 = stocks.undergrad[0];
    let g0 = stocks.graduate[0];
    let f0 = spec.initial_f.unwrap_or(params.k_f);
    let p0 = spec.initial_p.unwrap_or_else(|| stationary_postdoc(g0, f0, params));
    let mut trajectory = Trajectory::new(
        spec.label.clone(),
        spec.regime,
        table.first_year(),
        PipelineState::new(u0, g0, p0, f0),
    );

    for (t, &b) in inflow.iter().enumerate().take(n - 1) {
        let current = *trajectory.last();
        match spec.regime {
            Regime::Unconstrained => {
                let (next, ledger) = step_unconstrained(&current, b, params)?;
                trajectory.push(ledger, next);
            }
            Regime::VacancyLimited => {
                let step = step_vacancy_limited(stocks.graduate[t], current.p, current.f, params)?;
                let u = stocks.undergrad[t];
                let ledger = StepLedger {
                    inflow: b,
                    undergrad_completions: params.g_u * u,
                    exit_u: params.a_u * u,
                    ..step.ledger
                };
                let next = PipelineState::new(
                    stocks.undergrad[t + 1],
                    stocks.graduate[t + 1],
                    step.p_next,
                    step.f_next,
                );
                trajectory.push(ledger, next);
            }
        }
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::bundled_sample;
    use crate::params::ParamName;

    const BASE: ModelParams = ModelParams::BASELINE;

    fn tiny() -> DegreeSeries {
        DegreeSeries::new(vec![
            DegreeRecord {
                year: 2000,
                bachelors: 1_000.0,
                masters: 80.0,
                doctorates: 20.0,
            },
            DegreeRecord {
                year: 2001,
                bachelors: 1_100.0,
                masters: 90.0,
                doctorates: 30.0,
            },
            DegreeRecord {
                year: 2002,
                bachelors: 100.0,
                masters: 80.0,
                doctorates: 20.0,
            },
        ])
        .unwrap()
    }

    fn constant(n: usize, b: f64, m: f64, d: f64) -> DegreeSeries {
        DegreeSeries::new(
            (0..n)
                .map(|i| DegreeRecord {
                    year: 1970 + i as i32,
                    bachelors: b,
                    masters: m,
                    doctorates: d,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_scenario() {
        let spec = ScenarioSpec::new("id", Regime::VacancyLimited, BASE);
        assert_eq!(build_scenario(&tiny(), &spec).unwrap(), tiny());
    }

    #[test]
    fn scaling_multiplies_counts() {
        let s = constant(2, 1_000.0, 80.0, 20.0);
        let spec = ScenarioSpec::new("x", Regime::VacancyLimited, BASE).with_scale(1.25);
        let t = build_scenario(&s, &spec).unwrap();
        assert_eq!(t.records()[0].bachelors, 1_250.0);
        assert_eq!(t.records()[1].masters, 100.0);
    }

    #[test]
    fn hold_last_appends_copies() {
        let s = constant(3, 100.0, 80.0, 20.0);
        let spec = ScenarioSpec::new("x", Regime::VacancyLimited, BASE).with_projection(Projection::HoldLast, 5);
        let t = build_scenario(&s, &spec).unwrap();
        assert_eq!(t.len(), 8);
        for (k, r) in t.records()[3..].iter().enumerate() {
            assert_eq!(r.year, 1973 + k as i32);
            assert_eq!((r.bachelors, r.masters, r.doctorates), (100.0, 80.0, 20.0));
        }
    }

    #[test]
    fn linear_trend_follows_slope_and_floors() {
        let recs: Vec<_> = (0..12)
            .map(|i| DegreeRecord {
                year: 2000 + i,
                bachelors: 100.0 + 10.0 * i as f64,
                masters: 50.0,
                doctorates: (30.0 - 3.0 * i as f64).max(0.0),
            })
            .collect();
        let s = DegreeSeries::new(recs).unwrap();
        let spec = ScenarioSpec::new("x", Regime::VacancyLimited, BASE).with_projection(Projection::LinearTrend, 20);
        let t = build_scenario(&s, &spec).unwrap();
        let r = t.records()[12];
        assert!((r.bachelors - 220.0).abs() < 1e-9);
        assert!((r.masters - 50.0).abs() < 1e-9);
        assert!(t.records().iter().all(|r| r.doctorates >= 0.0));
        assert_eq!(t.last().doctorates, 0.0);
    }

    #[test]
    fn horizon_without_projection_is_an_error() {
        let spec = ScenarioSpec::new("x", Regime::VacancyLimited, BASE).with_projection(Projection::None, 3);
        assert!(matches!(build_scenario(&tiny(), &spec), Err(Error::Scenario(_))));
        let spec = ScenarioSpec::new("x", Regime::VacancyLimited, BASE).with_scale(0.0);
        assert!(build_scenario(&tiny(), &spec).is_err());
    }

    #[test]
    fn zero_series_gives_zero_downstream() {
        let s = constant(10, 0.0, 0.0, 0.0);
        for regime in [Regime::VacancyLimited, Regime::Unconstrained] {
            let mut spec = ScenarioSpec::new("zero", regime, BASE);
            spec.initial_p = Some(0.0);
            spec.initial_f = Some(0.0);
            let tr = run_scenario(&spec, &s).unwrap();
            assert_eq!(tr.len(), 10);
            assert!(tr.states.iter().all(|st| st.p == 0.0 && st.f == 0.0));
        }
    }

    #[test]
    fn default_initial_stocks() {
        let s = bundled_sample();
        let spec = ScenarioSpec::new("b", Regime::VacancyLimited, BASE);
        let tr = run_scenario(&spec, &s).unwrap();
        let first = tr.states[0];
        assert_eq!(first.f, BASE.k_f);
        let g0 = s.records()[0].graduate() / BASE.g_g;
        let expected = BASE.p_gp * BASE.g_g * g0 / (BASE.a_p + BASE.p_pf_max / 2.0);
        assert!((first.p - expected).abs() < 1e-9 * expected);
        assert!(tr.is_well_formed());
        assert_eq!(tr.ledgers.len(), 50);
    }

    #[test]
    fn exogenous_upstream_in_vacancy_regime() {
        let s = bundled_sample();
        let tr = run_scenario(&ScenarioSpec::new("b", Regime::VacancyLimited, BASE), &s).unwrap();
        for (st, r) in tr.states.iter().zip(s.records()) {
            assert!((st.u - r.bachelors / BASE.g_u).abs() < 1e-9);
            assert!((st.g - r.graduate() / BASE.g_g).abs() < 1e-9);
        }
        for (l, r) in tr.ledgers.iter().zip(s.records()) {
            assert!((l.grad_completions - r.graduate()).abs() < 1e-9);
            assert!((l.undergrad_completions - r.bachelors).abs() < 1e-9);
        }
    }

    #[test]
    fn feasibility_refusal_names_condition() {
        let spec = ScenarioSpec::new("bad", Regime::VacancyLimited, BASE.with(ParamName::AF, 0.0));
        let err = run_scenario(&spec, &tiny()).unwrap_err().to_string();
        assert!(err.contains("a_F > 0"), "{err}");
        run_scenario_with(&spec, &tiny(), true).unwrap();
    }

    #[test]
    fn direct_inflow_length_checked() {
        let mut spec = ScenarioSpec::new("d", Regime::Unconstrained, BASE);
        spec.direct_inflow = Some(vec![1.0, 2.0]);
        assert!(run_scenario(&spec, &tiny()).is_err());
        spec.direct_inflow = Some(vec![0.0, 0.0, 0.0]);
        let tr = run_scenario(&spec, &tiny()).unwrap();
        assert_eq!(tr.ledgers[0].inflow, 0.0);
    }

    /// Fixed point of the downstream vacancy-limited map under constant
    /// graduate stock, by plain iteration.
    fn downstream_fixed_point(g: f64, params: &ModelParams) -> (f64, f64) {
        let (mut p, mut f) = (0.0, params.k_f);
        for _ in 0..1_000_000 {
            let ppf = params.p_pf_max / (1.0 + params.alpha_f * f / params.k_f);
            let v = params.a_f * f;
            let cd = params.p_gf * params.g_g * g;
            let cp = ppf * p;
            let h = v.min(cd + cp);
            let hp = if cd + cp > 0.0 { h * cp / (cd + cp) } else { 0.0 };
            let np = p - hp - params.a_p * p + params.p_gp * params.g_g * g;
            let nf = (1.0 - params.a_f) * f + h;
            let done = (np - p).abs() < 1e-10 && (nf - f).abs() < 1e-10;
            p = np;
            f = nf;
            if done {
                break;
            }
        }
        (p, f)
    }

    #[test]
    fn constant_inflow_ratio_converges() {
        let s = constant(51, 20_000.0, 6_000.0, 1_500.0);
        let spec = ScenarioSpec::new("c", Regime::VacancyLimited, BASE).with_projection(Projection::HoldLast, 400);
        let tr = run_scenario(&spec, &s).unwrap();
        let g = 7_500.0 / BASE.g_g;
        let (p_star, f_star) = downstream_fixed_point(g, &BASE);
        let ratio = tr.last().p / tr.last().f;
        assert!((ratio - p_star / f_star).abs() < 1e-6, "{ratio} vs {}", p_star / f_star);
        // monotone after the transient
        let ratios: Vec<f64> = tr.pf_ratios().into_iter().map(Option::unwrap).collect();
        let tail = &ratios[20..];
        let up = tail.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        let down = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        assert!(up || down);
    }
}

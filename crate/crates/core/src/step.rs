//! Annual update maps for both hiring regimes.
//!
//! Every intensity is evaluated at the current state before anything is
//! updated. Increments are formed as `inflow - outflow` with the same
//! arithmetic used by [`crate::feasibility::accumulation_predicates`], so the
//! sign of a step's increment and the predicate agree.

use crate::error::{nonneg, Error, Result};
use crate::hiring::allocate_unchecked;
use crate::params::ModelParams;
use crate::state::{PipelineState, Regime, StepLedger};
use crate::transition::{p_pf_unchecked, p_ug_unchecked};

/// Postdoc (gain, loss) in the unconstrained map.
#[inline]
pub(crate) fn postdoc_balance(g: f64, p: f64, ppf: f64, params: &ModelParams) -> (f64, f64) {
    (params.p_gp * params.g_g * g, (ppf + params.a_p) * p)
}

/// Faculty (gain, loss) in the unconstrained map.
#[inline]
pub(crate) fn faculty_balance(g: f64, p: f64, f: f64, ppf: f64, params: &ModelParams) -> (f64, f64) {
    (params.p_gf * params.g_g * g + ppf * p, params.a_f * f)
}

/// One step of the full four-stock recurrence with unconstrained hiring.
pub fn step_unconstrained(
    state: &PipelineState,
    inflow: f64,
    params: &ModelParams,
) -> Result<(PipelineState, StepLedger)> {
    state.check()?;
    nonneg("B", inflow)?;
    params.validate()?;

    let PipelineState { u, g, p, f, t } = *state;
    let pug = p_ug_unchecked(g, params);
    let ppf = p_pf_unchecked(f, params);

    let undergrad_completions = params.g_u * u;
    let grad_completions = params.g_g * g;

    let du = inflow - (params.g_u + params.a_u) * u;
    let dg = pug * undergrad_completions - (params.g_g + params.a_g) * g;
    let (p_gain, p_loss) = postdoc_balance(g, p, ppf, params);
    let (f_gain, f_loss) = faculty_balance(g, p, f, ppf, params);

    let next = PipelineState {
        u: u + du,
        g: g + dg,
        p: p + (p_gain - p_loss),
        f: f + (f_gain - f_loss),
        t: t + 1,
    };

    let c_dir = params.p_gf * grad_completions;
    let c_post = ppf * p;
    let ledger = StepLedger {
        inflow,
        undergrad_completions,
        grad_completions,
        exit_u: params.a_u * u,
        exit_g: params.a_g * g,
        exit_p: params.a_p * p,
        exit_f: params.a_f * f,
        vacancies: params.a_f * f,
        c_dir,
        c_post,
        hires_total: c_dir + c_post,
        hires_post: c_post,
        hires_dir: c_dir,
        p_ug_eff: pug,
        p_pf_eff: ppf,
        regime: Regime::Unconstrained,
    };
    finite(&next, "step_unconstrained")?;
    Ok((next, ledger))
}

/// Result of a downstream (postdoc/faculty) step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownstreamStep {
    pub p_next: f64,
    pub f_next: f64,
    pub ledger: StepLedger,
}

/// One vacancy-limited step of the postdoc and faculty stocks, driven by an
/// exogenous graduate stock.
///
/// Requires `a_P + p_PF_max <= 1` so that postdoc losses never exceed the
/// stock.
pub fn step_vacancy_limited(g: f64, p: f64, f: f64, params: &ModelParams) -> Result<DownstreamStep> {
    check_downstream(g, p, f, params)?;

    let ppf = p_pf_unchecked(f, params);
    let vacancies = params.a_f * f;
    let grad_completions = params.g_g * g;
    let c_dir = params.p_gf * grad_completions;
    let c_post = ppf * p;
    let hires = allocate_unchecked(vacancies, c_dir, c_post);

    // H_post <= p_PF(F) P, so this is >= 0 up to rounding
    let retained = (p - hires.postdoc - params.a_p * p).max(0.0);
    let p_next = retained + params.p_gp * grad_completions;
    let f_next = (1.0 - params.a_f) * f + hires.total;

    let ledger = StepLedger {
        grad_completions,
        exit_g: params.a_g * g,
        exit_p: params.a_p * p,
        exit_f: params.a_f * f,
        vacancies,
        c_dir,
        c_post,
        hires_total: hires.total,
        hires_post: hires.postdoc,
        hires_dir: hires.direct,
        p_pf_eff: ppf,
        regime: Regime::VacancyLimited,
        ..StepLedger::default()
    };
    if !(p_next.is_finite() && f_next.is_finite()) {
        return Err(Error::NonFinite("step_vacancy_limited"));
    }
    Ok(DownstreamStep { p_next, f_next, ledger })
}

/// Downstream step with every candidate hired (`H = c_dir + c_post`), using
/// an exogenous graduate stock. Upper comparison map for the vacancy-limited
/// faculty stock.
pub fn step_downstream_uncapped(g: f64, p: f64, f: f64, params: &ModelParams) -> Result<DownstreamStep> {
    check_downstream(g, p, f, params)?;

    let ppf = p_pf_unchecked(f, params);
    let grad_completions = params.g_g * g;
    let c_dir = params.p_gf * grad_completions;
    let c_post = ppf * p;
    let (p_gain, p_loss) = postdoc_balance(g, p, ppf, params);
    let (f_gain, f_loss) = faculty_balance(g, p, f, ppf, params);

    let ledger = StepLedger {
        grad_completions,
        exit_g: params.a_g * g,
        exit_p: params.a_p * p,
        exit_f: params.a_f * f,
        vacancies: params.a_f * f,
        c_dir,
        c_post,
        hires_total: c_dir + c_post,
        hires_post: c_post,
        hires_dir: c_dir,
        p_pf_eff: ppf,
        regime: Regime::Unconstrained,
        ..StepLedger::default()
    };
    Ok(DownstreamStep {
        p_next: p + (p_gain - p_loss),
        f_next: f + (f_gain - f_loss),
        ledger,
    })
}

fn check_downstream(g: f64, p: f64, f: f64, params: &ModelParams) -> Result<()> {
    nonneg("G", g)?;
    nonneg("P", p)?;
    nonneg("F", f)?;
    params.validate()?;
    if params.p_pf_max + params.a_p > 1.0 {
        return Err(Error::Infeasible {
            condition: "positivity: p_PF_max + a_P <= 1".into(),
        });
    }
    Ok(())
}

fn finite(state: &PipelineState, what: &'static str) -> Result<()> {
    if [state.u, state.g, state.p, state.f].iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

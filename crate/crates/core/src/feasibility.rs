//! Executable forms of the well-posedness results: feasibility conditions,
//! one-step accumulation predicates and the undergraduate stock bound.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{nonneg, Error, Result};
use crate::params::ModelParams;
use crate::state::PipelineState;
use crate::step::{faculty_balance, postdoc_balance};
use crate::transition::p_pf_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionGroup {
    /// Parameter values are in their admissible domains.
    Domain,
    /// Nonnegativity of every stock is preserved.
    Positivity,
    /// Stocks stay bounded under bounded inflow.
    Boundedness,
}

impl fmt::Display for ConditionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionGroup::Domain => "domain",
            ConditionGroup::Positivity => "positivity",
            ConditionGroup::Boundedness => "boundedness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub group: ConditionGroup,
    pub condition: String,
    pub holds: bool,
}

impl ConditionCheck {
    fn new(group: ConditionGroup, condition: impl Into<String>, holds: bool) -> Self {
        ConditionCheck {
            group,
            condition: condition.into(),
            holds,
        }
    }
}

impl fmt::Display for ConditionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.group, self.condition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub checks: Vec<ConditionCheck>,
}

impl FeasibilityReport {
    pub fn group_holds(&self, group: ConditionGroup) -> bool {
        self.checks.iter().filter(|c| c.group == group).all(|c| c.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    /// Refuses unless every condition holds. With `override_feasibility`
    /// only domain violations are refused.
    pub fn gate(&self, override_feasibility: bool) -> Result<()> {
        let blocking = self
            .failures()
            .find(|c| !override_feasibility || c.group == ConditionGroup::Domain);
        match blocking {
            Some(c) => Err(Error::Infeasible {
                condition: c.to_string(),
            }),
            None => Ok(()),
        }
    }
}

/// Checks the positivity conditions (per-stage decay at most one, transition
/// functions nonnegative) and the boundedness conditions (strictly positive
/// loss at every stage).
///
/// `p_PF(F) + a_P <= 1` is checked through the static bound
/// `p_PF_max + a_P <= 1`, valid for every `F >= 0`.
pub fn feasibility_check(params: &ModelParams) -> FeasibilityReport {
    use ConditionGroup::*;
    let p = params;
    let mut checks = Vec::with_capacity(10);
    let domain = p.validate();
    checks.push(ConditionCheck::new(
        Domain,
        match &domain {
            Ok(()) => "parameters well-formed".to_string(),
            Err(e) => e.to_string(),
        },
        domain.is_ok(),
    ));
    checks.push(ConditionCheck::new(Positivity, "g_U + a_U <= 1", p.g_u + p.a_u <= 1.0));
    checks.push(ConditionCheck::new(Positivity, "g_G + a_G <= 1", p.g_g + p.a_g <= 1.0));
    checks.push(ConditionCheck::new(
        Positivity,
        "p_PF_max + a_P <= 1",
        p.p_pf_max + p.a_p <= 1.0,
    ));
    checks.push(ConditionCheck::new(Positivity, "p_UG(G) >= 0", p.p_ug_max >= 0.0));
    checks.push(ConditionCheck::new(
        Positivity,
        "p_PF(F) >= 0",
        p.p_pf_max >= 0.0 && p.alpha_f >= 0.0 && p.k_f > 0.0,
    ));
    checks.push(ConditionCheck::new(Boundedness, "g_U + a_U > 0", p.g_u + p.a_u > 0.0));
    checks.push(ConditionCheck::new(Boundedness, "g_G + a_G > 0", p.g_g + p.a_g > 0.0));
    checks.push(ConditionCheck::new(Boundedness, "a_P > 0", p.a_p > 0.0));
    checks.push(ConditionCheck::new(Boundedness, "a_F > 0", p.a_f > 0.0));
    FeasibilityReport { checks }
}

/// Signs of the one-step postdoc and faculty increments under the
/// unconstrained map, decided from the gain/loss comparison alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccumulationSigns {
    pub postdoc: Ordering,
    pub faculty: Ordering,
}

impl AccumulationSigns {
    pub fn dp_positive(&self) -> bool {
        self.postdoc == Ordering::Greater
    }

    pub fn df_positive(&self) -> bool {
        self.faculty == Ordering::Greater
    }
}

/// `dP > 0` iff graduate placement into postdocs exceeds postdoc losses
/// `(p_PF(F) + a_P) P`; `dF > 0` iff direct plus postdoc hires exceed
/// faculty exits. Ties compare `Equal`.
pub fn accumulation_predicates(state: &PipelineState, params: &ModelParams) -> Result<AccumulationSigns> {
    state.check()?;
    params.validate()?;
    let ppf = p_pf_unchecked(state.f, params);
    let (p_gain, p_loss) = postdoc_balance(state.g, state.p, ppf, params);
    let (f_gain, f_loss) = faculty_balance(state.g, state.p, state.f, ppf, params);
    let cmp = |a: f64, b: f64| a.partial_cmp(&b).ok_or(Error::NonFinite("accumulation_predicates"));
    Ok(AccumulationSigns {
        postdoc: cmp(p_gain, p_loss)?,
        faculty: cmp(f_gain, f_loss)?,
    })
}

/// Upper bound `U_0 + B_max / (g_U + a_U)` on the undergraduate stock under
/// inflow at most `b_max`.
pub fn analytic_bound_u(u0: f64, b_max: f64, params: &ModelParams) -> Result<f64> {
    nonneg("U0", u0)?;
    nonneg("B_max", b_max)?;
    let rate = params.g_u + params.a_u;
    if rate <= 0.0 {
        return Err(Error::DivisionGuard(
            "g_U + a_U = 0: undergraduate stock never decays".into(),
        ));
    }
    Ok(u0 + b_max / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamName;
    use crate::step::step_unconstrained;

    const BASE: ModelParams = ModelParams::BASELINE;

    #[test]
    fn baseline_passes_everything() {
        let r = feasibility_check(&BASE);
        assert!(r.all_hold(), "{:?}", r.failures().collect::<Vec<_>>());
        r.gate(false).unwrap();
    }

    #[test]
    fn undergrad_decay_violation() {
        let p = BASE.with(ParamName::GU, 0.9).with(ParamName::AU, 0.2);
        let r = feasibility_check(&p);
        assert!(!r.group_holds(ConditionGroup::Positivity));
        let failed: Vec<_> = r.failures().map(|c| c.condition.as_str()).collect();
        assert_eq!(failed, ["g_U + a_U <= 1"]);
        let err = r.gate(false).unwrap_err().to_string();
        assert!(err.contains("g_U + a_U <= 1"), "{err}");
        r.gate(true).unwrap();
    }

    #[test]
    fn zero_faculty_exit_breaks_boundedness() {
        let r = feasibility_check(&BASE.with(ParamName::AF, 0.0));
        assert!(r.group_holds(ConditionGroup::Positivity));
        assert!(!r.group_holds(ConditionGroup::Boundedness));
        let err = r.gate(false).unwrap_err().to_string();
        assert!(err.contains("boundedness: a_F > 0"), "{err}");
    }

    #[test]
    fn override_never_skips_domain() {
        let r = feasibility_check(&BASE.with(ParamName::KF, -5.0));
        assert!(r.gate(true).is_err());
    }

    #[test]
    fn predicate_examples() {
        let s = PipelineState::new(0.0, 1_000.0, 100.0, 0.0);
        assert!(accumulation_predicates(&s, &BASE).unwrap().dp_positive());
        let s = PipelineState::new(0.0, 0.0, 0.0, 1_000.0);
        assert!(!accumulation_predicates(&s, &BASE).unwrap().df_positive());
        let signs = accumulation_predicates(&PipelineState::default(), &BASE).unwrap();
        assert_eq!(signs.postdoc, Ordering::Equal);
        assert_eq!(signs.faculty, Ordering::Equal);
        assert!(!signs.dp_positive() && !signs.df_positive());
    }

    #[test]
    fn predicates_match_step_on_examples() {
        let s = PipelineState::new(500.0, 1_000.0, 100.0, 2_000.0);
        let (next, _) = step_unconstrained(&s, 10.0, &BASE).unwrap();
        let signs = accumulation_predicates(&s, &BASE).unwrap();
        assert_eq!(signs.postdoc, next.p.partial_cmp(&s.p).unwrap());
        assert_eq!(signs.faculty, next.f.partial_cmp(&s.f).unwrap());
    }

    #[test]
    fn bound_examples() {
        assert!((analytic_bound_u(0.0, 26_000.0, &BASE).unwrap() - 100_000.0).abs() < 1e-9);
        assert_eq!(analytic_bound_u(123.0, 0.0, &BASE).unwrap(), 123.0);
        let unit = BASE.with(ParamName::GU, 0.5).with(ParamName::AU, 0.5);
        assert_eq!(analytic_bound_u(0.0, 1.0, &unit).unwrap(), 1.0);
        let stuck = BASE.with(ParamName::GU, 0.0).with(ParamName::AU, 0.0);
        assert!(matches!(
            analytic_bound_u(0.0, 1.0, &stuck),
            Err(Error::DivisionGuard(_))
        ));
    }
}

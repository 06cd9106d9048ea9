//! Vacancies, candidate supply and the allocation of capped hires.

use crate::error::{nonneg, Result};
use crate::params::ModelParams;
use crate::transition::p_pf_unchecked;

/// Openings created by faculty exits.
pub fn vacancies(f: f64, params: &ModelParams) -> Result<f64> {
    nonneg("F", f)?;
    Ok(params.a_f * f)
}

/// Graduate completers applying directly for faculty positions.
pub fn candidate_supply_direct(g: f64, params: &ModelParams) -> Result<f64> {
    nonneg("G", g)?;
    Ok(params.p_gf * params.g_g * g)
}

/// Postdocs applying for faculty positions at the current competition level.
pub fn candidate_supply_postdoc(p: f64, f: f64, params: &ModelParams) -> Result<f64> {
    nonneg("P", p)?;
    nonneg("F", f)?;
    Ok(p_pf_unchecked(f, params) * p)
}

/// Realized hires for one year, split by candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hires {
    pub total: f64,
    pub direct: f64,
    pub postdoc: f64,
}

/// Caps hires at the number of openings and splits them between the two
/// pools in proportion to supply. No candidates means no hires.
pub fn allocate_hires(vacancies: f64, c_dir: f64, c_post: f64) -> Result<Hires> {
    nonneg("V", vacancies)?;
    nonneg("c_dir", c_dir)?;
    nonneg("c_post", c_post)?;
    Ok(allocate_unchecked(vacancies, c_dir, c_post))
}

pub(crate) fn allocate_unchecked(vacancies: f64, c_dir: f64, c_post: f64) -> Hires {
    let supply = c_dir + c_post;
    if supply <= 0.0 {
        return Hires::default();
    }
    let total = vacancies.min(supply);
    // fill fraction <= 1 after rounding, so postdoc hires never exceed c_post
    let fill = total / supply;
    let postdoc = if c_dir == 0.0 { total } else { c_post * fill };
    Hires {
        total,
        direct: (total - postdoc).max(0.0),
        postdoc,
    }
}

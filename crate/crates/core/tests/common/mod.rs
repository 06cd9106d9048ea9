//! Random feasible parameters and states shared by the integration suites.
#![allow(dead_code)]

use pipeline_core::{ModelParams, PipelineState};
use rand::Rng;

/// Uniform draw that occasionally lands exactly on an endpoint.
fn edgy<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    match rng.random_range(0..20) {
        0 => lo,
        1 => hi,
        _ => rng.random_range(lo..=hi),
    }
}

/// Log-uniform magnitude in `[0, 10^max_exp]`, zero about 5% of the time.
pub fn stock<R: Rng>(rng: &mut R, max_exp: f64) -> f64 {
    if rng.random_range(0..20) == 0 {
        0.0
    } else {
        10f64.powf(rng.random_range(-3.0..max_exp))
    }
}

/// Parameters satisfying every positivity and boundedness condition,
/// including boundary cases where a stage's total loss rate is exactly one.
pub fn feasible_params<R: Rng>(rng: &mut R) -> ModelParams {
    let g_u = edgy(rng, 0.0, 1.0);
    let a_u = edgy(rng, 0.0, 1.0 - g_u);
    let g_g = edgy(rng, 0.0, 1.0);
    let a_g = edgy(rng, 0.0, 1.0 - g_g);
    let p_gp = edgy(rng, 0.0, 1.0);
    let p_gf = edgy(rng, 0.0, 1.0 - p_gp);
    let a_p = rng.random_range(1e-4..=1.0);
    let p_pf_max = edgy(rng, 0.0, 1.0 - a_p);
    let a_f = rng.random_range(1e-4..=1.0);
    let r_m = rng.random_range(0.0..=1.0);
    let mut p = ModelParams {
        g_u,
        a_u,
        g_g,
        a_g,
        p_gp,
        p_gf,
        a_p,
        a_f,
        p_ug_max: edgy(rng, 0.0, 1.0),
        k_g: 10f64.powf(rng.random_range(1.0..6.0)),
        p_pf_max,
        k_f: 10f64.powf(rng.random_range(1.0..5.0)),
        alpha_f: edgy(rng, 0.0, 10.0),
        r_m,
        r_d: 1.0 - r_m,
    };
    // boundedness needs a strictly positive loss rate at the upstream stages
    if p.g_u + p.a_u == 0.0 {
        p.a_u = 0.05;
    }
    if p.g_g + p.a_g == 0.0 {
        p.a_g = 0.05;
    }
    p
}

pub fn random_state<R: Rng>(rng: &mut R) -> PipelineState {
    PipelineState::new(stock(rng, 6.0), stock(rng, 5.0), stock(rng, 5.0), stock(rng, 5.0))
}

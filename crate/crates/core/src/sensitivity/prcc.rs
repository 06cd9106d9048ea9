//! Partial rank correlation coefficients.
//!
//! For parameter `j`, all columns and the outcome are rank-transformed; the
//! ranks of `j` and of the outcome are each regressed (OLS with intercept)
//! on the ranks of every other parameter, and the coefficient is the Pearson
//! correlation of the two residual vectors.

use rayon::prelude::*;
use serde::Serialize;

use super::{lhs_sample, Outcome, OutcomeSummary, ParamRange, SweepOptions};
use crate::error::{Error, Result};
use crate::ingest::DegreeSeries;
use crate::params::ParamName;
use crate::scenario::{run_scenario_with, ScenarioSpec};

/// Relative norm below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrccEntry {
    pub parameter: String,
    pub coefficient: f64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrccResult {
    pub entries: Vec<PrccEntry>,
    pub n: usize,
    pub seed: u64,
    pub outcome: Outcome,
}

impl PrccResult {
    pub fn coefficient(&self, parameter: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.parameter == parameter)
            .map(|e| e.coefficient)
    }
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the span of `columns` (modified Gram-Schmidt with
/// one reorthogonalization pass). Fails on linear dependence.
fn orthonormal_basis(columns: &[&[f64]], names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
    for (col, name) in columns.iter().zip(names) {
        let mut v = col.to_vec();
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm0 == 0.0 || norm <= RANK_TOL * norm0 {
            return Err(Error::Degenerate(format!(
                "rank-deficient regression: `{name}` is constant or collinear with other columns"
            )));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    Ok(basis)
}

fn residual(target: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut r = target.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
    }
    r
}

/// PRCC of each sample column against the outcome. `samples[i][j]` is
/// parameter `j` in sample `i`.
pub fn prcc(samples: &[Vec<f64>], outcomes: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    let k = samples.first().map_or(0, Vec::len);
    if n != outcomes.len() {
        return Err(Error::Degenerate(format!(
            "{n} samples but {} outcomes",
            outcomes.len()
        )));
    }
    if k == 0 || n < k + 2 {
        return Err(Error::Degenerate(format!(
            "need at least {} samples for {k} parameters, got {n}",
            k + 2
        )));
    }
    if samples.iter().any(|row| row.len() != k) {
        return Err(Error::Degenerate("ragged sample matrix".into()));
    }
    if samples.iter().flatten().chain(outcomes).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("prcc input"));
    }

    let ranks: Vec<Vec<f64>> = (0..k)
        .map(|j| rank_average(&samples.iter().map(|row| row[j]).collect::<Vec<_>>()))
        .collect();
    let outcome_ranks = rank_average(outcomes);
    let ones = vec![1.0; n];
    let labels: Vec<String> = (0..k).map(|j| format!("column {j}")).collect();

    (0..k)
        .map(|j| {
            let mut cols: Vec<&[f64]> = vec![&ones];
            let mut names: Vec<&str> = vec!["intercept"];
            for (i, r) in ranks.iter().enumerate().filter(|(i, _)| *i != j) {
                cols.push(r);
                names.push(&labels[i]);
            }
            let basis = orthonormal_basis(&cols, &names)?;
            let rx = residual(&ranks[j], &basis);
            let ry = residual(&outcome_ranks, &basis);
            let (sxx, syy) = (dot(&rx, &rx), dot(&ry, &ry));
            let x_scale = dot(&ranks[j], &ranks[j]);
            let y_scale = dot(&outcome_ranks, &outcome_ranks);
            if sxx <= (RANK_TOL * RANK_TOL) * x_scale {
                return Err(Error::Degenerate(format!(
                    "rank-deficient regression: `{}` is constant or collinear with other columns",
                    labels[j]
                )));
            }
            if syy <= (RANK_TOL * RANK_TOL) * y_scale {
                // the other parameters explain the outcome ranks exactly:
                // nothing is left for parameter j to account for
                return Ok(0.0);
            }
            Ok((dot(&rx, &ry) / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
        })
        .collect()
}

/// Samples the given parameter ranges by Latin hypercube, runs `base` at
/// every sample and computes PRCC against `outcome`.
pub fn prcc_analysis(
    base: &ScenarioSpec,
    series: &DegreeSeries,
    ranges: &[ParamRange],
    n: usize,
    seed: u64,
    outcome: Outcome,
    options: &SweepOptions,
) -> Result<PrccResult> {
    let names: Vec<ParamName> = ranges
        .iter()
        .map(|r| ParamName::parse_sweepable(&r.name))
        .collect::<Result<_>>()?;
    let design = lhs_sample(ranges, n, seed)?;

    let outcomes: Vec<f64> = design
        .samples
        .par_iter()
        .map(|row| {
            let params = names
                .iter()
                .zip(row)
                .fold(base.params, |p, (&name, &v)| p.with(name, v));
            let spec = ScenarioSpec { params, ..base.clone() };
            let tr = run_scenario_with(&spec, series, options.override_feasibility)?;
            OutcomeSummary::from_trajectory(&tr, options.threshold)?
                .get(outcome)
                .ok_or_else(|| Error::Degenerate(format!("outcome {outcome} undefined for a sample")))
        })
        .collect::<Result<_>>()?;

    let coefficients = prcc(&design.samples, &outcomes)?;
    Ok(PrccResult {
        entries: ranges
            .iter()
            .zip(coefficients)
            .map(|(r, coefficient)| PrccEntry {
                parameter: r.name.clone(),
                coefficient,
                low: r.low,
                high: r.high,
            })
            .collect(),
        n,
        seed,
        outcome,
    })
}

//! Command implementations behind the `pipeline` binary: load inputs, run,
//! and emit CSV tables plus a `manifest.json` listing every file with its
//! SHA-256.
//!
//! Output bytes depend only on the config bytes, the data bytes and the
//! seed. Floats are written in Rust's shortest round-trip form, absent
//! values as empty fields, and the manifest carries no timestamps or
//! absolute output paths.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{CompositionMode, RunConfig};
use crate::error::{Error, Result};
use crate::feasibility::feasibility_check;
use crate::ingest::{
    consistency_report, estimate_composition, parse_degree_csv, reconstruct_stocks, Channel, ConsistencyReport,
    DegreeSeries, BUNDLED_SAMPLE,
};
use crate::metrics::MetricSeries;
use crate::params::{ModelParams, ParamName};
use crate::scenario::{run_scenario_with, ScenarioSpec};
use crate::sensitivity::{
    default_oat_grid, heatmap_sweep, oat_sweep, prcc_analysis, Heatmap, OatSweep, OutcomeSummary, PrccResult,
    SweepOptions,
};
use crate::state::Trajectory;

const MANIFEST: &str = "manifest.json";
const BUNDLED_NAME: &str = "bundled:synthetic_degrees.csv";
/// Years averaged for the tail pressure in `scenarios.csv`.
const PRESSURE_TAIL: usize = 10;

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub override_feasibility: bool,
    pub threads: Option<usize>,
}

/// A resolved run: config, loaded data and their checksums.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub config: RunConfig,
    pub config_sha256: Option<String>,
    pub data_source: String,
    pub data_sha256: String,
    pub series: DegreeSeries,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Inputs {
    /// Reads the config (if any), applies `overrides`, and loads the data.
    pub fn load(config_path: Option<&Path>, overrides: &RunOverrides) -> Result<Self> {
        let (mut config, config_sha256) = match config_path {
            Some(path) => {
                let (c, bytes) = RunConfig::load(path)?;
                (c, Some(sha256_hex(&bytes)))
            }
            None => (RunConfig::default(), None),
        };
        if let Some(d) = &overrides.data {
            config.data = Some(d.clone());
        } else if let (Some(d), Some(cfg)) = (&config.data, config_path) {
            // relative data paths in a config resolve against the config's directory
            if d.is_relative() {
                let base = cfg.parent().unwrap_or(Path::new(""));
                config.data = Some(base.join(d));
            }
        }
        if let Some(o) = &overrides.out {
            config.output_dir = Some(o.clone());
        }
        if overrides.seed.is_some() {
            config.seed = overrides.seed;
        }
        config.override_feasibility |= overrides.override_feasibility;
        if overrides.threads.is_some() {
            config.threads = overrides.threads;
        }
        Self::from_config(config, config_sha256)
    }

    pub fn from_config(config: RunConfig, config_sha256: Option<String>) -> Result<Self> {
        let (data_source, bytes) = match &config.data {
            Some(path) => (
                path.display().to_string(),
                fs::read(path).map_err(|e| Error::io(path, e))?,
            ),
            None => (BUNDLED_NAME.to_string(), BUNDLED_SAMPLE.as_bytes().to_vec()),
        };
        let series = parse_degree_csv(bytes.as_slice()).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{data_source}: {msg}")),
            other => other,
        })?;
        Ok(Inputs {
            config,
            config_sha256,
            data_source,
            data_sha256: sha256_hex(&bytes),
            series,
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Resolved parameters with the composition applied, refused when a
    /// feasibility condition fails (unless overridden).
    pub fn params(&self) -> Result<ModelParams> {
        let mut params = self.config.resolved_params()?;
        if self.config.composition == CompositionMode::Estimate {
            let (r_m, _) = estimate_composition(&self.series)?;
            params = params.with_composition(r_m);
        }
        feasibility_check(&params).gate(self.config.override_feasibility)?;
        Ok(params)
    }

    fn sweep_options(&self, skip_infeasible: bool) -> SweepOptions {
        SweepOptions {
            threshold: self.config.sensitivity.threshold,
            skip_infeasible,
            override_feasibility: self.config.override_feasibility,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataEntry {
    pub source: String,
    pub sha256: String,
    pub first_year: i32,
    pub last_year: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub override_feasibility: bool,
    pub config_sha256: Option<String>,
    pub data: DataEntry,
    pub params: ModelParams,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
}

/// Collects output files in memory order and writes them one at a time.
struct OutputSet {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputSet {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn finish(self, inputs: &Inputs, command: &str, params: ModelParams, warnings: Vec<String>) -> Result<Manifest> {
        let recs = inputs.series.records();
        let manifest = Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: inputs.config.seed(),
            override_feasibility: inputs.config.override_feasibility,
            config_sha256: inputs.config_sha256.clone(),
            data: DataEntry {
                source: inputs.data_source.clone(),
                sha256: inputs.data_sha256.clone(),
                first_year: recs[0].year,
                last_year: recs[recs.len() - 1].year,
            },
            params,
            files: self.files,
            warnings,
        };
        let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
        json.push(b'\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_year(v: Option<i32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Accumulates CSV text; every field we emit is numeric or a plain label.
struct Table(String);

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut t = Table(String::new());
        t.row(header.iter().map(|s| s.to_string()));
        t
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line: Vec<String> = fields.into_iter().collect();
        let _ = writeln!(self.0, "{}", line.join(","));
    }

    fn into_bytes(self) -> Vec<u8> {
        self.0.into_bytes()
    }
}

/// Characters allowed in file names derived from scenario labels.
fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Columns: `year,U,G,P,F,V,c_dir,c_post,H,H_post,market_pressure,
/// competition_intensity,postdoc_share,pf_ratio`. Flow columns describe the
/// step leaving each year and are blank on the final row.
pub fn trajectory_csv(trajectory: &Trajectory) -> Vec<u8> {
    let metrics = MetricSeries::from_trajectory(trajectory);
    let mut t = Table::new(&[
        "year",
        "U",
        "G",
        "P",
        "F",
        "V",
        "c_dir",
        "c_post",
        "H",
        "H_post",
        "market_pressure",
        "competition_intensity",
        "postdoc_share",
        "pf_ratio",
    ]);
    for (i, (s, m)) in trajectory.states.iter().zip(&metrics.rows).enumerate() {
        let l = trajectory.ledgers.get(i);
        let flow = |f: fn(&crate::state::StepLedger) -> f64| opt(l.map(f));
        t.row([
            m.year.to_string(),
            s.u.to_string(),
            s.g.to_string(),
            s.p.to_string(),
            s.f.to_string(),
            flow(|l| l.vacancies),
            flow(|l| l.c_dir),
            flow(|l| l.c_post),
            flow(|l| l.hires_total),
            flow(|l| l.hires_post),
            opt(m.market_pressure),
            opt(m.competition_intensity),
            opt(m.postdoc_share),
            opt(m.pf_ratio),
        ]);
    }
    t.into_bytes()
}

/// Columns: `scenario,regime,year,market_pressure,competition_intensity,
/// postdoc_share,pf_ratio,P_index,F_index`.
pub fn metrics_csv(trajectories: &[Trajectory]) -> Vec<u8> {
    let mut t = Table::new(&[
        "scenario",
        "regime",
        "year",
        "market_pressure",
        "competition_intensity",
        "postdoc_share",
        "pf_ratio",
        "P_index",
        "F_index",
    ]);
    for tr in trajectories {
        let m = MetricSeries::from_trajectory(tr);
        for r in &m.rows {
            t.row([
                m.label.clone(),
                m.regime.as_str().to_string(),
                r.year.to_string(),
                opt(r.market_pressure),
                opt(r.competition_intensity),
                opt(r.postdoc_share),
                opt(r.pf_ratio),
                opt(r.p_index),
                opt(r.f_index),
            ]);
        }
    }
    t.into_bytes()
}

fn scenarios_csv(specs: &[ScenarioSpec], trajectories: &[Trajectory], threshold: f64) -> Result<Vec<u8>> {
    let mut t = Table::new(&[
        "scenario",
        "regime",
        "inflow_scale",
        "first_year",
        "last_year",
        "final_P",
        "final_F",
        "peak_P",
        "peak_F",
        "terminal_ratio",
        "mean_pressure_tail",
        "final_postdoc_share",
        "first_threshold_year",
    ]);
    for (spec, tr) in specs.iter().zip(trajectories) {
        let s = OutcomeSummary::from_trajectory(tr, threshold)?;
        let m = MetricSeries::from_trajectory(tr);
        t.row([
            spec.label.clone(),
            tr.regime.as_str().to_string(),
            spec.inflow_scale.to_string(),
            tr.first_year.to_string(),
            tr.year(tr.len() - 1).to_string(),
            s.final_p.to_string(),
            s.final_f.to_string(),
            s.peak_p.to_string(),
            s.peak_f.to_string(),
            opt(s.terminal_pf_ratio),
            opt(m.mean_pressure_tail(PRESSURE_TAIL)),
            opt(m.final_postdoc_share()),
            opt_year(s.first_threshold_year),
        ]);
    }
    Ok(t.into_bytes())
}

/// Columns: `value,final_F,peak_F,final_P,peak_P`.
pub fn oat_csv(sweep: &OatSweep) -> Vec<u8> {
    let mut t = Table::new(&["value", "final_F", "peak_F", "final_P", "peak_P"]);
    for (v, s) in &sweep.rows {
        t.row([
            v.to_string(),
            s.final_f.to_string(),
            s.peak_f.to_string(),
            s.final_p.to_string(),
            s.peak_p.to_string(),
        ]);
    }
    t.into_bytes()
}

/// Columns: `parameter,coefficient,n,low,high,seed`.
pub fn prcc_csv(result: &PrccResult) -> Vec<u8> {
    let mut t = Table::new(&["parameter", "coefficient", "n", "low", "high", "seed"]);
    for e in &result.entries {
        t.row([
            e.parameter.clone(),
            e.coefficient.to_string(),
            result.n.to_string(),
            e.low.to_string(),
            e.high.to_string(),
            result.seed.to_string(),
        ]);
    }
    t.into_bytes()
}

/// Columns: `a_F,K_F,terminal_ratio,first_threshold_year`, row-major with
/// `a_F` as the outer axis.
pub fn heatmap_csv(map: &Heatmap) -> Vec<u8> {
    let mut t = Table::new(&["a_F", "K_F", "terminal_ratio", "first_threshold_year"]);
    for c in &map.cells {
        t.row([
            c.a_f.to_string(),
            c.k_f.to_string(),
            opt(c.terminal_ratio),
            opt_year(c.first_threshold_year),
        ]);
    }
    t.into_bytes()
}

/// Runs `f` on a dedicated pool with `threads` workers (rayon's default
/// when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Result of `cmd_ingest`: the manifest and max relative error per channel.
#[derive(Debug, Clone)]
pub struct IngestSummary {
    pub manifest: Manifest,
    pub max_errors: Vec<(Channel, Option<f64>)>,
}

/// Writes `reconstruction.csv` (`year,bachelors,masters,doctorates,U,G`) and
/// `consistency.csv`.
pub fn cmd_ingest(inputs: &Inputs, out: &Path) -> Result<IngestSummary> {
    let params = inputs.params()?;
    let stocks = reconstruct_stocks(&inputs.series, &params)?;
    let report = consistency_report(&inputs.series, &params)?;
    let mut files = OutputSet::create(out)?;

    let mut t = Table::new(&["year", "bachelors", "masters", "doctorates", "U", "G"]);
    for (i, r) in inputs.series.records().iter().enumerate() {
        t.row([
            r.year.to_string(),
            r.bachelors.to_string(),
            r.masters.to_string(),
            r.doctorates.to_string(),
            stocks.undergrad[i].to_string(),
            stocks.graduate[i].to_string(),
        ]);
    }
    files.write("reconstruction.csv", &t.into_bytes())?;

    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    files.write("consistency.csv", &buf)?;

    let max_errors = Channel::ALL.iter().map(|&c| (c, report.max_rel_error(c))).collect();
    let manifest = files.finish(inputs, "ingest", params, vec![ConsistencyReport::NOTE.to_string()])?;
    Ok(IngestSummary { manifest, max_errors })
}

/// Runs every configured scenario. Writes `trajectory_<label>.csv` per
/// scenario, `metrics.csv` and `scenarios.csv`.
pub fn cmd_simulate(inputs: &Inputs, out: &Path) -> Result<Manifest> {
    use rayon::prelude::*;

    let params = inputs.params()?;
    let specs = inputs.config.scenario_specs(&params)?;
    for s in &specs {
        feasibility_check(&s.params)
            .gate(inputs.config.override_feasibility)
            .map_err(|e| Error::Scenario(format!("{}: {e}", s.label)))?;
    }
    let mut stems = std::collections::BTreeSet::new();
    for s in &specs {
        if !stems.insert(file_stem(&s.label)) {
            return Err(Error::Config(format!(
                "scenario label `{}` collides with another file name",
                s.label
            )));
        }
    }

    let trajectories: Vec<Trajectory> = specs
        .par_iter()
        .map(|s| run_scenario_with(s, &inputs.series, inputs.config.override_feasibility))
        .collect::<Result<_>>()?;

    let mut files = OutputSet::create(out)?;
    for tr in &trajectories {
        files.write(&format!("trajectory_{}.csv", file_stem(&tr.label)), &trajectory_csv(tr))?;
    }
    files.write("metrics.csv", &metrics_csv(&trajectories))?;
    files.write(
        "scenarios.csv",
        &scenarios_csv(&specs, &trajectories, inputs.config.sensitivity.threshold)?,
    )?;
    files.finish(inputs, "simulate", params, Vec::new())
}

fn base_spec(inputs: &Inputs, params: ModelParams) -> ScenarioSpec {
    ScenarioSpec::new("sensitivity", inputs.config.sensitivity.regime, params)
}

fn run_heatmap(inputs: &Inputs, params: ModelParams) -> Result<Heatmap> {
    let cfg = &inputs.config.sensitivity.heatmap;
    heatmap_sweep(
        &cfg.a_f.values(),
        &cfg.k_f.values(),
        &base_spec(inputs, params),
        &inputs.series,
        &inputs.sweep_options(false),
    )
}

/// OAT sweeps (`oat_<param>.csv` each), PRCC (`prcc.csv`) and the
/// congestion heatmap (`heatmap.csv`).
pub fn cmd_sensitivity(inputs: &Inputs, out: &Path) -> Result<Manifest> {
    let params = inputs.params()?;
    let sens = &inputs.config.sensitivity;
    let base = base_spec(inputs, params);

    // resolve every name before running anything
    let oat_params: Vec<ParamName> = sens
        .oat
        .parameters
        .iter()
        .map(|n| ParamName::parse_sweepable(n))
        .collect::<Result<_>>()?;
    let ranges = inputs.config.prcc_ranges(&params)?;

    let options = inputs.sweep_options(sens.oat.skip_infeasible);
    let mut warnings = Vec::new();
    let mut sweeps = Vec::with_capacity(oat_params.len());
    for &p in &oat_params {
        let grid = default_oat_grid(p, params.get(p), sens.oat.points, sens.oat.span);
        let sweep = oat_sweep(&base, &inputs.series, p.as_str(), &grid, &options)?;
        for (v, why) in &sweep.skipped {
            warnings.push(format!("oat {p} = {v} skipped: {why}"));
        }
        sweeps.push(sweep);
    }
    let prcc = prcc_analysis(
        &base,
        &inputs.series,
        &ranges,
        sens.prcc.samples,
        inputs.config.seed(),
        sens.prcc.outcome,
        &inputs.sweep_options(false),
    )?;
    let map = run_heatmap(inputs, params)?;

    let mut files = OutputSet::create(out)?;
    for s in &sweeps {
        files.write(&format!("oat_{}.csv", s.param), &oat_csv(s))?;
    }
    files.write("prcc.csv", &prcc_csv(&prcc))?;
    files.write("heatmap.csv", &heatmap_csv(&map))?;
    files.finish(inputs, "sensitivity", params, warnings)
}

/// The `(a_F, K_F)` congestion heatmap alone.
pub fn cmd_sweep(inputs: &Inputs, out: &Path) -> Result<Manifest> {
    let params = inputs.params()?;
    let map = run_heatmap(inputs, params)?;
    let warnings = map
        .cells
        .iter()
        .filter(|c| !c.feasible)
        .map(|c| format!("heatmap cell a_F = {}, K_F = {} infeasible", c.a_f, c.k_f))
        .collect();
    let mut files = OutputSet::create(out)?;
    files.write("heatmap.csv", &heatmap_csv(&map))?;
    files.finish(inputs, "sweep", params, warnings)
}

//! Discrete-time stock-flow model of the academic pipeline in the
//! mathematical sciences.
//!
//! Undergraduate and graduate stocks are reconstructed from observed degree
//! series; postdoctoral and faculty stocks evolve under either unconstrained
//! hiring or hiring capped by faculty vacancies. On top of the model sit
//! scenario runs, derived metrics, one-at-a-time and PRCC sensitivity
//! analyses, and 2-D congestion sweeps, all emitted as CSV tables.

pub mod config;
pub mod error;
pub mod feasibility;
pub mod hiring;
pub mod ingest;
pub mod metrics;
pub mod params;
pub mod report;
pub mod scenario;
pub mod sensitivity;
pub mod state;
pub mod step;
pub mod transition;

pub use error::{Error, Result};
pub use feasibility::{accumulation_predicates, analytic_bound_u, feasibility_check, FeasibilityReport};
pub use hiring::{allocate_hires, candidate_supply_direct, candidate_supply_postdoc, vacancies, Hires};
pub use ingest::{DegreeRecord, DegreeSeries, ReconstructedStocks};
pub use params::{ModelParams, ParamName};
pub use scenario::{Projection, ScenarioSpec};
pub use state::{PipelineState, Regime, StepLedger, Trajectory};
pub use step::{step_downstream_uncapped, step_unconstrained, step_vacancy_limited, DownstreamStep};
pub use transition::{p_pf, p_ug};

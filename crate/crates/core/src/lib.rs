//! Severity-aware structural reliability.
//!
//! Classical reliability reports how often a limit state `g(X)` goes
//! negative (`p_f`, `β = −Φ⁻¹(p_f)`). This crate adds how deep those
//! failures go: the expected failure deficit `E_f = E[−g | g < 0]`, its
//! normalized form `E_f* = E_f/σ_g`, and the severity-aware index `β_S`
//! that solves `φ(b)/Φ(−b) − b = E_f*`. Normalized deficits at or beyond
//! `2/√(2π)` have no Gaussian equivalent and are reported as extreme.
//!
//! Module map:
//! - [`gaussian`]: normal special functions, the deficit map and its inverse.
//! - [`distribution`]: parametric inputs with seeded sampling and moments.
//! - [`engine`]: linear limit states, chunked reproducible Monte Carlo,
//!   shift calibration and robust scales.
//! - [`severity`]: metric set, five-level classification, two-tier workflow.
//! - [`analysis`]: simulate, score and assess in one call.
//! - [`scenario`]: canned reproductions and histogram data.
//! - [`config`] and [`report`]: the TOML analysis file and JSON/CSV outputs.

pub mod analysis;
pub mod config;
pub mod distribution;
pub mod engine;
mod error;
pub mod gaussian;
pub mod report;
pub mod scenario;
pub mod severity;
mod stats;

pub use analysis::{analyze, Analysis, AnalysisRequest, Assessment};
pub use config::AnalysisConfig;
pub use distribution::{DistributionSpec, GumbelTail, MixtureComponent, MomentReport};
pub use engine::{LimitStateModel, RobustScales, SimulationConfig, SimulationSummary, Term};
pub use error::{Error, Result};
pub use gaussian::{DeficitDomain, GAUSSIAN_ENDPOINT};
pub use report::ReportDocument;
pub use scenario::{Scenario, ScenarioId, ScenarioResult};
pub use severity::{
    DeficitMeasure, ExtremeFlag, ReportOptions, SeverityIndex, SeverityLevel, SeverityReport,
    Verdict, WorkflowDecision,
};

//! Simulate, compute metrics and run the design check in one call.

use serde::{Deserialize, Serialize};

use crate::engine::{
    calibrate_shift, histograms, log_edges, simulate_with_threads, uniform_edges, LimitStateModel,
    SimulationConfig, SimulationSummary,
};
use crate::error::Result;
use crate::severity::{assess, ReportOptions, SeverityLevel, SeverityReport, WorkflowDecision};

pub const G_BINS: usize = 200;
pub const DEFICIT_BINS: usize = 100;
/// Deficit histograms switch to geometric bins above this max/min ratio.
pub const LOG_BIN_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Assessment {
    pub beta_target: f64,
    pub max_acceptable_level: SeverityLevel,
}

#[derive(Debug, Clone)]
pub struct AnalysisRequest<'a> {
    pub model: &'a LimitStateModel,
    /// Calibrate the shift to this failure probability before the run.
    pub target_pf: Option<f64>,
    pub simulation: &'a SimulationConfig,
    pub assessment: Option<Assessment>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    /// The model actually simulated (shift replaced when calibrated).
    pub model: LimitStateModel,
    pub calibrated_shift: Option<f64>,
    pub summary: SimulationSummary,
    pub report: SeverityReport,
    pub decision: Option<WorkflowDecision>,
}

pub fn analyze(request: &AnalysisRequest<'_>) -> Result<Analysis> {
    let (model, calibrated_shift) = match request.target_pf {
        Some(pf) => {
            let c = calibrate_shift(request.model, pf, request.simulation)?;
            (request.model.with_shift(c), Some(c))
        }
        None => (request.model.clone(), None),
    };
    let summary = simulate_with_threads(&model, request.simulation, request.threads)?;
    let report =
        SeverityReport::from_summary(&summary, &model.moments(), &ReportOptions::default())?;
    let decision = request
        .assessment
        .map(|a| assess(&report, a.beta_target, a.max_acceptable_level))
        .transpose()?;
    Ok(Analysis {
        model,
        calibrated_shift,
        summary,
        report,
        decision,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub log_scale: bool,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histograms of `g` (uniform bins over the observed range) and of the
/// failure deficits (geometric bins when their range spans more than
/// three decades). Replays the run, so costs a second pass.
pub fn analysis_histograms(
    analysis: &Analysis,
    simulation: &SimulationConfig,
    threads: Option<usize>,
) -> Result<(Histogram, Option<Histogram>)> {
    let s = &analysis.summary;
    let g_edges = uniform_edges(s.min_g, s.max_g, G_BINS);
    let deficit = match (s.min_deficit, s.max_deficit()) {
        (Some(lo), Some(hi)) if s.failure_count > 0 => {
            let log_scale = lo > 0.0 && hi / lo > LOG_BIN_RATIO;
            let edges = if log_scale {
                log_edges(lo, hi, DEFICIT_BINS)
            } else {
                uniform_edges(lo, hi, DEFICIT_BINS)
            };
            Some((edges, log_scale))
        }
        _ => None,
    };
    let (g_counts, d_counts) = histograms(
        &analysis.model,
        simulation,
        &g_edges,
        deficit.as_ref().map(|(e, _)| e.as_slice()),
        threads,
    )?;
    let g = Histogram {
        edges: g_edges,
        counts: g_counts,
        log_scale: false,
    };
    let d = deficit.map(|(edges, log_scale)| Histogram {
        edges,
        counts: d_counts,
        log_scale,
    });
    Ok((g, d))
}

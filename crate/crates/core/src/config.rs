//! TOML analysis configuration.
//!
//! ```toml
//! [model]
//! shift = 0.0            # optional
//! target_pf = 0.01       # optional: calibrate the shift instead
//!
//! [[model.terms]]
//! name = "R"
//! coefficient = 1.0
//! distribution = { kind = "lognormal", log_mean = 2.3, log_std = 0.2 }
//!
//! [simulation]           # every key optional
//! sample_count = 1000000
//! master_seed = 1
//! chunk_size = 65536
//! failure_reservoir_cap = 1000000
//! robust_subsample_cap = 100000
//!
//! [assessment]           # optional
//! beta_target = 3.5
//! max_acceptable_level = "II"
//!
//! [output]               # optional; relative paths resolve against the config file
//! report = "report.json"
//! histogram_csv = "g.csv"
//! deficit_csv = "deficit.csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::Assessment;
use crate::engine::{LimitStateModel, SimulationConfig, Term};
use crate::error::{Error, Result};
use crate::severity::SeverityLevel;

/// Default acceptable level when only a target index is given.
pub const DEFAULT_MAX_LEVEL: SeverityLevel = SeverityLevel::High;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModelSection,
    #[serde(default)]
    simulation: RawSimulation,
    assessment: Option<RawAssessment>,
    #[serde(default)]
    output: OutputPaths,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelSection {
    #[serde(default)]
    shift: f64,
    target_pf: Option<f64>,
    terms: Vec<Term>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    sample_count: Option<u64>,
    master_seed: Option<u64>,
    chunk_size: Option<u64>,
    failure_reservoir_cap: Option<usize>,
    robust_subsample_cap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAssessment {
    beta_target: Option<f64>,
    max_acceptable_level: Option<SeverityLevel>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub histogram_csv: Option<PathBuf>,
    pub deficit_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub model: LimitStateModel,
    pub target_pf: Option<f64>,
    pub simulation: SimulationConfig,
    pub assessment: Option<Assessment>,
    pub output: OutputPaths,
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

        let model = LimitStateModel::new(raw.model.terms, raw.model.shift)
            .map_err(|e| Error::Config(format!("model: {e}")))?;
        if let Some(pf) = raw.model.target_pf {
            if !(pf > 0.0 && pf < 1.0) {
                return Err(Error::Config(format!(
                    "model.target_pf: must lie in (0, 1), got {pf}"
                )));
            }
        }

        let defaults = SimulationConfig::default();
        let s = raw.simulation;
        let sample_count = s.sample_count.unwrap_or(defaults.sample_count);
        let simulation = SimulationConfig {
            sample_count,
            master_seed: s.master_seed.unwrap_or(defaults.master_seed),
            chunk_size: s
                .chunk_size
                .unwrap_or_else(|| defaults.chunk_size.min(sample_count.max(1))),
            failure_reservoir_cap: s
                .failure_reservoir_cap
                .unwrap_or(defaults.failure_reservoir_cap),
            robust_subsample_cap: s
                .robust_subsample_cap
                .unwrap_or(defaults.robust_subsample_cap),
        };
        simulation
            .validate()
            .map_err(|e| Error::Config(format!("simulation: {e}")))?;

        let assessment = match raw.assessment {
            None => None,
            Some(RawAssessment {
                beta_target: None,
                max_acceptable_level: Some(_),
            }) => {
                return Err(Error::Config(
                    "assessment.max_acceptable_level: needs assessment.beta_target".into(),
                ))
            }
            Some(RawAssessment {
                beta_target: None, ..
            }) => None,
            Some(RawAssessment {
                beta_target: Some(bt),
                max_acceptable_level,
            }) => {
                if !(bt > 0.0 && bt.is_finite()) {
                    return Err(Error::Config(format!(
                        "assessment.beta_target: must be positive, got {bt}"
                    )));
                }
                Some(Assessment {
                    beta_target: bt,
                    max_acceptable_level: max_acceptable_level.unwrap_or(DEFAULT_MAX_LEVEL),
                })
            }
        };

        Ok(AnalysisConfig {
            model,
            target_pf: raw.model.target_pf,
            simulation,
            assessment,
            output: raw.output,
        })
    }

    /// Reads a config file; relative output paths are resolved against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.output.report,
            &mut cfg.output.histogram_csv,
            &mut cfg.output.deficit_csv,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

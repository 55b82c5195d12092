//! Built-in reference scenarios with their expected outcomes, and CSV/JSON
//! export of results.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analysis_histograms, analyze, Analysis, AnalysisRequest, Assessment, Histogram,
};
use crate::distribution::DistributionSpec;
use crate::engine::{LimitStateModel, SimulationConfig, Term};
use crate::error::{Error, Result};
use crate::gaussian::deficit_map;
use crate::report::{write_atomic, ReportDocument};
use crate::severity::{ExtremeFlag, SeverityLevel, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Example1Gaussian,
    Example2Mild,
    Example3Extreme,
    CaseStudy,
    ScenarioA,
    ScenarioB,
    FigureGridGaussian,
    FigureGridMild,
    FigureGridHeavy,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        Self::Example1Gaussian,
        Self::Example2Mild,
        Self::Example3Extreme,
        Self::CaseStudy,
        Self::ScenarioA,
        Self::ScenarioB,
        Self::FigureGridGaussian,
        Self::FigureGridMild,
        Self::FigureGridHeavy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Example1Gaussian => "example1-gaussian",
            Self::Example2Mild => "example2-mild",
            Self::Example3Extreme => "example3-extreme",
            Self::CaseStudy => "case-study",
            Self::ScenarioA => "scenarioA",
            Self::ScenarioB => "scenarioB",
            Self::FigureGridGaussian => "figure-grid-gaussian",
            Self::FigureGridMild => "figure-grid-mild",
            Self::FigureGridHeavy => "figure-grid-heavy",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Metric {
    Pf,
    Beta,
    EfStar,
    BetaS,
    Level,
    ExtremeFlag,
    Verdict,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pf => "pf",
            Self::Beta => "beta",
            Self::EfStar => "efStar",
            Self::BetaS => "betaS",
            Self::Level => "level",
            Self::ExtremeFlag => "extremeFlag",
            Self::Verdict => "verdict",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Near {
        value: f64,
        tolerance: f64,
    },
    Level(SeverityLevel),
    Flag(ExtremeFlag),
    Verdict(Verdict),
    Absent,
    Present,
    /// `E_f*` strictly above the Gaussian benchmark `F(β)`.
    AboveBenchmark,
    /// `E_f*` strictly below the Gaussian benchmark `F(β)`.
    BelowBenchmark,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub metric: Metric,
    pub check: Check,
    pub source: &'static str,
}

impl Expectation {
    fn near(metric: Metric, value: f64, tolerance: f64, source: &'static str) -> Self {
        Expectation {
            metric,
            check: Check::Near { value, tolerance },
            source,
        }
    }

    fn is(metric: Metric, check: Check, source: &'static str) -> Self {
        Expectation {
            metric,
            check,
            source,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: ScenarioId,
    pub description: &'static str,
    pub model: LimitStateModel,
    pub target_pf: Option<f64>,
    pub simulation: SimulationConfig,
    pub assessment: Option<Assessment>,
    pub expectations: Vec<Expectation>,
}

fn term(name: &str, coefficient: f64, d: DistributionSpec) -> Term {
    Term::new(name, coefficient, d)
}

fn model(terms: Vec<Term>, shift: f64) -> LimitStateModel {
    LimitStateModel::new(terms, shift).expect("builtin model is valid")
}

fn resistance_lognormal() -> DistributionSpec {
    DistributionSpec::lognormal(1.6, 0.15)
}

const SCENARIO_AB_N: u64 = 1_000_000;
const SCENARIO_AB_PF: f64 = 0.01;

fn four_se(pf: f64, n: u64) -> f64 {
    4.0 * (pf * (1.0 - pf) / n as f64).sqrt()
}

pub fn builtin(id: &str) -> Result<Scenario> {
    Ok(builtin_id(id.parse()?))
}

pub fn builtin_id(id: ScenarioId) -> Scenario {
    use Metric::*;
    let sim = |n: u64| SimulationConfig::with_samples(n, 1);
    match id {
        ScenarioId::Example1Gaussian => Scenario {
            id,
            description: "R ~ N(10, 1), S ~ N(5, 1.5); g = R - S is exactly Gaussian with beta = 5/sqrt(3.25)",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::normal(10.0, 1.0)),
                    term("S", -1.0, DistributionSpec::normal(5.0, 1.5)),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(5_000_000),
            assessment: None,
            expectations: vec![
                Expectation::near(Beta, 2.7748, 0.03, "reference MC beta for the Gaussian example"),
                Expectation::near(EfStar, 0.3085, 0.01, "reference MC E_f* for the Gaussian example"),
                Expectation::near(BetaS, 2.667, 0.06, "reference MC beta_S for the Gaussian example"),
                Expectation::is(Level, Check::Level(SeverityLevel::Moderate), "beta_S in [2, 3)"),
            ],
        },
        ScenarioId::Example2Mild => Scenario {
            id,
            description: "R ~ Lognormal(2.3, 0.2), S ~ Gumbel-min(8, 1.2)",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::lognormal(2.3, 0.2)),
                    term("S", -1.0, DistributionSpec::gumbel_min(8.0, 1.2)),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(5_000_000),
            assessment: Some(Assessment {
                beta_target: 3.0,
                max_acceptable_level: SeverityLevel::High,
            }),
            expectations: vec![
                Expectation::near(Beta, 1.5236, 0.02, "reference beta for the mild non-Gaussian example"),
                Expectation::near(EfStar, 0.3040, 0.01, "reference E_f* for the mild non-Gaussian example"),
                Expectation::near(BetaS, 2.722, 0.06, "reference beta_S for the mild non-Gaussian example"),
                Expectation::is(Level, Check::Level(SeverityLevel::Moderate), "beta_S in [2, 3)"),
                Expectation::is(Verdict, Check::Verdict(crate::severity::Verdict::RejectFrequency), "beta below target 3.0"),
            ],
        },
        ScenarioId::Example3Extreme => Scenario {
            id,
            description: "R ~ N(20, 1.5), S ~ 0.999 N(5, 2) + 0.001 Pareto(10, 1.5); S has infinite variance",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::normal(20.0, 1.5)),
                    term(
                        "S",
                        -1.0,
                        DistributionSpec::mixture([
                            (0.999, DistributionSpec::normal(5.0, 2.0)),
                            (0.001, DistributionSpec::pareto(10.0, 1.5)),
                        ]),
                    ),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(5_000_000),
            assessment: Some(Assessment {
                beta_target: 3.0,
                max_acceptable_level: SeverityLevel::High,
            }),
            expectations: vec![
                Expectation::is(
                    ExtremeFlag,
                    Check::Flag(crate::severity::ExtremeFlag::VarianceInfiniteOrUnstable),
                    "sigma_g does not exist for a Pareto tail with alpha <= 2",
                ),
                Expectation::near(Beta, 3.388, 0.08, "reference beta for the heavy-tailed example"),
                Expectation::is(Level, Check::Level(SeverityLevel::Extreme), "infinite variance is level V"),
                Expectation::is(BetaS, Check::Absent, "beta_S not computable"),
                Expectation::is(Verdict, Check::Verdict(crate::severity::Verdict::ExtremeRedesign), "frequency passes, level V"),
            ],
        },
        ScenarioId::CaseStudy => Scenario {
            id,
            description: "g = R - (1.2 D + 1.6 L); R lognormal (median 1520, cov 0.10), D ~ N(500, 50), L a 0.9995/0.0005 Gumbel-min mixture",
            model: model(
                vec![
                    term(
                        "R",
                        1.0,
                        DistributionSpec::from_median_cov(1520.0, 0.10).expect("valid"),
                    ),
                    term("D", -1.2, DistributionSpec::normal(500.0, 50.0)),
                    term(
                        "L",
                        -1.6,
                        DistributionSpec::mixture([
                            (0.9995, DistributionSpec::gumbel_min(150.0, 30.0)),
                            (0.0005, DistributionSpec::gumbel_min(500.0, 30.0)),
                        ]),
                    ),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(2_000_000),
            assessment: Some(Assessment {
                beta_target: 3.5,
                max_acceptable_level: SeverityLevel::Moderate,
            }),
            expectations: vec![
                Expectation::near(Pf, 9.1e-5, 2.5e-5, "reference p_f for the load-combination case study"),
                Expectation::near(Beta, 3.744, 0.08, "reference beta for the case study"),
                Expectation::near(EfStar, 0.4741, 0.03, "reference E_f* for the case study"),
                Expectation::near(BetaS, 1.278, 0.08, "reference beta_S for the case study"),
                Expectation::is(Level, Check::Level(SeverityLevel::High), "beta_S in [1, 2)"),
                Expectation::is(Verdict, Check::Verdict(crate::severity::Verdict::AcceptWithLevel), "beta above 3.5; severity advisory"),
            ],
        },
        ScenarioId::ScenarioA => Scenario {
            id,
            description: "R ~ Lognormal(1.6, 0.15), S ~ Gumbel(2, 0.6), shift calibrated to p_f = 0.01",
            model: model(
                vec![
                    term("R", 1.0, resistance_lognormal()),
                    term("S", -1.0, DistributionSpec::gumbel(2.0, 0.6)),
                ],
                0.0,
            ),
            target_pf: Some(SCENARIO_AB_PF),
            simulation: sim(SCENARIO_AB_N),
            assessment: None,
            expectations: vec![
                Expectation::near(
                    Pf,
                    SCENARIO_AB_PF,
                    four_se(SCENARIO_AB_PF, SCENARIO_AB_N),
                    "calibration target, 4 binomial SE",
                ),
                Expectation::is(BetaS, Check::Present, "light failure tail has a Gaussian equivalent"),
            ],
        },
        ScenarioId::ScenarioB => Scenario {
            id,
            description: "R as scenario A, S ~ 0.995 Gumbel(2, 0.6) + 0.005 Gumbel(6, 0.6), shift calibrated to p_f = 0.01",
            model: model(
                vec![
                    term("R", 1.0, resistance_lognormal()),
                    term(
                        "S",
                        -1.0,
                        DistributionSpec::mixture([
                            (0.995, DistributionSpec::gumbel(2.0, 0.6)),
                            (0.005, DistributionSpec::gumbel(6.0, 0.6)),
                        ]),
                    ),
                ],
                0.0,
            ),
            target_pf: Some(SCENARIO_AB_PF),
            simulation: sim(SCENARIO_AB_N),
            assessment: None,
            expectations: vec![
                Expectation::near(
                    Pf,
                    SCENARIO_AB_PF,
                    four_se(SCENARIO_AB_PF, SCENARIO_AB_N),
                    "calibration target, 4 binomial SE",
                ),
                Expectation::is(EfStar, Check::AboveBenchmark, "rare extreme loads deepen failures past the Gaussian benchmark"),
            ],
        },
        ScenarioId::FigureGridGaussian => Scenario {
            id,
            description: "R ~ N(10, 0.6), S ~ N(6.5, 0.8); Gaussian g with beta = 3.5",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::normal(10.0, 0.6)),
                    term("S", -1.0, DistributionSpec::normal(6.5, 0.8)),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(2_000_000),
            assessment: None,
            expectations: vec![
                Expectation::near(Beta, 3.5, 0.08, "beta = 3.5 by construction"),
                Expectation::near(EfStar, 0.251, 0.02, "F(3.5) for a Gaussian g"),
                Expectation::is(Level, Check::Level(SeverityLevel::Mild), "beta_S >= 3"),
            ],
        },
        ScenarioId::FigureGridMild => Scenario {
            id,
            description: "R ~ Lognormal(2.3, 0.1), S ~ N(5.3, 1.0); lighter-than-Gaussian failure tail near beta = 3.5",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::lognormal(2.3, 0.1)),
                    term("S", -1.0, DistributionSpec::normal(5.3, 1.0)),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(2_000_000),
            assessment: None,
            expectations: vec![
                Expectation::is(EfStar, Check::BelowBenchmark, "right-skewed resistance thins the failure tail"),
                Expectation::is(Level, Check::Level(SeverityLevel::Mild), "beta_S >= 3"),
            ],
        },
        ScenarioId::FigureGridHeavy => Scenario {
            id,
            description: "R ~ N(20, 1.5), S ~ 0.998 N(5, 2) + 0.002 Pareto(10, 4); finite variance, heavy failure tail",
            model: model(
                vec![
                    term("R", 1.0, DistributionSpec::normal(20.0, 1.5)),
                    term(
                        "S",
                        -1.0,
                        DistributionSpec::mixture([
                            (0.998, DistributionSpec::normal(5.0, 2.0)),
                            (0.002, DistributionSpec::pareto(10.0, 4.0)),
                        ]),
                    ),
                ],
                0.0,
            ),
            target_pf: None,
            simulation: sim(2_000_000),
            assessment: None,
            expectations: vec![
                Expectation::is(Level, Check::Level(SeverityLevel::Extreme), "deficit beyond the Gaussian endpoint"),
                Expectation::is(BetaS, Check::Absent, "no Gaussian-equivalent index"),
            ],
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExpectationCheck {
    pub metric: Metric,
    pub expected: String,
    pub computed: String,
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub source: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub id: ScenarioId,
    pub simulation: SimulationConfig,
    pub target_pf: Option<f64>,
    pub assessment: Option<Assessment>,
    pub analysis: Analysis,
    pub g_histogram: Histogram,
    pub deficit_histogram: Option<Histogram>,
    pub checks: Vec<ExpectationCheck>,
}

impl ScenarioResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn document(&self) -> ReportDocument {
        let mut doc = ReportDocument::new(
            &self.analysis,
            &self.simulation,
            self.target_pf,
            self.assessment,
        );
        doc.scenario = Some(self.id.to_string());
        doc.expectations = Some(self.checks.clone());
        doc
    }
}

pub fn run(scenario: &Scenario, seed: Option<u64>, n: Option<u64>) -> Result<ScenarioResult> {
    run_with_threads(scenario, seed, n, None)
}

pub fn run_with_threads(
    scenario: &Scenario,
    seed: Option<u64>,
    n: Option<u64>,
    threads: Option<usize>,
) -> Result<ScenarioResult> {
    let mut simulation = scenario.simulation.clone();
    if let Some(n) = n {
        simulation.sample_count = n;
        simulation.chunk_size = simulation.chunk_size.min(n.max(1));
    }
    if let Some(seed) = seed {
        simulation.master_seed = seed;
    }
    let analysis = analyze(&AnalysisRequest {
        model: &scenario.model,
        target_pf: scenario.target_pf,
        simulation: &simulation,
        assessment: scenario.assessment,
        threads,
    })?;
    let (g_histogram, deficit_histogram) = analysis_histograms(&analysis, &simulation, threads)?;
    let checks = scenario
        .expectations
        .iter()
        .map(|e| evaluate(e, &analysis))
        .collect();
    Ok(ScenarioResult {
        id: scenario.id,
        simulation,
        target_pf: scenario.target_pf,
        assessment: scenario.assessment,
        analysis,
        g_histogram,
        deficit_histogram,
        checks,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

fn flag_name(f: ExtremeFlag) -> &'static str {
    match f {
        ExtremeFlag::None => "none",
        ExtremeFlag::DeficitBeyondEndpoint => "deficitBeyondEndpoint",
        ExtremeFlag::VarianceInfiniteOrUnstable => "varianceInfiniteOrUnstable",
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::RejectFrequency => "rejectFrequency",
        Verdict::ExtremeRedesign => "extremeRedesign",
        Verdict::AcceptWithLevel => "acceptWithLevel",
    }
}

fn metric_value(metric: Metric, a: &Analysis) -> Option<f64> {
    let r = &a.report;
    match metric {
        Metric::Pf => Some(r.pf),
        Metric::Beta => r.beta,
        Metric::EfStar => r.ef_star,
        Metric::BetaS => r.beta_s,
        Metric::Level | Metric::ExtremeFlag | Metric::Verdict => None,
    }
}

fn metric_text(metric: Metric, a: &Analysis) -> String {
    let r = &a.report;
    match metric {
        Metric::Level => r.level.map_or_else(|| "undefined".into(), |l| l.label()),
        Metric::ExtremeFlag => flag_name(r.extreme_flag).into(),
        Metric::Verdict => a
            .decision
            .as_ref()
            .map_or_else(|| "undefined".into(), |d| verdict_name(d.verdict).into()),
        Metric::Pf => format!("{:.4e}", r.pf),
        m => fmt_opt(metric_value(m, a)),
    }
}

pub fn evaluate(expectation: &Expectation, analysis: &Analysis) -> ExpectationCheck {
    let metric = expectation.metric;
    let computed = metric_text(metric, analysis);
    let r = &analysis.report;
    let benchmark = r
        .beta
        .filter(|b| *b > 0.0)
        .and_then(|b| deficit_map(b).ok());
    let (expected, tolerance, passed) = match &expectation.check {
        Check::Near { value, tolerance } => (
            format!("{value}"),
            Some(*tolerance),
            metric_value(metric, analysis).is_some_and(|x| (x - value).abs() <= *tolerance),
        ),
        Check::Level(l) => (l.label(), None, r.level == Some(*l)),
        Check::Flag(f) => (flag_name(*f).into(), None, r.extreme_flag == *f),
        Check::Verdict(v) => (
            verdict_name(*v).into(),
            None,
            analysis.decision.as_ref().is_some_and(|d| d.verdict == *v),
        ),
        Check::Absent => (
            "undefined".into(),
            None,
            metric_value(metric, analysis).is_none(),
        ),
        Check::Present => (
            "defined".into(),
            None,
            metric_value(metric, analysis).is_some(),
        ),
        Check::AboveBenchmark => (
            format!("> F(beta) = {}", fmt_opt(benchmark)),
            None,
            matches!((metric_value(metric, analysis), benchmark), (Some(x), Some(b)) if x > b),
        ),
        Check::BelowBenchmark => (
            format!("< F(beta) = {}", fmt_opt(benchmark)),
            None,
            matches!((metric_value(metric, analysis), benchmark), (Some(x), Some(b)) if x < b),
        ),
    };
    ExpectationCheck {
        metric,
        expected,
        computed,
        tolerance,
        passed,
        source: expectation.source.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    ReportJson,
    HistogramCsv,
    DeficitCsv,
    FcurveCsv,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [
        Self::ReportJson,
        Self::HistogramCsv,
        Self::DeficitCsv,
        Self::FcurveCsv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ReportJson => "report-json",
            Self::HistogramCsv => "histogram-csv",
            Self::DeficitCsv => "deficit-csv",
            Self::FcurveCsv => "fcurve-csv",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Self::ReportJson => "report.json",
            Self::HistogramCsv => "histogram.csv",
            Self::DeficitCsv => "deficit.csv",
            Self::FcurveCsv => "fcurve.csv",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown export format `{s}`")))
    }
}

/// `lower,upper,count` rows.
pub fn histogram_csv(h: Option<&Histogram>) -> String {
    let mut out = String::from("lower,upper,count\n");
    if let Some(h) = h {
        for (i, c) in h.counts.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e},{}", h.edges[i], h.edges[i + 1], c);
        }
    }
    out
}

/// `(b, F(b))` on `b = 0.05, 0.06, …, 5.00`, with the level boundaries at
/// `b = 3, 2, 1` marked.
pub fn fcurve_csv() -> String {
    let mut out = String::from("b,F,threshold\n");
    for i in 0..=495u32 {
        let b = f64::from(5 + i) / 100.0;
        let f = deficit_map(b).expect("b > 0");
        let marker = match 5 + i {
            300 => "I/II",
            200 => "II/III",
            100 => "III/IV",
            _ => "",
        };
        let _ = writeln!(out, "{b:.16e},{f:.16e},{marker}");
    }
    out
}

pub fn export(result: &ScenarioResult, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::ReportJson => result.document().to_json()?,
        ExportFormat::HistogramCsv => histogram_csv(Some(&result.g_histogram)),
        ExportFormat::DeficitCsv => histogram_csv(result.deficit_histogram.as_ref()),
        ExportFormat::FcurveCsv => fcurve_csv(),
    };
    write_atomic(path, text.as_bytes())
}

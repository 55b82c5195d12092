//! Metric set, five-level severity classification and the frequency-then-
//! severity design check.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{seeded_stream, MomentReport};
use crate::engine::{robust_scales, RobustScales, SimulationSummary};
use crate::error::{Error, Result};
use crate::gaussian::{self, Phi, Phi_inv, GAUSSIAN_ENDPOINT};
use crate::stats::{mix64, quantile_sorted};

const BOOTSTRAP_SALT: u64 = 0xB007_0000_0000_0003;

/// Ratio of σ̂/MAD between the two run halves above which the sample
/// variance is treated as unstable.
pub const INSTABILITY_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeverityLevel {
    Mild,
    Moderate,
    High,
    Critical,
    Extreme,
}

impl SeverityLevel {
    pub const ALL: [SeverityLevel; 5] = [
        Self::Mild,
        Self::Moderate,
        Self::High,
        Self::Critical,
        Self::Extreme,
    ];

    pub fn numeral(self) -> &'static str {
        match self {
            Self::Mild => "I",
            Self::Moderate => "II",
            Self::High => "III",
            Self::Critical => "IV",
            Self::Extreme => "V",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mild => "Mild",
            Self::Moderate => "Moderate",
            Self::High => "High",
            Self::Critical => "Critical",
            Self::Extreme => "Extreme",
        }
    }

    /// `"II: Moderate"` style label.
    pub fn label(self) -> String {
        format!("{}: {}", self.numeral(), self.name())
    }

    /// Short key for the recommended follow-up at this level.
    pub fn action_key(self) -> &'static str {
        match self {
            Self::Mild => "no-mitigation",
            Self::Moderate => "enhanced-qa-monitoring",
            Self::High => "reinforce-or-add-redundancy",
            Self::Critical => "strengthen-or-redesign",
            Self::Extreme => "conceptual-overhaul",
        }
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.numeral(), self.name())
    }
}

impl FromStr for SeverityLevel {
    type Err = Error;

    /// Accepts `"II: Moderate"`, `"II"`, `"Moderate"` (any case) or `"2"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        for level in Self::ALL {
            let idx = level as usize + 1;
            if t.eq_ignore_ascii_case(&level.label())
                || t.eq_ignore_ascii_case(level.numeral())
                || t.eq_ignore_ascii_case(level.name())
                || t == idx.to_string()
            {
                return Ok(level);
            }
        }
        Err(Error::Domain(format!("unknown severity level `{s}`")))
    }
}

impl Serialize for SeverityLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeverityLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Why no severity-aware index could be given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExtremeFlag {
    #[default]
    None,
    DeficitBeyondEndpoint,
    VarianceInfiniteOrUnstable,
}

/// A normalized deficit, or the flag that replaced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeficitMeasure {
    Finite(f64),
    Flagged(ExtremeFlag),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeverityIndex {
    Defined(f64),
    BeyondEndpoint,
}

/// Level boundaries on `E_f*`: `F(3)`, `F(2)`, `F(1)` and the endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeverityThresholds {
    pub mild_moderate: f64,
    pub moderate_high: f64,
    pub high_critical: f64,
    pub endpoint: f64,
}

pub static THRESHOLDS: LazyLock<SeverityThresholds> = LazyLock::new(|| SeverityThresholds {
    mild_moderate: gaussian::deficit_map(3.0).expect("positive"),
    moderate_high: gaussian::deficit_map(2.0).expect("positive"),
    high_critical: gaussian::deficit_map(1.0).expect("positive"),
    endpoint: GAUSSIAN_ENDPOINT,
});

/// `β = −Φ⁻¹(p_f)`.
pub fn beta_from_pf(pf: f64) -> Result<f64> {
    if pf == 0.0 {
        return Err(Error::Domain(
            "p_f = 0: no failures observed, beta is undefined (only beta > -Phi^-1(1/N) is known)"
                .into(),
        ));
    }
    Ok(-Phi_inv(pf)?)
}

/// Lower bound on β after `n` failure-free samples, `−Φ⁻¹(1/n)`.
pub fn beta_lower_bound(n: u64) -> Option<f64> {
    (n >= 2).then(|| -Phi_inv(1.0 / n as f64).unwrap_or(f64::NAN))
}

/// `E_f = E[−g | g < 0]` from the exact running sum.
pub fn expected_failure_deficit(summary: &SimulationSummary) -> Result<f64> {
    summary
        .mean_deficit()
        .ok_or(Error::NoFailuresObserved { samples: summary.n })
}

/// `E_f* = E_f/σ̂_g`, or the infinite-variance flag when the analytic
/// moments of `g` say `σ_g` does not exist.
pub fn normalized_deficit(
    summary: &SimulationSummary,
    finiteness: &MomentReport,
) -> Result<DeficitMeasure> {
    let ef = expected_failure_deficit(summary)?;
    if !finiteness.variance_finite {
        return Ok(DeficitMeasure::Flagged(
            ExtremeFlag::VarianceInfiniteOrUnstable,
        ));
    }
    Ok(DeficitMeasure::Finite(ef / summary.std_g()))
}

/// `β_S = F⁻¹(E_f*)`, or `BeyondEndpoint` at or past `2/√(2π)`.
pub fn severity_index(ef_star: f64) -> Result<SeverityIndex> {
    if !(ef_star > 0.0) || !ef_star.is_finite() {
        return Err(Error::Domain(format!(
            "normalized deficit must be positive and finite, got {ef_star}"
        )));
    }
    if ef_star >= GAUSSIAN_ENDPOINT {
        return Ok(SeverityIndex::BeyondEndpoint);
    }
    gaussian::invert_deficit(ef_star).map(SeverityIndex::Defined)
}

/// Normalized deficit of a Gaussian limit state with reliability index β.
pub fn gaussian_closed_form(beta: f64) -> Result<f64> {
    gaussian::deficit_map(beta)
}

pub fn classify_deficit(ef_star: f64) -> Result<SeverityLevel> {
    if !(ef_star > 0.0) || ef_star.is_nan() {
        return Err(Error::Domain(format!(
            "normalized deficit must be positive, got {ef_star}"
        )));
    }
    let t = &*THRESHOLDS;
    Ok(if ef_star < t.mild_moderate {
        SeverityLevel::Mild
    } else if ef_star < t.moderate_high {
        SeverityLevel::Moderate
    } else if ef_star < t.high_critical {
        SeverityLevel::High
    } else if ef_star < t.endpoint {
        SeverityLevel::Critical
    } else {
        SeverityLevel::Extreme
    })
}

pub fn classify(measure: DeficitMeasure) -> Result<SeverityLevel> {
    match measure {
        DeficitMeasure::Finite(v) => classify_deficit(v),
        DeficitMeasure::Flagged(ExtremeFlag::None) => Err(Error::Domain(
            "a flagged deficit needs a flag other than None".into(),
        )),
        DeficitMeasure::Flagged(_) => Ok(SeverityLevel::Extreme),
    }
}

/// Level from the β_S ranges: `[3, ∞)`, `[2, 3)`, `[1, 2)`, `(0, 1)`.
pub fn classify_index(beta_s: f64) -> Result<SeverityLevel> {
    if !(beta_s > 0.0) {
        return Err(Error::Domain(format!(
            "severity-aware index must be positive, got {beta_s}"
        )));
    }
    Ok(if beta_s >= 3.0 {
        SeverityLevel::Mild
    } else if beta_s >= 2.0 {
        SeverityLevel::Moderate
    } else if beta_s >= 1.0 {
        SeverityLevel::High
    } else {
        SeverityLevel::Critical
    })
}

/// True when σ̂/MAD differs by more than [`INSTABILITY_RATIO`] between the
/// two halves of the run.
pub fn variance_unstable(summary: &SimulationSummary) -> bool {
    let Some([a, b]) = summary.half_scales else {
        return false;
    };
    if !(a.mad > 0.0 && b.mad > 0.0) {
        return false;
    }
    let (ra, rb) = (a.std_dev / a.mad, b.std_dev / b.mad);
    ra.max(rb) / ra.min(rb) > INSTABILITY_RATIO
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub bootstrap_resamples: usize,
    pub confidence: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 200,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeverityReport {
    pub n: u64,
    pub failure_count: u64,
    pub pf: f64,
    /// Binomial standard error `√(p̂(1 − p̂)/n)`.
    pub pf_std_error: f64,
    /// `−Φ⁻¹(p̂_f)`; absent without failures.
    pub beta: Option<f64>,
    /// `−Φ⁻¹(1/N)` when no failures were observed.
    pub beta_lower_bound: Option<f64>,
    /// `μ̂_g/σ̂_g`, the moment-based index.
    pub beta_moment: Option<f64>,
    pub ef: Option<f64>,
    pub ef_star: Option<f64>,
    /// Bootstrap percentile interval for `E_f*`.
    pub ef_star_ci: Option<[f64; 2]>,
    pub beta_s: Option<f64>,
    pub extreme_flag: ExtremeFlag,
    pub level: Option<SeverityLevel>,
    /// `F(β)`: the normalized deficit a Gaussian system with the same β has.
    pub gaussian_benchmark: Option<f64>,
    pub robust: Option<RobustScales>,
    pub note: Option<String>,
}

impl SeverityReport {
    /// Full metric set from a simulation.
    ///
    /// `finiteness` is the analytic moment report of `g`; it decides the
    /// infinite-variance flag. The split-half σ̂/MAD drift is a secondary
    /// trigger for the same flag.
    pub fn from_summary(
        summary: &SimulationSummary,
        finiteness: &MomentReport,
        options: &ReportOptions,
    ) -> Result<Self> {
        let n = summary.n;
        let pf = summary.failure_fraction();
        let pf_std_error = (pf * (1.0 - pf) / n as f64).sqrt();
        let std_g = summary.std_g();
        let beta_moment = (std_g > 0.0).then(|| summary.mean_g / std_g);
        let robust = robust_scales(summary).ok();

        let mut report = SeverityReport {
            n,
            failure_count: summary.failure_count,
            pf,
            pf_std_error,
            beta: None,
            beta_lower_bound: None,
            beta_moment,
            ef: None,
            ef_star: None,
            ef_star_ci: None,
            beta_s: None,
            extreme_flag: ExtremeFlag::None,
            level: None,
            gaussian_benchmark: None,
            robust,
            note: None,
        };

        if summary.failure_count == 0 {
            report.beta_lower_bound = beta_lower_bound(n);
            report.note = Some(format!("no failures at N = {n}; p_f < 1/N bound"));
            return Ok(report);
        }

        let beta = if pf < 1.0 {
            Some(beta_from_pf(pf)?)
        } else {
            None
        };
        report.beta = beta;
        report.gaussian_benchmark = beta
            .filter(|b| *b > 0.0)
            .and_then(|b| gaussian_closed_form(b).ok());
        let ef = expected_failure_deficit(summary)?;
        report.ef = Some(ef);

        match normalized_deficit(summary, finiteness)? {
            DeficitMeasure::Flagged(flag) => {
                report.extreme_flag = flag;
                report.note = Some("sigma_g does not exist; E_f* is undefined".into());
            }
            DeficitMeasure::Finite(ef_star) if std_g > 0.0 => {
                report.ef_star = Some(ef_star);
                report.ef_star_ci = bootstrap_ci(summary, std_g, options);
                if variance_unstable(summary) {
                    report.extreme_flag = ExtremeFlag::VarianceInfiniteOrUnstable;
                    report.note = Some(
                        "sigma_g/MAD drifts between run halves; sigma_g treated as unstable".into(),
                    );
                } else {
                    match severity_index(ef_star)? {
                        SeverityIndex::Defined(b) => report.beta_s = Some(b),
                        SeverityIndex::BeyondEndpoint => {
                            report.extreme_flag = ExtremeFlag::DeficitBeyondEndpoint;
                            report.note = Some(
                                "E_f* is at or beyond the Gaussian endpoint; no equivalent index"
                                    .into(),
                            );
                        }
                    }
                }
            }
            DeficitMeasure::Finite(_) => {
                report.note = Some("sample sigma_g is 0; E_f* is undefined".into());
                report.extreme_flag = ExtremeFlag::VarianceInfiniteOrUnstable;
            }
        }

        report.level = Some(match (report.extreme_flag, report.ef_star) {
            (ExtremeFlag::None, Some(v)) => classify_deficit(v)?,
            _ => SeverityLevel::Extreme,
        });
        Ok(report)
    }

    /// Exact metrics of a Gaussian limit state `g ~ N(mean, std_dev²)`.
    pub fn from_gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev > 0.0) || !mean.is_finite() {
            return Err(Error::Domain(format!(
                "need finite mean and positive std_dev, got {mean}, {std_dev}"
            )));
        }
        let beta = mean / std_dev;
        let pf = Phi(-beta);
        let ef_star = gaussian::mills_conditional_mean(beta) - beta;
        let beta_s = severity_index(ef_star)?;
        let (beta_s, flag) = match beta_s {
            SeverityIndex::Defined(b) => (Some(b), ExtremeFlag::None),
            SeverityIndex::BeyondEndpoint => (None, ExtremeFlag::DeficitBeyondEndpoint),
        };
        Ok(SeverityReport {
            n: 0,
            failure_count: 0,
            pf,
            pf_std_error: 0.0,
            beta: Some(beta),
            beta_lower_bound: None,
            beta_moment: Some(beta),
            ef: Some(std_dev * ef_star),
            ef_star: Some(ef_star),
            ef_star_ci: None,
            beta_s,
            extreme_flag: flag,
            level: Some(classify_deficit(ef_star)?),
            gaussian_benchmark: (beta > 0.0).then_some(ef_star),
            robust: None,
            note: None,
        })
    }
}

fn bootstrap_ci(
    summary: &SimulationSummary,
    std_g: f64,
    options: &ReportOptions,
) -> Option<[f64; 2]> {
    let deficits = &summary.failure_deficits;
    let m = deficits.len();
    if m < 2 || options.bootstrap_resamples < 2 {
        return None;
    }
    let mut rng = seeded_stream(mix64(summary.master_seed ^ BOOTSTRAP_SALT), 0);
    let mut stats: Vec<f64> = (0..options.bootstrap_resamples)
        .map(|_| {
            let total: f64 = (0..m).map(|_| deficits[rng.random_range(0..m)]).sum();
            total / m as f64 / std_g
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - options.confidence);
    Some([
        quantile_sorted(&stats, alpha),
        quantile_sorted(&stats, 1.0 - alpha),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    RejectFrequency,
    ExtremeRedesign,
    AcceptWithLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorkflowDecision {
    pub frequency_pass: bool,
    /// Absent when the frequency check already rejected the design, or when
    /// no failures were observed.
    pub severity_level: Option<SeverityLevel>,
    pub verdict: Verdict,
    pub advisory: Option<String>,
}

/// Two-tier check: frequency first (`β ≥ β_T`), severity only if that
/// passes.
///
/// Without observed failures the frequency check uses `−Φ⁻¹(1/N)` as a
/// lower bound on β, and severity is left unassessed.
pub fn assess(
    report: &SeverityReport,
    beta_target: f64,
    max_acceptable: SeverityLevel,
) -> Result<WorkflowDecision> {
    if !(beta_target > 0.0) {
        return Err(Error::Domain(format!(
            "target reliability index must be positive, got {beta_target}"
        )));
    }
    let beta = report.beta.or(report.beta_lower_bound);
    let frequency_pass = beta.is_some_and(|b| b >= beta_target);
    if !frequency_pass {
        return Ok(WorkflowDecision {
            frequency_pass,
            severity_level: None,
            verdict: Verdict::RejectFrequency,
            advisory: None,
        });
    }
    let Some(level) = report.level else {
        return Ok(WorkflowDecision {
            frequency_pass,
            severity_level: None,
            verdict: Verdict::AcceptWithLevel,
            advisory: Some("no failures observed; severity not assessed".into()),
        });
    };
    if level == SeverityLevel::Extreme {
        return Ok(WorkflowDecision {
            frequency_pass,
            severity_level: Some(level),
            verdict: Verdict::ExtremeRedesign,
            advisory: Some("severity beyond the Gaussian-calibrated domain".into()),
        });
    }
    let advisory = (level > max_acceptable).then(|| {
        format!(
            "severity level {} exceeds the acceptable level {}",
            level, max_acceptable
        )
    });
    Ok(WorkflowDecision {
        frequency_pass,
        severity_level: Some(level),
        verdict: Verdict::AcceptWithLevel,
        advisory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary_with(deficits: &[f64], n: u64, std_g: f64) -> SimulationSummary {
        SimulationSummary {
            n,
            mean_g: 1.0,
            var_g: std_g * std_g,
            failure_count: deficits.len() as u64,
            failure_deficit_sum: deficits.iter().sum(),
            failure_deficits: deficits.to_vec(),
            robust_subsample: vec![-1.0, 0.0, 1.0, 2.0],
            min_g: -deficits.iter().copied().fold(0.0, f64::max),
            max_g: 3.0,
            min_deficit: deficits.iter().copied().reduce(f64::min),
            half_scales: None,
            master_seed: 1,
            chunk_size: n,
        }
    }

    #[test]
    fn beta_examples() {
        // 9.1e-5 is itself rounded; the exact round trip is checked too.
        assert!((beta_from_pf(9.1e-5).unwrap() - 3.7442).abs() < 2e-3);
        assert!((beta_from_pf(Phi(-3.7442)).unwrap() - 3.7442).abs() < 1e-9);
        assert_eq!(beta_from_pf(0.5).unwrap(), 0.0);
        assert!((beta_from_pf(9.971e-3).unwrap() - 2.327).abs() < 1e-3);
        assert!(beta_from_pf(0.0).is_err());
        assert!(beta_from_pf(1.0).is_err());
    }

    #[test]
    fn deficit_from_summary() {
        let s = summary_with(&[1.0, 2.0, 3.0], 100, 4.0);
        assert_eq!(expected_failure_deficit(&s).unwrap(), 2.0);
        let none = summary_with(&[], 100, 1.0);
        assert!(matches!(
            expected_failure_deficit(&none),
            Err(Error::NoFailuresObserved { samples: 100 })
        ));
    }

    #[test]
    fn normalized_examples() {
        let s = summary_with(&[0.5, 1.5], 100, 2.0);
        let finite = MomentReport::new(0.0, 4.0);
        assert_eq!(
            normalized_deficit(&s, &finite).unwrap(),
            DeficitMeasure::Finite(0.5)
        );
        let infinite = MomentReport::new(0.0, f64::INFINITY);
        assert_eq!(
            normalized_deficit(&s, &infinite).unwrap(),
            DeficitMeasure::Flagged(ExtremeFlag::VarianceInfiniteOrUnstable)
        );
        assert!(normalized_deficit(&summary_with(&[], 10, 1.0), &finite).is_err());
    }

    #[test]
    fn index_examples() {
        match severity_index(0.3085).unwrap() {
            SeverityIndex::Defined(b) => assert!((b - 2.6671).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            severity_index(1.418).unwrap(),
            SeverityIndex::BeyondEndpoint
        );
        assert_eq!(
            severity_index(GAUSSIAN_ENDPOINT).unwrap(),
            SeverityIndex::BeyondEndpoint
        );
        assert!(severity_index(0.0).is_err());
        for beta in [0.4, 1.0, 2.5, 6.0] {
            let y = gaussian_closed_form(beta).unwrap();
            match severity_index(y).unwrap() {
                SeverityIndex::Defined(b) => assert!((b - beta).abs() < 1e-10),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((gaussian_closed_form(2.7735).unwrap() - 0.30).abs() < 0.005);
        assert!((gaussian_closed_form(2.33).unwrap() - 0.35).abs() < 0.015);
        assert!((gaussian_closed_form(3.5).unwrap() - 0.251).abs() < 0.0005);
        assert!(gaussian_closed_form(-1.0).is_err());
    }

    #[test]
    fn thresholds() {
        let t = *THRESHOLDS;
        assert!((t.mild_moderate - 0.283_10).abs() < 1e-5);
        assert!((t.moderate_high - 0.373_22).abs() < 1e-5);
        assert!((t.high_critical - 0.525_14).abs() < 1e-5);
        assert_eq!(t.endpoint, GAUSSIAN_ENDPOINT);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_deficit(0.4741).unwrap(), SeverityLevel::High);
        assert_eq!(classify_deficit(0.3085).unwrap(), SeverityLevel::Moderate);
        assert_eq!(classify_deficit(0.30).unwrap(), SeverityLevel::Moderate);
        assert_eq!(classify_deficit(0.80).unwrap(), SeverityLevel::Extreme);
        assert_eq!(classify_deficit(0.1).unwrap(), SeverityLevel::Mild);
        assert_eq!(classify_deficit(0.6).unwrap(), SeverityLevel::Critical);
        assert_eq!(
            classify(DeficitMeasure::Flagged(
                ExtremeFlag::VarianceInfiniteOrUnstable
            ))
            .unwrap(),
            SeverityLevel::Extreme
        );
        assert!(classify_deficit(0.0).is_err());
        assert!(classify(DeficitMeasure::Flagged(ExtremeFlag::None)).is_err());
    }

    #[test]
    fn boundaries_are_lower_inclusive() {
        let t = *THRESHOLDS;
        assert_eq!(
            classify_deficit(t.mild_moderate).unwrap(),
            SeverityLevel::Moderate
        );
        assert_eq!(
            classify_deficit(t.moderate_high).unwrap(),
            SeverityLevel::High
        );
        assert_eq!(
            classify_deficit(t.high_critical).unwrap(),
            SeverityLevel::Critical
        );
        assert_eq!(
            classify_deficit(t.endpoint).unwrap(),
            SeverityLevel::Extreme
        );
        assert_eq!(classify_index(3.0).unwrap(), SeverityLevel::Mild);
        assert_eq!(classify_index(2.0).unwrap(), SeverityLevel::Moderate);
        assert_eq!(classify_index(1.0).unwrap(), SeverityLevel::High);
        assert_eq!(classify_index(0.5).unwrap(), SeverityLevel::Critical);
        assert_eq!(classify_index(3.2).unwrap(), SeverityLevel::Mild);
        assert!(classify_index(0.0).is_err());
    }

    #[test]
    fn level_names_round_trip() {
        for level in SeverityLevel::ALL {
            assert_eq!(level.label().parse::<SeverityLevel>().unwrap(), level);
            assert_eq!(level.numeral().parse::<SeverityLevel>().unwrap(), level);
            let json = serde_json::to_string(&level).unwrap();
            assert_eq!(serde_json::from_str::<SeverityLevel>(&json).unwrap(), level);
        }
        assert_eq!(SeverityLevel::Moderate.to_string(), "II: Moderate");
        assert_eq!(SeverityLevel::Extreme.label(), "V: Extreme");
        assert!("VI".parse::<SeverityLevel>().is_err());
    }

    #[test]
    fn gaussian_report() {
        let r = SeverityReport::from_gaussian(5.0, 3.25f64.sqrt()).unwrap();
        assert!((r.beta.unwrap() - 2.773_500_981_126_146).abs() < 1e-12);
        assert!((r.beta_s.unwrap() - r.beta.unwrap()).abs() < 1e-10);
        assert_eq!(r.level, Some(SeverityLevel::Moderate));
    }

    #[test]
    fn report_invariants_on_zero_failures() {
        let s = summary_with(&[], 1000, 1.0);
        let r = SeverityReport::from_summary(
            &s,
            &MomentReport::new(1.0, 1.0),
            &ReportOptions::default(),
        )
        .unwrap();
        assert!(r.beta.is_none() && r.ef_star.is_none() && r.beta_s.is_none());
        assert!(r.note.as_deref().unwrap().contains("no failures"));
        assert!((r.beta_lower_bound.unwrap() - 3.090_232_306_167_813_6).abs() < 1e-9);
    }

    fn report(beta: Option<f64>, level: Option<SeverityLevel>) -> SeverityReport {
        SeverityReport {
            n: 10,
            failure_count: 1,
            pf: 0.1,
            pf_std_error: 0.0,
            beta,
            beta_lower_bound: None,
            beta_moment: None,
            ef: None,
            ef_star: None,
            ef_star_ci: None,
            beta_s: None,
            extreme_flag: ExtremeFlag::None,
            level,
            gaussian_benchmark: None,
            robust: None,
            note: None,
        }
    }

    #[test]
    fn workflow() {
        let d = assess(
            &report(Some(3.74), Some(SeverityLevel::High)),
            3.5,
            SeverityLevel::Moderate,
        )
        .unwrap();
        assert!(d.frequency_pass);
        assert_eq!(d.verdict, Verdict::AcceptWithLevel);
        assert_eq!(d.severity_level, Some(SeverityLevel::High));
        assert!(d.advisory.is_some());

        let d = assess(
            &report(Some(1.52), Some(SeverityLevel::Moderate)),
            3.0,
            SeverityLevel::High,
        )
        .unwrap();
        assert_eq!(d.verdict, Verdict::RejectFrequency);
        assert!(!d.frequency_pass);
        assert_eq!(d.severity_level, None);

        let d = assess(
            &report(Some(3.39), Some(SeverityLevel::Extreme)),
            3.0,
            SeverityLevel::High,
        )
        .unwrap();
        assert_eq!(d.verdict, Verdict::ExtremeRedesign);

        let d = assess(
            &report(Some(3.1), Some(SeverityLevel::Mild)),
            3.0,
            SeverityLevel::High,
        )
        .unwrap();
        assert_eq!(d.verdict, Verdict::AcceptWithLevel);
        assert!(d.advisory.is_none());

        assert!(assess(&report(Some(3.1), None), 0.0, SeverityLevel::High).is_err());
    }
}

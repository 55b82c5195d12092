//! Linear limit states and reproducible chunked Monte Carlo.
//!
//! Chunk `k` of a run draws from ChaCha20 sub-stream `k` of the master
//! seed, so a chunk's values depend only on `(master_seed, chunk_size, k)`.
//! Chunks may be evaluated on any number of threads; their partial
//! summaries are folded strictly in ascending chunk order.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{seeded_stream, DistributionSpec, MomentReport};
use crate::error::{Error, Result};
use crate::stats::{self, mix64, CompensatedSum, PrioritySample, Welford};

const CALIBRATION_SALT: u64 = 0xCA1B_0000_0000_0001;
const SUBSAMPLE_SALT: u64 = 0x5AB5_0000_0000_0002;
// Chunks handed to the pool per fold step; bounds memory held in partials.
const CHUNK_BATCH: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub distribution: DistributionSpec,
}

impl Term {
    pub fn new(name: impl Into<String>, coefficient: f64, distribution: DistributionSpec) -> Self {
        Self {
            name: name.into(),
            coefficient,
            distribution,
        }
    }
}

/// `g(X) = Σ coefficient·X + shift` over independent inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct LimitStateModel {
    terms: Vec<Term>,
    shift: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    terms: Vec<Term>,
    #[serde(default)]
    shift: f64,
}

impl TryFrom<RawModel> for LimitStateModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        Self::new(raw.terms, raw.shift)
    }
}

impl LimitStateModel {
    /// Validates the terms and rewrites convenience parameterizations
    /// (median/CoV lognormals) into canonical form.
    pub fn new(terms: Vec<Term>, shift: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("at least one term is required".into()));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidModel(format!(
                "shift must be finite, got {shift}"
            )));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(terms.len());
        for t in terms {
            if t.name.is_empty() {
                return Err(Error::InvalidModel("term names must be non-empty".into()));
            }
            if !seen.insert(t.name.clone()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate term name `{}`",
                    t.name
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coefficient of `{}` must be finite",
                    t.name
                )));
            }
            t.distribution
                .validate()
                .map_err(|e| Error::InvalidModel(format!("term `{}`: {e}", t.name)))?;
            normalized.push(Term {
                distribution: t.distribution.normalized()?,
                ..t
            });
        }
        Ok(Self {
            terms: normalized,
            shift,
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        Self {
            terms: self.terms.clone(),
            shift,
        }
    }

    /// `Σ coefficient·value + shift` for explicit input values.
    pub fn evaluate(&self, values: &HashMap<String, f64>) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let v = values
                .get(&t.name)
                .ok_or_else(|| Error::MissingInput(t.name.clone()))?;
            acc += t.coefficient * v;
        }
        Ok(acc + self.shift)
    }

    /// Analytic moments of `g`. Terms with a zero coefficient are ignored.
    pub fn moments(&self) -> MomentReport {
        let mut mean = self.shift;
        let mut variance = 0.0;
        for t in self.terms.iter().filter(|t| t.coefficient != 0.0) {
            let m = t.distribution.moments();
            mean += t.coefficient * m.mean;
            variance += t.coefficient * t.coefficient * m.variance;
        }
        MomentReport::new(mean, variance)
    }

    #[inline]
    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coefficient * t.distribution.sample(rng);
        }
        acc + self.shift
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationConfig {
    pub sample_count: u64,
    pub master_seed: u64,
    pub chunk_size: u64,
    pub failure_reservoir_cap: usize,
    pub robust_subsample_cap: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sample_count: 1_000_000,
            master_seed: 1,
            chunk_size: 1 << 16,
            failure_reservoir_cap: 1_000_000,
            robust_subsample_cap: 100_000,
        }
    }
}

impl SimulationConfig {
    pub fn with_samples(sample_count: u64, master_seed: u64) -> Self {
        Self {
            sample_count,
            master_seed,
            chunk_size: (1 << 16).min(sample_count.max(1)),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size < 1 {
            return Err(Error::InvalidSimulation(
                "chunk_size must be at least 1".into(),
            ));
        }
        if self.sample_count < self.chunk_size {
            return Err(Error::InvalidSimulation(format!(
                "sample_count ({}) must be at least chunk_size ({})",
                self.sample_count, self.chunk_size
            )));
        }
        if self.failure_reservoir_cap < 1 || self.robust_subsample_cap < 1 {
            return Err(Error::InvalidSimulation("caps must be at least 1".into()));
        }
        Ok(())
    }

    fn chunk_count(&self) -> u64 {
        self.sample_count.div_ceil(self.chunk_size)
    }

    fn chunk_range(&self, chunk: u64) -> (u64, u64) {
        let start = chunk * self.chunk_size;
        let end = (start + self.chunk_size).min(self.sample_count);
        (start, end - start)
    }
}

/// Standard deviation and MAD of `g` over one half of the chunks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HalfScales {
    pub n: u64,
    pub std_dev: f64,
    pub mad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub n: u64,
    pub mean_g: f64,
    /// Unbiased (n − 1) sample variance.
    pub var_g: f64,
    pub failure_count: u64,
    /// Exact compensated sum of all deficits `−g` over failures.
    pub failure_deficit_sum: f64,
    /// The first `failure_reservoir_cap` deficits in sample order.
    pub failure_deficits: Vec<f64>,
    /// Uniform subsample of `g`, sorted ascending.
    pub robust_subsample: Vec<f64>,
    pub min_g: f64,
    pub max_g: f64,
    pub min_deficit: Option<f64>,
    /// Scales of the first and second half of the chunks; `None` for a
    /// single-chunk run.
    pub half_scales: Option<[HalfScales; 2]>,
    pub master_seed: u64,
    pub chunk_size: u64,
}

impl SimulationSummary {
    pub fn std_g(&self) -> f64 {
        self.var_g.sqrt()
    }

    pub fn failure_fraction(&self) -> f64 {
        self.failure_count as f64 / self.n as f64
    }

    /// Mean deficit from the exact running sum, `None` without failures.
    pub fn mean_deficit(&self) -> Option<f64> {
        (self.failure_count > 0).then(|| self.failure_deficit_sum / self.failure_count as f64)
    }

    pub fn max_deficit(&self) -> Option<f64> {
        (self.failure_count > 0).then_some(-self.min_g)
    }

    pub fn deficits_complete(&self) -> bool {
        self.failure_deficits.len() as u64 == self.failure_count
    }
}

struct ChunkStats {
    moments: Welford,
    min: f64,
    max: f64,
    failures: u64,
    deficit_sum: CompensatedSum,
    deficits: Vec<f64>,
    min_deficit: f64,
    sample: PrioritySample,
}

fn chunk_stats(model: &LimitStateModel, config: &SimulationConfig, chunk: u64) -> ChunkStats {
    let (start, len) = config.chunk_range(chunk);
    let mut rng = seeded_stream(config.master_seed, chunk);
    let salt = mix64(config.master_seed ^ SUBSAMPLE_SALT);
    let mut s = ChunkStats {
        moments: Welford::default(),
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        failures: 0,
        deficit_sum: CompensatedSum::default(),
        deficits: Vec::new(),
        min_deficit: f64::INFINITY,
        sample: PrioritySample::new(config.robust_subsample_cap),
    };
    for i in 0..len {
        let g = model.draw(&mut rng);
        s.moments.push(g);
        s.min = s.min.min(g);
        s.max = s.max.max(g);
        if g < 0.0 {
            let d = -g;
            s.failures += 1;
            s.deficit_sum.add(d);
            s.min_deficit = s.min_deficit.min(d);
            if s.deficits.len() < config.failure_reservoir_cap {
                s.deficits.push(d);
            }
        }
        s.sample.offer(salt, start + i, g);
    }
    s
}

fn run_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidSimulation(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs the Monte Carlo on the ambient rayon pool.
pub fn simulate(model: &LimitStateModel, config: &SimulationConfig) -> Result<SimulationSummary> {
    simulate_with_threads(model, config, None)
}

/// Runs the Monte Carlo on a pool of `threads` workers (`None`: ambient
/// pool). The summary is bit-identical for every thread count.
pub fn simulate_with_threads(
    model: &LimitStateModel,
    config: &SimulationConfig,
    threads: Option<usize>,
) -> Result<SimulationSummary> {
    config.validate()?;
    run_pool(threads, || simulate_inner(model, config))
}

fn simulate_inner(model: &LimitStateModel, config: &SimulationConfig) -> SimulationSummary {
    let chunks = config.chunk_count();
    let split = chunks.div_ceil(2);

    let mut total = Welford::default();
    let mut halves = [Welford::default(); 2];
    let mut samples = [
        PrioritySample::new(config.robust_subsample_cap),
        PrioritySample::new(config.robust_subsample_cap),
    ];
    let mut min_g = f64::INFINITY;
    let mut max_g = f64::NEG_INFINITY;
    let mut failures = 0u64;
    let mut deficit_sum = CompensatedSum::default();
    let mut deficits = Vec::new();
    let mut min_deficit = f64::INFINITY;

    let mut next = 0;
    while next < chunks {
        let end = (next + CHUNK_BATCH).min(chunks);
        let partials: Vec<ChunkStats> = (next..end)
            .into_par_iter()
            .map(|c| chunk_stats(model, config, c))
            .collect();
        for (c, part) in (next..end).zip(partials) {
            let half = usize::from(c >= split);
            total.merge(&part.moments);
            halves[half].merge(&part.moments);
            samples[half].merge(part.sample);
            min_g = min_g.min(part.min);
            max_g = max_g.max(part.max);
            failures += part.failures;
            deficit_sum.merge(&part.deficit_sum);
            min_deficit = min_deficit.min(part.min_deficit);
            let room = config.failure_reservoir_cap - deficits.len();
            deficits.extend(part.deficits.into_iter().take(room));
        }
        next = end;
    }

    let [first, second] = samples;
    let first_sorted = first.clone().into_sorted_values();
    let second_sorted = second.clone().into_sorted_values();
    let half_scales = (chunks >= 2).then(|| {
        [
            HalfScales {
                n: halves[0].count,
                std_dev: halves[0].variance().sqrt(),
                mad: stats::mad_sorted(&first_sorted),
            },
            HalfScales {
                n: halves[1].count,
                std_dev: halves[1].variance().sqrt(),
                mad: stats::mad_sorted(&second_sorted),
            },
        ]
    });
    let mut combined = first;
    combined.merge(second);

    SimulationSummary {
        n: total.count,
        mean_g: total.mean,
        var_g: total.variance(),
        failure_count: failures,
        failure_deficit_sum: deficit_sum.value(),
        failure_deficits: deficits,
        robust_subsample: combined.into_sorted_values(),
        min_g,
        max_g,
        min_deficit: (failures > 0).then_some(min_deficit),
        half_scales,
        master_seed: config.master_seed,
        chunk_size: config.chunk_size,
    }
}

/// Every `g` value of a run, in sample order. Test and calibration helper;
/// memory is `8·sample_count` bytes.
pub fn draw_all(model: &LimitStateModel, config: &SimulationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let parts: Vec<Vec<f64>> = (0..config.chunk_count())
        .into_par_iter()
        .map(|c| {
            let (_, len) = config.chunk_range(c);
            let mut rng = seeded_stream(config.master_seed, c);
            (0..len).map(|_| model.draw(&mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Calibrates the shift `c` so that `P(g + c < 0) ≈ target_pf`.
///
/// Draws a dedicated sample of the unshifted `g` (same size as the run,
/// seed derived from the master seed) and returns minus its
/// `⌈target_pf·n⌉`-th order statistic.
pub fn calibrate_shift(
    model: &LimitStateModel,
    target_pf: f64,
    config: &SimulationConfig,
) -> Result<f64> {
    if !(target_pf > 0.0 && target_pf < 1.0) {
        return Err(Error::Domain(format!(
            "target p_f must lie in (0, 1), got {target_pf}"
        )));
    }
    let n = config.sample_count;
    if target_pf * (n as f64) < 10.0 {
        return Err(Error::CalibrationTooDeep {
            target_pf,
            samples: n,
        });
    }
    let calibration = SimulationConfig {
        master_seed: mix64(config.master_seed ^ CALIBRATION_SALT),
        ..config.clone()
    };
    let mut values = draw_all(&model.with_shift(0.0), &calibration)?;
    let k = ((target_pf * n as f64).ceil() as usize).clamp(1, values.len());
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(-*kth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RobustScales {
    /// `σ̂_g`, for side-by-side comparison.
    pub std_dev: f64,
    /// Unscaled median absolute deviation of the subsample.
    pub mad: f64,
    pub iqr: f64,
    /// Standard deviation of the stored deficits; `None` below two failures.
    pub conditional_std: Option<f64>,
}

pub fn robust_scales(summary: &SimulationSummary) -> Result<RobustScales> {
    if summary.n < 2 {
        return Err(Error::Domain(
            "robust scales need at least two samples".into(),
        ));
    }
    let sorted = &summary.robust_subsample;
    Ok(RobustScales {
        std_dev: summary.std_g(),
        mad: stats::mad_sorted(sorted),
        iqr: stats::iqr_sorted(sorted),
        conditional_std: stats::std_dev(&summary.failure_deficits),
    })
}

/// Bin edges: `bins` uniform bins over `[lo, hi]`, widened to unit width
/// when the range is degenerate.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    edges
}

/// Geometric bin edges over `[lo, hi]`, `lo > 0`.
pub fn log_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| (a + step * i as f64).exp()).collect();
    edges[0] = lo;
    edges.push(hi);
    edges
}

pub(crate) fn bin_index(edges: &[f64], x: f64) -> usize {
    let bins = edges.len() - 1;
    edges
        .partition_point(|&e| e <= x)
        .saturating_sub(1)
        .min(bins - 1)
}

/// Replays a run and bins every `g` into `g_edges` and every deficit
/// `−g` (for `g < 0`) into `deficit_edges`.
pub fn histograms(
    model: &LimitStateModel,
    config: &SimulationConfig,
    g_edges: &[f64],
    deficit_edges: Option<&[f64]>,
    threads: Option<usize>,
) -> Result<(Vec<u64>, Vec<u64>)> {
    config.validate()?;
    if g_edges.len() < 2 {
        return Err(Error::Domain("a histogram needs at least one bin".into()));
    }
    let g_bins = g_edges.len() - 1;
    let d_bins = deficit_edges.map_or(0, |e| e.len().saturating_sub(1));
    let job = || {
        (0..config.chunk_count())
            .into_par_iter()
            .map(|c| {
                let (_, len) = config.chunk_range(c);
                let mut rng = seeded_stream(config.master_seed, c);
                let mut gc = vec![0u64; g_bins];
                let mut dc = vec![0u64; d_bins];
                for _ in 0..len {
                    let g = model.draw(&mut rng);
                    gc[bin_index(g_edges, g)] += 1;
                    if g < 0.0 {
                        if let Some(edges) = deficit_edges.filter(|_| d_bins > 0) {
                            dc[bin_index(edges, -g)] += 1;
                        }
                    }
                }
                (gc, dc)
            })
            .reduce(
                || (vec![0u64; g_bins], vec![0u64; d_bins]),
                |(mut ga, mut da), (gb, db)| {
                    ga.iter_mut().zip(gb).for_each(|(a, b)| *a += b);
                    da.iter_mut().zip(db).for_each(|(a, b)| *a += b);
                    (ga, da)
                },
            )
    };
    run_pool(threads, job)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r_minus_s() -> LimitStateModel {
        LimitStateModel::new(
            vec![
                Term::new("R", 1.0, DistributionSpec::normal(10.0, 1.0)),
                Term::new("S", -1.0, DistributionSpec::normal(5.0, 1.5)),
            ],
            0.0,
        )
        .unwrap()
    }

    fn values(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            r_minus_s()
                .evaluate(&values(&[("R", 10.0), ("S", 5.0)]))
                .unwrap(),
            5.0
        );
        let case = LimitStateModel::new(
            vec![
                Term::new("R", 1.0, DistributionSpec::normal(1.0, 1.0)),
                Term::new("D", -1.2, DistributionSpec::normal(1.0, 1.0)),
                Term::new("L", -1.6, DistributionSpec::normal(1.0, 1.0)),
            ],
            0.0,
        )
        .unwrap();
        let g = case
            .evaluate(&values(&[("R", 1520.0), ("D", 500.0), ("L", 150.0)]))
            .unwrap();
        assert!((g - 680.0).abs() < 1e-9);
        let shifted = r_minus_s().with_shift(-3.5);
        assert_eq!(
            shifted
                .evaluate(&values(&[("R", 0.0), ("S", 0.0)]))
                .unwrap(),
            -3.5
        );
        assert!(matches!(
            r_minus_s().evaluate(&values(&[("R", 1.0)])),
            Err(Error::MissingInput(name)) if name == "S"
        ));
    }

    #[test]
    fn model_validation() {
        assert!(LimitStateModel::new(vec![], 0.0).is_err());
        let dup = vec![
            Term::new("X", 1.0, DistributionSpec::normal(0.0, 1.0)),
            Term::new("X", 1.0, DistributionSpec::normal(0.0, 1.0)),
        ];
        assert!(LimitStateModel::new(dup, 0.0).is_err());
        let bad = vec![Term::new("X", 1.0, DistributionSpec::normal(0.0, -1.0))];
        assert!(LimitStateModel::new(bad, 0.0).is_err());
    }

    #[test]
    fn analytic_moments_of_g() {
        let m = r_minus_s().moments();
        assert_eq!(m.mean, 5.0);
        assert!((m.variance - 3.25).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig::with_samples(100, 1);
        c.validate().unwrap();
        c.chunk_size = 0;
        assert!(c.validate().is_err());
        c.chunk_size = 101;
        assert!(c.validate().is_err());
        c.chunk_size = 10;
        c.failure_reservoir_cap = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn degenerate_always_fails() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 1.0, DistributionSpec::normal(5.0, 1.0))],
            -100.0,
        )
        .unwrap();
        let config = SimulationConfig {
            chunk_size: 1000,
            ..SimulationConfig::with_samples(10_000, 3)
        };
        let s = simulate(&model, &config).unwrap();
        assert_eq!(s.failure_count, s.n);
        assert_eq!(s.n, 10_000);
    }

    #[test]
    fn chunked_moments_match_two_pass() {
        let config = SimulationConfig {
            chunk_size: 777,
            ..SimulationConfig::with_samples(50_000, 9)
        };
        let model = r_minus_s();
        let s = simulate(&model, &config).unwrap();
        let all = draw_all(&model, &config).unwrap();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(((s.mean_g - mean) / mean).abs() < 1e-9);
        assert!(((s.var_g - var) / var).abs() < 1e-9);
        let fails: Vec<f64> = all.iter().filter(|&&g| g < 0.0).map(|g| -g).collect();
        assert_eq!(s.failure_count, fails.len() as u64);
        assert_eq!(s.failure_deficits, fails);
        assert_eq!(s.min_g, all.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn reservoir_cap_keeps_exact_totals() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 1.0, DistributionSpec::normal(0.0, 1.0))],
            0.0,
        )
        .unwrap();
        let config = SimulationConfig {
            chunk_size: 1000,
            failure_reservoir_cap: 100,
            robust_subsample_cap: 50,
            ..SimulationConfig::with_samples(20_000, 4)
        };
        let s = simulate(&model, &config).unwrap();
        assert_eq!(s.failure_deficits.len(), 100);
        assert_eq!(s.robust_subsample.len(), 50);
        assert!(s.failure_count > 9000);
        assert!(!s.deficits_complete());
        let all = draw_all(&model, &config).unwrap();
        let exact: f64 = all.iter().filter(|&&g| g < 0.0).map(|g| -g).sum();
        assert!(((s.failure_deficit_sum - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn calibration_normal() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 1.0, DistributionSpec::normal(0.0, 1.0))],
            0.0,
        )
        .unwrap();
        let config = SimulationConfig::with_samples(200_000, 21);
        let c = calibrate_shift(&model, 0.0228, &config).unwrap();
        assert!((c - 2.0).abs() < 0.03, "shift {c}");
        let c = calibrate_shift(&model, 0.5, &config).unwrap();
        assert!(c.abs() < 0.01);
    }

    #[test]
    fn calibration_hits_target_on_its_own_sample() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 1.0, DistributionSpec::gumbel(0.0, 2.0))],
            0.0,
        )
        .unwrap();
        let config = SimulationConfig::with_samples(100_000, 2);
        let target = 0.01;
        let c = calibrate_shift(&model, target, &config).unwrap();
        let calib = SimulationConfig {
            master_seed: mix64(config.master_seed ^ CALIBRATION_SALT),
            ..config.clone()
        };
        let shifted = draw_all(&model.with_shift(c), &calib).unwrap();
        let frac = shifted.iter().filter(|&&g| g < 0.0).count() as f64 / shifted.len() as f64;
        assert!((frac - target).abs() <= 1.0 / shifted.len() as f64 + 1e-15);
    }

    #[test]
    fn calibration_refuses_deep_tails() {
        let model = r_minus_s();
        let config = SimulationConfig::with_samples(1000, 1);
        assert!(matches!(
            calibrate_shift(&model, 0.005, &config),
            Err(Error::CalibrationTooDeep { .. })
        ));
        assert!(calibrate_shift(&model, 0.0, &config).is_err());
    }

    #[test]
    fn robust_scales_of_normal() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 1.0, DistributionSpec::normal(0.0, 1.0))],
            0.0,
        )
        .unwrap();
        let s = simulate(&model, &SimulationConfig::with_samples(100_000, 8)).unwrap();
        let r = robust_scales(&s).unwrap();
        assert!((r.mad / 0.674_489_750_196_081_7 - 1.0).abs() < 0.05);
        assert!((r.iqr / 1.348_979_500_392_163_5 - 1.0).abs() < 0.05);
        assert!(r.conditional_std.is_some());
    }

    #[test]
    fn robust_scales_of_constant() {
        let model = LimitStateModel::new(
            vec![Term::new("X", 0.0, DistributionSpec::normal(0.0, 1.0))],
            2.0,
        )
        .unwrap();
        let s = simulate(&model, &SimulationConfig::with_samples(1000, 8)).unwrap();
        let r = robust_scales(&s).unwrap();
        assert_eq!((r.mad, r.iqr), (0.0, 0.0));
        assert_eq!(r.conditional_std, None);
    }

    #[test]
    fn histogram_counts_sum_to_n() {
        let model = r_minus_s();
        let config = SimulationConfig {
            chunk_size: 999,
            ..SimulationConfig::with_samples(30_000, 5)
        };
        let s = simulate(&model, &config).unwrap();
        let ge = uniform_edges(s.min_g, s.max_g, 200);
        let de = uniform_edges(s.min_deficit.unwrap(), s.max_deficit().unwrap(), 50);
        let (g, d) = histograms(&model, &config, &ge, Some(&de), Some(2)).unwrap();
        assert_eq!(g.iter().sum::<u64>(), s.n);
        assert_eq!(d.iter().sum::<u64>(), s.failure_count);
    }

    #[test]
    fn edges_are_increasing() {
        let e = log_edges(1e-3, 10.0, 40);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(e.len(), 41);
        let e = uniform_edges(2.0, 2.0, 10);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(bin_index(&e, 2.0), 5);
        assert_eq!(bin_index(&e, e[10]), 9);
    }
}

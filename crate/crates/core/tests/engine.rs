use sevrel::engine::{draw_all, simulate, simulate_with_threads};
use sevrel::gaussian::{deficit_map_derivative, mills_conditional_mean};
use sevrel::severity::ReportOptions;
use sevrel::{
    DistributionSpec, LimitStateModel, ReportDocument, SeverityReport, SimulationConfig, Term,
};

fn gaussian_model() -> LimitStateModel {
    LimitStateModel::new(
        vec![
            Term::new("R", 1.0, DistributionSpec::normal(10.0, 1.0)),
            Term::new("S", -1.0, DistributionSpec::normal(5.0, 1.5)),
        ],
        0.0,
    )
    .unwrap()
}

fn mixed_model() -> LimitStateModel {
    LimitStateModel::new(
        vec![
            Term::new("R", 1.0, DistributionSpec::lognormal(1.6, 0.15)),
            Term::new(
                "S",
                -1.0,
                DistributionSpec::mixture([
                    (0.995, DistributionSpec::gumbel(2.0, 0.6)),
                    (0.005, DistributionSpec::gumbel(6.0, 0.6)),
                ]),
            ),
        ],
        2.2,
    )
    .unwrap()
}

fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn chunk_merge_matches_two_pass() {
    for chunk_size in [1_000, 4_096, 100_000] {
        let config = SimulationConfig {
            chunk_size,
            ..SimulationConfig::with_samples(300_000, 11)
        };
        let model = mixed_model();
        let s = simulate(&model, &config).unwrap();
        let all = draw_all(&model, &config).unwrap();
        let (m, v) = two_pass(&all);
        assert!(((s.mean_g - m) / m).abs() <= 1e-9, "chunk {chunk_size}");
        assert!(((s.var_g - v) / v).abs() <= 1e-9, "chunk {chunk_size}");
        let failures: Vec<f64> = all.iter().filter(|g| **g < 0.0).map(|g| -g).collect();
        assert_eq!(s.failure_count as usize, failures.len());
        let sum: f64 = failures.iter().sum();
        assert!(((s.failure_deficit_sum - sum) / sum).abs() <= 1e-9);
    }
}

#[test]
fn bit_identical_across_thread_counts() {
    let config = SimulationConfig {
        chunk_size: 10_000,
        ..SimulationConfig::with_samples(1_000_000, 5)
    };
    let model = mixed_model();
    let one = simulate_with_threads(&model, &config, Some(1)).unwrap();
    for threads in [2, 3, 8] {
        let other = simulate_with_threads(&model, &config, Some(threads)).unwrap();
        assert_eq!(one, other, "threads = {threads}");
        assert_eq!(one.mean_g.to_bits(), other.mean_g.to_bits());
        assert_eq!(one.var_g.to_bits(), other.var_g.to_bits());
    }
}

#[test]
fn seeds_differ() {
    let model = gaussian_model();
    let a = simulate(&model, &SimulationConfig::with_samples(100_000, 1)).unwrap();
    let b = simulate(&model, &SimulationConfig::with_samples(100_000, 2)).unwrap();
    assert_ne!(a.mean_g, b.mean_g);
}

/// `Var(Z | Z > b) = −F'(b)` against a Monte Carlo estimate.
#[test]
fn truncated_normal_variance_identity() {
    let z = DistributionSpec::normal(0.0, 1.0).sample_n(77, 0, 4_000_000);
    for b in [0.0, 1.0, 2.0] {
        let tail: Vec<f64> = z.iter().copied().filter(|x| *x > b).collect();
        let n = tail.len() as f64;
        let (mean, var) = two_pass(&tail);
        let m4 = tail.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let se = ((m4 - var * var) / n).sqrt();
        let exact = -deficit_map_derivative(b.max(1e-300)).unwrap();
        assert!(
            (var - exact).abs() <= 3.0 * se,
            "b={b}: {var} vs {exact} (se {se})"
        );
        let r = mills_conditional_mean(b);
        assert!(
            (mean - r).abs() <= 4.0 * (var / n).sqrt(),
            "b={b}: mean {mean} vs {r}"
        );
    }
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samplers_pass_kolmogorov_smirnov() {
    let cases = [
        DistributionSpec::normal(3.0, 2.0),
        DistributionSpec::lognormal(2.3, 0.2),
        DistributionSpec::gumbel(8.0, 1.2),
        DistributionSpec::gumbel_min(8.0, 1.2),
        DistributionSpec::pareto(10.0, 1.5),
        DistributionSpec::mixture([
            (0.7, DistributionSpec::normal(0.0, 1.0)),
            (0.3, DistributionSpec::gumbel(4.0, 0.5)),
        ]),
    ];
    let n = 50_000;
    // 1% critical value of the one-sample KS statistic.
    let critical = 1.628 / (n as f64).sqrt();
    for (i, d) in cases.iter().enumerate() {
        let xs = d.sample_n(2024, i as u64, n);
        let ks = ks_statistic(xs, |x| d.cdf(x));
        assert!(ks < critical, "{d:?}: D = {ks}");
    }
}

#[test]
fn sample_moments_match_analytic() {
    let cases = [
        DistributionSpec::lognormal(2.3, 0.2),
        DistributionSpec::gumbel(8.0, 1.2),
        DistributionSpec::gumbel_min(150.0, 30.0),
        DistributionSpec::pareto(10.0, 4.5),
        DistributionSpec::from_median_cov(1520.0, 0.1).unwrap(),
    ];
    let n = 400_000;
    for (i, d) in cases.iter().enumerate() {
        let m = d.moments();
        let (mean, var) = two_pass(&d.sample_n(9, i as u64, n));
        let se = (m.variance / n as f64).sqrt();
        assert!(
            (mean - m.mean).abs() <= 5.0 * se,
            "{d:?}: mean {mean} vs {}",
            m.mean
        );
        assert!(
            ((var - m.variance) / m.variance).abs() < 0.03,
            "{d:?}: var {var} vs {}",
            m.variance
        );
    }
}

#[test]
fn report_invariants_hold_on_real_runs() {
    for (model, seed) in [(gaussian_model(), 3), (mixed_model(), 4)] {
        let s = simulate(&model, &SimulationConfig::with_samples(400_000, seed)).unwrap();
        let r =
            SeverityReport::from_summary(&s, &model.moments(), &ReportOptions::default()).unwrap();
        let ef_star = r.ef_star.unwrap();
        match r.beta_s {
            Some(b) => {
                assert!((sevrel::gaussian::deficit_map(b).unwrap() - ef_star).abs() <= 1e-12);
                assert_eq!(r.extreme_flag, sevrel::ExtremeFlag::None);
            }
            None => assert!(
                ef_star >= sevrel::GAUSSIAN_ENDPOINT || r.extreme_flag != sevrel::ExtremeFlag::None
            ),
        }
        let [lo, hi] = r.ef_star_ci.unwrap();
        assert!(lo <= ef_star && ef_star <= hi, "{lo} {ef_star} {hi}");
        assert!(r.pf_std_error > 0.0);
    }
}

#[test]
fn report_json_round_trips() {
    let scenario = sevrel::scenario::builtin("scenarioB").unwrap();
    let result = sevrel::scenario::run(&scenario, Some(3), Some(200_000)).unwrap();
    let doc = result.document();
    let text = doc.to_json().unwrap();
    let back = ReportDocument::from_json(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_json().unwrap(), text);
}

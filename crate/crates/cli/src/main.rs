use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use sevrel::analysis::{analysis_histograms, analyze, AnalysisRequest};
use sevrel::report::write_atomic;
use sevrel::scenario::{self, histogram_csv, ExportFormat, ScenarioId};
use sevrel::severity::{classify_deficit, classify_index, SeverityLevel};
use sevrel::{gaussian, AnalysisConfig, ExtremeFlag, ReportDocument, SeverityReport, Verdict};

const EXIT_USAGE: u8 = 2;
const EXIT_REJECT_FREQUENCY: u8 = 3;
const EXIT_EXTREME: u8 = 4;
const EXIT_EXPECTATION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "sevrel",
    version,
    about = "Severity-aware reliability analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the deficit map, its inverse, or the Gaussian closed form.
    Solve(SolveArgs),
    /// Severity level for a normalized deficit or a severity index.
    Classify(ClassifyArgs),
    /// Run the analysis described by a TOML config.
    Simulate(SimulateArgs),
    /// Run a built-in scenario and check its expected outcomes.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["f", "inverse", "closed_form"])))]
struct SolveArgs {
    /// F(b) = phi(b)/Phi(-b) - b
    #[arg(long, value_name = "B", allow_negative_numbers = true)]
    f: Option<f64>,
    /// beta_S = F^-1(E_f*)
    #[arg(long, value_name = "EFSTAR", allow_negative_numbers = true)]
    inverse: Option<f64>,
    /// E_f* of a Gaussian limit state with index beta
    #[arg(long, value_name = "BETA", allow_negative_numbers = true)]
    closed_form: Option<f64>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["efstar", "betas"])))]
struct ClassifyArgs {
    #[arg(long, value_name = "EFSTAR", allow_negative_numbers = true)]
    efstar: Option<f64>,
    #[arg(long, value_name = "BETA_S", allow_negative_numbers = true)]
    betas: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct ScenarioArgs {
    id: String,
    /// Write report.json, histogram.csv, deficit.csv and fcurve.csv here.
    #[arg(long, value_name = "DIR")]
    export: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Classify(a) => classify(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Scenario(a) => run_scenario(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

type CmdResult = Result<u8, Failure>;

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("SEVREL_THREADS") {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "SEVREL_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// `x` with 12 significant digits in plain decimal notation.
fn sig12(x: f64) -> String {
    let sci = format!("{x:.11e}");
    let exp: i32 = sci
        .split_once('e')
        .map_or(0, |(_, e)| e.parse().unwrap_or(0));
    if !(-5..12).contains(&exp) {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn solve(a: &SolveArgs) -> CmdResult {
    if let Some(b) = a.f {
        println!("{}", sig12(gaussian::deficit_map(b).map_err(usage)?));
    } else if let Some(beta) = a.closed_form {
        println!("{}", sig12(gaussian::deficit_map(beta).map_err(usage)?));
    } else if let Some(y) = a.inverse {
        if !(y > 0.0) || !y.is_finite() {
            return Err(usage(format!(
                "normalized deficit must be positive, got {y}"
            )));
        }
        if y >= gaussian::GAUSSIAN_ENDPOINT {
            println!(
                "EXTREME: beyond Gaussian endpoint {}",
                sig12(gaussian::GAUSSIAN_ENDPOINT)
            );
        } else {
            println!("{}", sig12(gaussian::invert_deficit(y).map_err(usage)?));
        }
    }
    Ok(0)
}

fn print_level(level: SeverityLevel) {
    println!("Level {}", level.label());
    println!("action: {}", level.action_key());
}

fn classify(a: &ClassifyArgs) -> CmdResult {
    let level = match (a.efstar, a.betas) {
        (Some(v), _) => classify_deficit(v).map_err(usage)?,
        (_, Some(b)) => classify_index(b).map_err(usage)?,
        _ => unreachable!("clap enforces one input"),
    };
    print_level(level);
    Ok(0)
}

fn flag_text(flag: ExtremeFlag) -> &'static str {
    match flag {
        ExtremeFlag::None => "none",
        ExtremeFlag::DeficitBeyondEndpoint => "EXTREME: deficit beyond Gaussian endpoint",
        ExtremeFlag::VarianceInfiniteOrUnstable => "EXTREME: variance infinite or unstable",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"))
}

fn print_report(r: &SeverityReport) {
    let row = |k: &str, v: String| println!("{k:<14}{v}");
    row("N", r.n.to_string());
    row("failures", r.failure_count.to_string());
    row("p_f", format!("{:.6e} +/- {:.2e}", r.pf, r.pf_std_error));
    match (r.beta, r.beta_lower_bound) {
        (Some(b), _) => row("beta", format!("{b:.6}")),
        (None, Some(lb)) => row("beta", format!("> {lb:.6} (lower bound)")),
        _ => row("beta", "undefined".into()),
    }
    row("beta_moment", opt(r.beta_moment));
    row("E_f", opt(r.ef));
    let ci = r
        .ef_star_ci
        .map_or_else(String::new, |[lo, hi]| format!(" [{lo:.6}, {hi:.6}]"));
    row("E_f*", format!("{}{ci}", opt(r.ef_star)));
    row("F(beta)", opt(r.gaussian_benchmark));
    match r.beta_s {
        Some(b) => row("beta_S", format!("{b:.6}")),
        None => row("beta_S", flag_text(r.extreme_flag).into()),
    }
    row(
        "level",
        r.level.map_or_else(|| "not assessed".into(), |l| l.label()),
    );
    if let Some(note) = &r.note {
        row("note", note.clone());
    }
}

fn verdict_exit(v: Verdict) -> u8 {
    match v {
        Verdict::AcceptWithLevel => 0,
        Verdict::RejectFrequency => EXIT_REJECT_FREQUENCY,
        Verdict::ExtremeRedesign => EXIT_EXTREME,
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::AcceptWithLevel => "ACCEPT",
        Verdict::RejectFrequency => "REJECT (frequency)",
        Verdict::ExtremeRedesign => "REDESIGN (extreme severity)",
    }
}

fn default_report_path(config: &Path) -> PathBuf {
    config.with_extension("report.json")
}

fn simulate(a: &SimulateArgs) -> CmdResult {
    let threads = threads()?;
    let mut cfg = AnalysisConfig::load(&a.config).map_err(usage)?;
    if let Some(n) = a.n {
        if n == 0 {
            return Err(usage("--n must be positive"));
        }
        cfg.simulation.sample_count = n;
        cfg.simulation.chunk_size = cfg.simulation.chunk_size.min(n);
    }
    if let Some(seed) = a.seed {
        cfg.simulation.master_seed = seed;
    }
    let analysis = analyze(&AnalysisRequest {
        model: &cfg.model,
        target_pf: cfg.target_pf,
        simulation: &cfg.simulation,
        assessment: cfg.assessment,
        threads,
    })
    .map_err(runtime)?;

    let doc = ReportDocument::new(&analysis, &cfg.simulation, cfg.target_pf, cfg.assessment);
    let json = doc.to_json().map_err(runtime)?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if cfg.output.histogram_csv.is_some() || cfg.output.deficit_csv.is_some() {
        let (g, d) = analysis_histograms(&analysis, &cfg.simulation, threads).map_err(runtime)?;
        if let Some(p) = &cfg.output.histogram_csv {
            files.push((p.clone(), histogram_csv(Some(&g))));
        }
        if let Some(p) = &cfg.output.deficit_csv {
            files.push((p.clone(), histogram_csv(d.as_ref())));
        }
    }
    let report_path = cfg
        .output
        .report
        .clone()
        .unwrap_or_else(|| default_report_path(&a.config));
    files.push((report_path.clone(), json));
    for (path, text) in &files {
        write_atomic(path, text.as_bytes()).map_err(runtime)?;
    }

    if let Some(c) = analysis.calibrated_shift {
        println!("{:<14}{c:.6}", "shift");
    }
    print_report(&analysis.report);
    let mut code = 0;
    if let Some(d) = &analysis.decision {
        println!("{:<14}{}", "verdict", verdict_text(d.verdict));
        if let Some(adv) = &d.advisory {
            println!("{:<14}{adv}", "advisory");
        }
        code = verdict_exit(d.verdict);
    }
    println!("{:<14}{}", "report", report_path.display());
    Ok(code)
}

fn fmt_tolerance(t: f64) -> String {
    if t < 1e-3 {
        format!("{t:.2e}")
    } else {
        format!("{t}")
    }
}

fn run_scenario(a: &ScenarioArgs) -> CmdResult {
    let threads = threads()?;
    let id: ScenarioId = a.id.parse().map_err(|e| {
        let known: Vec<&str> = ScenarioId::ALL.iter().map(|i| i.as_str()).collect();
        usage(format!("{e}; known: {}", known.join(", ")))
    })?;
    let sc = scenario::builtin_id(id);
    if a.n == Some(0) {
        return Err(usage("--n must be positive"));
    }
    let result = scenario::run_with_threads(&sc, a.seed, a.n, threads).map_err(runtime)?;

    println!("scenario      {id}");
    println!("model         {}", sc.description);
    println!(
        "N             {} (seed {})",
        result.simulation.sample_count, result.simulation.master_seed
    );
    if let Some(c) = result.analysis.calibrated_shift {
        println!("shift         {c:.6}");
    }
    println!();
    println!(
        "{:<12} {:<28} {:<28} {:<10} status",
        "metric", "expected", "computed", "tol"
    );
    for c in &result.checks {
        println!(
            "{:<12} {:<28} {:<28} {:<10} {}",
            c.metric.name(),
            c.expected,
            c.computed,
            c.tolerance.map_or_else(|| "-".into(), fmt_tolerance),
            if c.passed { "PASS" } else { "FAIL" }
        );
    }

    if let Some(dir) = &a.export {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
        for f in ExportFormat::ALL {
            scenario::export(&result, f, &dir.join(f.file_name())).map_err(runtime)?;
        }
        println!();
        println!("exported to {}", dir.display());
    }
    Ok(if result.all_passed() {
        0
    } else {
        EXIT_EXPECTATION
    })
}

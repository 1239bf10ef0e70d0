use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subzero_bench::config::{parse_seeds, ProblemSpec};
use subzero_bench::runner::{cell_passes, trace_bytes};
use subzero_bench::trace::write_atomic;
use subzero_bench::{
    run_experiment, sweep, BenchError, ConfigError, ExperimentConfig, Format, RunReport, SweepConfig, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION,
};

#[derive(Parser)]
#[command(name = "subzero-bench", version, about = "Run and verify the ellipsoid-method solvers on the benchmark suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One problem and solver over one or more seeds.
    Run(RunArgs),
    /// Cross product of problems, solvers, dimensions and eps/T over seeds.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Confidence parameter of regret-nv.
    #[arg(long)]
    delta: Option<f64>,
    /// Noise scale of regret-nv.
    #[arg(long)]
    sigma: Option<f64>,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list: `1,2,3` or `0..20`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Concurrent runs (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// Oracle query cap per run; exceeding it is an error.
    #[arg(long)]
    max_queries: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// quadratic, logsumexp or smoothed-norm.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Fixes the instance; otherwise each run seed picks it.
    #[arg(long)]
    instance_seed: Option<u64>,
    /// dp, comparator, value or regret-nv.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Horizon of regret-nv.
    #[arg(long = "T")]
    horizon: Option<u64>,
    /// Trace file; the trace goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the run reports as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    problem: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    solver: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long = "T", value_delimiter = ',')]
    horizon: Vec<u64>,
    #[arg(long)]
    instance_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Read { path: path.to_path_buf(), source })
}

fn seeds(c: &Common) -> Result<Option<Vec<u64>>, ConfigError> {
    match (c.seed, &c.seeds) {
        (Some(s), _) => Ok(Some(vec![s])),
        (None, Some(list)) => parse_seeds(list).map(Some),
        (None, None) => Ok(None),
    }
}

fn experiment_config(a: &RunArgs) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &a.common.config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None => {
            let kind = a.problem.clone().ok_or_else(|| ConfigError::new("problem.kind", "required (--problem or --config)"))?;
            let n = a.n.ok_or_else(|| ConfigError::new("problem.n", "required (--n or --config)"))?;
            let solver = a.solver.clone().ok_or_else(|| ConfigError::new("solver", "required (--solver or --config)"))?;
            ExperimentConfig {
                problem: ProblemSpec { kind, n, seed: None, domain: None, parameters: None },
                solver,
                eps: None,
                horizon: None,
                delta: None,
                sigma: None,
                seeds: vec![0],
                max_queries: None,
                out: None,
                format: Format::Csv,
            }
        }
    };
    if let Some(k) = &a.problem {
        cfg.problem.kind = k.clone();
    }
    if let Some(n) = a.n {
        cfg.problem.n = n;
    }
    if a.instance_seed.is_some() {
        cfg.problem.seed = a.instance_seed;
    }
    if let Some(s) = &a.solver {
        cfg.solver = s.clone();
    }
    cfg.eps = a.eps.or(cfg.eps);
    cfg.horizon = a.horizon.or(cfg.horizon);
    cfg.delta = a.common.delta.or(cfg.delta);
    cfg.sigma = a.common.sigma.or(cfg.sigma);
    cfg.max_queries = a.common.max_queries.or(cfg.max_queries);
    if let Some(s) = seeds(&a.common)? {
        cfg.seeds = s;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if let Some(f) = a.common.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn summary_line(r: &RunReport) -> String {
    let regret = match (r.ground_truth.regret, r.regret_bound) {
        (Some(m), Some(b)) => format!(" regret={m:.6e} bound={b:.6e}"),
        _ => String::new(),
    };
    format!(
        "{} queries={} (bound {:.0}) suboptimality={:.3e} target={:.3e}{} {}",
        r.run_id,
        r.total_queries,
        r.query_bound,
        r.ground_truth.suboptimality,
        r.accuracy_target,
        regret,
        if r.bound_satisfied { "ok" } else { "VIOLATION" }
    )
}

fn cmd_run(a: &RunArgs) -> Result<i32, BenchError> {
    let exp = experiment_config(a)?.validate()?;
    let outcomes = run_experiment(&exp, a.common.jobs)?;
    let bytes = trace_bytes(&outcomes, exp.format)?;
    let reports: Vec<RunReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let lines: Vec<String> = reports.iter().map(summary_line).collect();
    match &exp.out {
        Some(path) => {
            write_atomic(path, &bytes)?;
            for l in &lines {
                println!("{l}");
            }
        }
        None => {
            std::io::stdout().write_all(&bytes).map_err(|source| BenchError::Write { path: "<stdout>".into(), source })?;
            for l in &lines {
                eprintln!("{l}");
            }
        }
    }
    if let Some(path) = &a.report {
        let json = serde_json::to_vec_pretty(&reports).map_err(|e| BenchError::Encode(e.to_string()))?;
        write_atomic(path, &json)?;
    }
    Ok(if cell_passes(&exp.settings, &reports) { EXIT_OK } else { EXIT_VIOLATION })
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig, BenchError> {
    let mut cfg = match &a.common.config {
        Some(p) => SweepConfig::from_json(&read(p)?)?,
        None => SweepConfig {
            problems: Vec::new(),
            solvers: Vec::new(),
            n: Vec::new(),
            eps: Vec::new(),
            horizon: Vec::new(),
            delta: None,
            sigma: None,
            instance_seed: None,
            seeds: vec![0],
            max_queries: None,
            out: None,
            format: Format::Csv,
        },
    };
    if !a.problem.is_empty() {
        cfg.problems = a.problem.clone();
    }
    if !a.solver.is_empty() {
        cfg.solvers = a.solver.clone();
    }
    if !a.n.is_empty() {
        cfg.n = a.n.clone();
    }
    if !a.eps.is_empty() {
        cfg.eps = a.eps.clone();
    }
    if !a.horizon.is_empty() {
        cfg.horizon = a.horizon.clone();
    }
    cfg.delta = a.common.delta.or(cfg.delta);
    cfg.sigma = a.common.sigma.or(cfg.sigma);
    cfg.instance_seed = a.instance_seed.or(cfg.instance_seed);
    cfg.max_queries = a.common.max_queries.or(cfg.max_queries);
    if let Some(s) = seeds(&a.common)? {
        cfg.seeds = s;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if let Some(f) = a.common.format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, BenchError> {
    let cfg = sweep_config(a)?;
    let cells = cfg.cells()?;
    let result = sweep(&cells, &cfg.seeds, cfg.max_queries, a.common.jobs, cfg.out.as_deref(), cfg.format)?;
    let table = subzero_bench::runner::summary_csv(&result.cells)?;
    std::io::stdout().write_all(&table).map_err(|source| BenchError::Write { path: "<stdout>".into(), source })?;
    Ok(if result.all_passed() { EXIT_OK } else { EXIT_VIOLATION })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}

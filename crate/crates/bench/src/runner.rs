//! Single runs, multi-seed experiments and grid sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use subzero_core::bounds::{comparator_query_bound, dp_query_bound, value_query_bound};
use subzero_core::oracles::Oracle;
use subzero_core::problems::ProblemInstance;
use subzero_core::regret::{regret_bound, regret_nv, RegretConfig};
use subzero_core::solvers::{optimize_c, optimize_dp, optimize_v, SolverConfig};

use crate::config::{Cell, Experiment, Format, SolverName, SolverSettings, ValidProblem};
use crate::error::BenchError;
use crate::trace::{ellipsoid_rows, encode, regret_rows, write_atomic, write_csv, TraceRow, COLUMNS};

/// Quantities computed from the analytic optimum. Verification only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    /// `f(x') - f*` of the returned point.
    pub suboptimality: f64,
    /// Cumulative regret, regret-nv only.
    pub regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub run_id: String,
    pub solver: SolverName,
    pub problem: String,
    pub n: usize,
    pub seed: u64,
    pub eps: Option<f64>,
    pub horizon: Option<u64>,
    pub final_point: Vec<f64>,
    pub total_queries: u64,
    /// Query bound of the solver (the horizon for regret-nv).
    pub query_bound: f64,
    pub queries_within_bound: bool,
    /// `eps`, or `T^(-1/4)` for regret-nv.
    pub accuracy_target: f64,
    pub accuracy_met: bool,
    pub regret_bound: Option<f64>,
    pub regret_within_bound: Option<bool>,
    /// Run-level verdict: queries and accuracy for the ellipsoid solvers,
    /// queries and regret for regret-nv.
    pub bound_satisfied: bool,
    pub termination: String,
    pub ground_truth: GroundTruth,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    pub rows: Vec<TraceRow>,
}

pub fn run_id(solver: SolverName, problem: &ProblemInstance, seed: u64) -> String {
    format!("{solver}-{}-r{seed}", problem.name())
}

/// Runs one seed. `max_queries` caps the oracle; hitting the cap is an error.
pub fn run_one(problem: &ValidProblem, settings: &SolverSettings, seed: u64, max_queries: Option<u64>) -> Result<RunOutcome, BenchError> {
    let instance = problem.instance(seed)?;
    let solver = settings.solver();
    let id = run_id(solver, &instance, seed);
    let target = match settings {
        SolverSettings::Ellipsoid { eps, .. } => *eps,
        SolverSettings::Regret { horizon, .. } => (*horizon as f64).powf(-0.25),
    };
    instance.ensure_interior(target).map_err(BenchError::Assumption)?;
    let start = Instant::now();
    let (r, l, n) = (instance.radius(), instance.lipschitz(), instance.dim());
    let report = |point: &subzero_core::Vector, total: u64, bound: f64, regret: Option<(f64, f64)>, termination: String| {
        let subopt = instance.suboptimality(point);
        let queries_ok = total as f64 <= bound;
        let accuracy_met = subopt <= target;
        let regret_ok = regret.map(|(m, b)| m <= b);
        RunReport {
            run_id: id.clone(),
            solver,
            problem: instance.name().to_string(),
            n,
            seed,
            eps: settings.eps(),
            horizon: settings.horizon(),
            final_point: point.iter().copied().collect(),
            total_queries: total,
            query_bound: bound,
            queries_within_bound: queries_ok,
            accuracy_target: target,
            accuracy_met,
            regret_bound: regret.map(|(_, b)| b),
            regret_within_bound: regret_ok,
            bound_satisfied: queries_ok && regret_ok.unwrap_or(accuracy_met),
            termination,
            ground_truth: GroundTruth { suboptimality: subopt, regret: regret.map(|(m, _)| m) },
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    };
    match *settings {
        SolverSettings::Ellipsoid { solver, eps } => {
            let cfg = SolverConfig::new(eps);
            let mut oracle = match solver {
                SolverName::Dp => Oracle::directional_preference(&instance),
                SolverName::Comparator => Oracle::comparator(&instance),
                _ => Oracle::value(&instance),
            };
            if let Some(b) = max_queries {
                oracle = oracle.with_budget(b);
            }
            let (x, trace, bound) = match solver {
                SolverName::Dp => {
                    let (x, t) = optimize_dp(&instance, &mut oracle, &cfg)?;
                    (x, t, dp_query_bound(n, r, l, eps))
                }
                SolverName::Comparator => {
                    let (x, t) = optimize_c(&instance, &mut oracle, &cfg)?;
                    (x, t, comparator_query_bound(n, r, l, eps))
                }
                _ => {
                    let (x, t) = optimize_v(&instance, &mut oracle, &cfg)?;
                    (x, t, value_query_bound(n, r, l, eps))
                }
            };
            let rows = ellipsoid_rows(&id, instance.optimum_value(), &trace);
            let report = report(&x, trace.total_queries, bound, None, format!("{:?}", trace.termination));
            Ok(RunOutcome { report, rows })
        }
        SolverSettings::Regret { horizon, delta, sigma } => {
            let cfg = RegretConfig { horizon, delta, sigma };
            let mut oracle = Oracle::noisy_value(&instance, sigma, seed).map_err(subzero_core::Error::from)?;
            if let Some(b) = max_queries {
                oracle = oracle.with_budget(b);
            }
            let bound = regret_bound(&instance, &cfg)?;
            let (x, trace) = regret_nv(&instance, &mut oracle, &cfg)?;
            let rows = regret_rows(&id, &trace);
            let termination = if trace.phase1_complete { "Horizon" } else { "HorizonInPhase1" };
            let report = report(&x, trace.total_queries, horizon as f64, Some((trace.cumulative_regret(), bound)), termination.to_string());
            Ok(RunOutcome { report, rows })
        }
    }
}

/// Verdict over the seeds of one experiment or cell. Ellipsoid solvers must
/// pass on every seed; regret-nv must keep its regret within the bound on at
/// least a `1 - delta` fraction of seeds and never exceed the horizon.
pub fn cell_passes(settings: &SolverSettings, reports: &[RunReport]) -> bool {
    match settings {
        SolverSettings::Ellipsoid { .. } => reports.iter().all(|r| r.bound_satisfied),
        SolverSettings::Regret { delta, .. } => {
            let within = reports.iter().filter(|r| r.regret_within_bound == Some(true)).count();
            reports.iter().all(|r| r.queries_within_bound) && within as f64 >= (1.0 - delta) * reports.len() as f64
        }
    }
}

fn pool(jobs: Option<usize>) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().expect("thread pool")
}

/// Runs every seed of an experiment; results come back in seed order.
pub fn run_experiment(exp: &Experiment, jobs: Option<usize>) -> Result<Vec<RunOutcome>, BenchError> {
    pool(jobs).install(|| {
        exp.seeds.par_iter().map(|&s| run_one(&exp.problem, &exp.settings, s, exp.max_queries)).collect::<Vec<_>>().into_iter().collect()
    })
}

/// Concatenated trace of several runs in the given order.
pub fn trace_bytes(outcomes: &[RunOutcome], format: Format) -> Result<Vec<u8>, BenchError> {
    let rows: Vec<TraceRow> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    encode(&rows, format)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { (xs[m - 1] + xs[m]) / 2.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: String,
    pub problem: String,
    pub solver: SolverName,
    pub n: usize,
    pub eps: Option<f64>,
    pub horizon: Option<u64>,
    pub runs: usize,
    pub median_queries: f64,
    pub median_suboptimality: f64,
    pub median_regret: Option<f64>,
    /// Fraction of seeds whose run-level verdict holds.
    pub satisfied_fraction: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<CellSummary>,
    pub reports: Vec<RunReport>,
}

impl SweepResult {
    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(|c| c.passed)
    }
}

/// Runs the grid with up to `jobs` concurrent runs. With `out` set, each
/// cell's trace is written atomically to `out/cells/<cell>.<ext>` and the
/// cells are merged, in grid order, into `out/traces.<ext>`; `out/runs.csv`
/// gets one row per run and `out/summary.csv` one row per cell.
pub fn sweep(
    cells: &[Cell],
    seeds: &[u64],
    max_queries: Option<u64>,
    jobs: Option<usize>,
    out: Option<&Path>,
    format: Format,
) -> Result<SweepResult, BenchError> {
    let tasks: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| seeds.iter().map(move |&s| (c, s))).collect();
    let outcomes: Vec<RunOutcome> = pool(jobs).install(|| {
        tasks
            .par_iter()
            .map(|&(c, s)| run_one(&cells[c].problem, &cells[c].settings, s, max_queries))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_, _>>()
    })?;
    let mut summaries = Vec::with_capacity(cells.len());
    let mut cell_files = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let runs = &outcomes[c * seeds.len()..(c + 1) * seeds.len()];
        let reports: Vec<RunReport> = runs.iter().map(|o| o.report.clone()).collect();
        if let Some(dir) = out {
            let path = dir.join("cells").join(format!("{}.{}", cell.id(), format.extension()));
            write_atomic(&path, &trace_bytes(runs, format)?)?;
            cell_files.push(path);
        }
        let is_regret = matches!(cell.settings, SolverSettings::Regret { .. });
        summaries.push(CellSummary {
            cell: cell.id(),
            problem: cell.problem.kind.to_string(),
            solver: cell.settings.solver(),
            n: cell.problem.n,
            eps: cell.settings.eps(),
            horizon: cell.settings.horizon(),
            runs: reports.len(),
            median_queries: median(reports.iter().map(|r| r.total_queries as f64).collect()).unwrap_or(f64::NAN),
            median_suboptimality: median(reports.iter().map(|r| r.ground_truth.suboptimality).collect()).unwrap_or(f64::NAN),
            median_regret: if is_regret { median(reports.iter().filter_map(|r| r.ground_truth.regret).collect()) } else { None },
            satisfied_fraction: reports.iter().filter(|r| r.bound_satisfied).count() as f64 / reports.len() as f64,
            passed: cell_passes(&cell.settings, &reports),
        });
    }
    let reports: Vec<RunReport> = outcomes.into_iter().map(|o| o.report).collect();
    if let Some(dir) = out {
        merge(&cell_files, &dir.join(format!("traces.{}", format.extension())), format)?;
        write_atomic(&dir.join("runs.csv"), &runs_csv(&reports)?)?;
        write_atomic(&dir.join("summary.csv"), &summary_csv(&summaries)?)?;
    }
    Ok(SweepResult { cells: summaries, reports })
}

fn merge(files: &[PathBuf], target: &Path, format: Format) -> Result<(), BenchError> {
    let mut bytes = Vec::new();
    let mut json_rows: Vec<serde_json::Value> = Vec::new();
    for (i, f) in files.iter().enumerate() {
        let text = std::fs::read_to_string(f).map_err(|source| BenchError::Read { path: f.clone(), source })?;
        match format {
            Format::Csv => {
                let mut lines = text.lines();
                let header = lines.next().unwrap_or_default();
                if header != COLUMNS.join(",") {
                    return Err(BenchError::Merge { path: f.clone(), message: "unexpected header".into() });
                }
                if i == 0 {
                    bytes.extend_from_slice(header.as_bytes());
                    bytes.push(b'\n');
                }
                for l in lines {
                    bytes.extend_from_slice(l.as_bytes());
                    bytes.push(b'\n');
                }
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> =
                    serde_json::from_str(&text).map_err(|e| BenchError::Merge { path: f.clone(), message: e.to_string() })?;
                json_rows.extend(rows);
            }
        }
    }
    if format == Format::Json {
        bytes = serde_json::to_vec_pretty(&json_rows).map_err(|e| BenchError::Encode(e.to_string()))?;
        bytes.push(b'\n');
    } else if files.is_empty() {
        write_csv(&mut bytes, &[], true)?;
    }
    write_atomic(target, &bytes)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fl(x: f64) -> String {
    crate::trace::float(x)
}

pub fn runs_csv(reports: &[RunReport]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| BenchError::Encode(e.to_string());
    w.write_record([
        "run_id",
        "solver",
        "problem",
        "n",
        "seed",
        "eps",
        "horizon",
        "total_queries",
        "query_bound",
        "suboptimality",
        "regret",
        "regret_bound",
        "bound_satisfied",
    ])
    .map_err(enc)?;
    for r in reports {
        w.write_record([
            r.run_id.clone(),
            r.solver.to_string(),
            r.problem.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.eps.map(fl).unwrap_or_default(),
            opt(r.horizon),
            r.total_queries.to_string(),
            fl(r.query_bound),
            fl(r.ground_truth.suboptimality),
            r.ground_truth.regret.map(fl).unwrap_or_default(),
            r.regret_bound.map(fl).unwrap_or_default(),
            r.bound_satisfied.to_string(),
        ])
        .map_err(enc)?;
    }
    w.into_inner().map_err(|e| BenchError::Encode(e.to_string()))
}

pub fn summary_csv(cells: &[CellSummary]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| BenchError::Encode(e.to_string());
    w.write_record([
        "cell",
        "problem",
        "solver",
        "n",
        "eps",
        "horizon",
        "runs",
        "median_queries",
        "median_suboptimality",
        "median_regret",
        "satisfied_fraction",
        "passed",
    ])
    .map_err(enc)?;
    for c in cells {
        w.write_record([
            c.cell.clone(),
            c.problem.clone(),
            c.solver.to_string(),
            c.n.to_string(),
            c.eps.map(fl).unwrap_or_default(),
            opt(c.horizon),
            c.runs.to_string(),
            fl(c.median_queries),
            fl(c.median_suboptimality),
            c.median_regret.map(fl).unwrap_or_default(),
            fl(c.satisfied_fraction),
            c.passed.to_string(),
        ])
        .map_err(enc)?;
    }
    w.into_inner().map_err(|e| BenchError::Encode(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(bound_satisfied: bool, regret_ok: Option<bool>) -> RunReport {
        RunReport {
            run_id: String::new(),
            solver: SolverName::RegretNv,
            problem: String::new(),
            n: 2,
            seed: 0,
            eps: None,
            horizon: Some(10),
            final_point: vec![],
            total_queries: 10,
            query_bound: 10.0,
            queries_within_bound: true,
            accuracy_target: 1.0,
            accuracy_met: true,
            regret_bound: Some(1.0),
            regret_within_bound: regret_ok,
            bound_satisfied,
            termination: String::new(),
            ground_truth: GroundTruth { suboptimality: 0.0, regret: Some(0.5) },
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn regret_cells_tolerate_a_delta_fraction() {
        let regret = SolverSettings::Regret { horizon: 10, delta: 0.1, sigma: 0.0 };
        let mut reports: Vec<RunReport> = (0..20).map(|_| report(true, Some(true))).collect();
        reports[0] = report(false, Some(false));
        reports[1] = report(false, Some(false));
        assert!(cell_passes(&regret, &reports));
        reports[2] = report(false, Some(false));
        assert!(!cell_passes(&regret, &reports));
        let dp = SolverSettings::Ellipsoid { solver: SolverName::Dp, eps: 0.1 };
        assert!(!cell_passes(&dp, &[report(true, None), report(false, None)]));
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}

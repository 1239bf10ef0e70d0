//! Ellipsoid-method drivers for the directional-preference, comparator and
//! value oracles.
//!
//! All three share one loop: keep the probe region `E(A / (4n^2), c)` inside
//! the domain with feasibility cuts, estimate a cutting direction at the
//! center from the oracle, shallow-cut, and finally pick the best center.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::bounds::{comparator_angle, comparator_iterations, comparator_step, cut_depth, dp_angle, dp_iterations};
use crate::geometry::{self, Ellipsoid, CONDITION_LIMIT};
use crate::linalg::unit_vector;
use crate::oracles::{Oracle, OracleError, OracleKind};
use crate::problems::{initial_ellipsoid, Domain, ProblemInstance};
use crate::pruning::{compare_dp, pd_c, pd_dp};
use crate::{Error, Sign, Vector};

/// Feasibility cuts allowed per run before giving up.
const FEASIBILITY_CUT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target suboptimality.
    pub eps: f64,
    /// Replaces the default iteration count when set.
    pub max_iterations: Option<usize>,
    /// Keep one [`IterationRecord`] per iteration.
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(eps: f64) -> Self {
        SolverConfig { eps, max_iterations: None, record_trace: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    DirectionalPreference,
    Comparator,
    Value,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::DirectionalPreference => "dp",
            SolverKind::Comparator => "comparator",
            SolverKind::Value => "value",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why the main loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    IterationLimit,
    /// `sqrt(lambda_min)` fell below the resolution radius, so the ball of that
    /// radius around the minimizer has been cut into and a near-optimal
    /// center is already among the candidates.
    SmallEllipsoid,
    /// The value method found a center with a provably small gradient.
    NearStationary,
    /// The ellipsoid no longer meets the domain.
    RegionExhausted,
}

/// One oracle-driven iteration. `f_center` and `minimizer_membership` are
/// computed from ground truth for verification; the solver never reads them.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub center: Vector,
    pub f_center: f64,
    /// `ln det(A) / 2 + ln V_n` before the cut.
    pub log_volume: f64,
    pub queries_cumulative: u64,
    pub cone_angle: Option<f64>,
    pub degenerate: bool,
    /// Feasibility cuts applied since the previous record.
    pub feasibility_cuts: usize,
    /// `ln det` change of this iteration's oracle cut, `None` without a cut.
    pub log_det_change: Option<f64>,
    /// `(x* - c)^T A^{-1} (x* - c)` after the cut.
    pub minimizer_membership: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub solver: SolverKind,
    pub n: usize,
    /// Iteration count from the theory (or the override).
    pub planned_iterations: usize,
    pub records: Vec<IterationRecord>,
    /// Oracle iterations actually run.
    pub iterations: usize,
    pub feasibility_cuts: usize,
    /// Queries spent picking the output among the centers.
    pub selection_queries: u64,
    pub total_queries: u64,
    pub termination: Termination,
    /// Number of candidate centers.
    pub centers: usize,
    /// Ground-truth `f(x') - f*` of the output.
    pub suboptimality: f64,
}

pub(crate) enum Status {
    Ready,
    Stop(Termination),
}

pub(crate) fn well_conditioned(e: Ellipsoid, iteration: usize) -> Result<Ellipsoid, Error> {
    let ratio = e.condition_ratio();
    if !(ratio >= CONDITION_LIMIT) {
        return Err(Error::Degenerate { iteration, ratio });
    }
    Ok(e)
}

/// Applies domain cuts to `e` until `E(A / (4n^2), c)` lies in the domain, so
/// every probe within isotropic distance `sqrt(lambda_max) / (2n)` of the
/// center is feasible. Each cut is at relative depth above `-1/(2n)` and
/// therefore shrinks the volume at least as much as an oracle cut. Stops
/// early when `sqrt(lambda_min) < small_radius` or the ellipsoid misses the domain.
pub(crate) fn restore_probe_region(
    e: &mut Ellipsoid,
    domain: &Domain,
    small_radius: f64,
    cuts: &mut usize,
    iteration: usize,
) -> Result<Status, Error> {
    let ratio = cut_depth(e.dim());
    loop {
        if small_radius > 0.0 && e.lambda_min().sqrt() < small_radius {
            return Ok(Status::Stop(Termination::SmallEllipsoid));
        }
        let Some((h, depth)) = domain.deepest_cut(e, ratio) else { return Ok(Status::Ready) };
        if depth >= 1.0 {
            return Ok(Status::Stop(Termination::RegionExhausted));
        }
        *e = well_conditioned(geometry::cut(e, &h.normal, depth)?, iteration)?;
        *cuts += 1;
        if *cuts > FEASIBILITY_CUT_CAP {
            return Err(Error::Degenerate { iteration, ratio: e.condition_ratio() });
        }
    }
}

struct Driver<'a> {
    problem: &'a ProblemInstance,
    e: Ellipsoid,
    small_radius: f64,
    record: bool,
    centers: Vec<Vector>,
    trace: RunTrace,
    pending_feasibility: usize,
}

impl<'a> Driver<'a> {
    fn new(problem: &'a ProblemInstance, solver: SolverKind, planned: usize, small_radius: f64, record: bool) -> Result<Self, Error> {
        Ok(Driver {
            problem,
            e: initial_ellipsoid(problem.domain())?,
            small_radius,
            record,
            centers: Vec::new(),
            trace: RunTrace {
                solver,
                n: problem.dim(),
                planned_iterations: planned,
                records: Vec::new(),
                iterations: 0,
                feasibility_cuts: 0,
                selection_queries: 0,
                total_queries: 0,
                termination: Termination::IterationLimit,
                centers: 0,
                suboptimality: f64::NAN,
            },
            pending_feasibility: 0,
        })
    }

    fn n(&self) -> usize {
        self.problem.dim()
    }

    /// Cuts with domain halfspaces until the probe region fits in the domain,
    /// then stores the center as a candidate.
    fn prepare(&mut self) -> Result<Status, Error> {
        let before = self.trace.feasibility_cuts;
        let status = restore_probe_region(
            &mut self.e,
            self.problem.domain(),
            self.small_radius,
            &mut self.trace.feasibility_cuts,
            self.trace.iterations,
        )?;
        self.pending_feasibility += self.trace.feasibility_cuts - before;
        match status {
            Status::Ready => self.centers.push(self.e.center().clone()),
            Status::Stop(Termination::SmallEllipsoid) if self.problem.domain().contains(self.e.center()) => {
                self.centers.push(self.e.center().clone())
            }
            Status::Stop(_) => {}
        }
        Ok(status)
    }

    fn replace(&mut self, next: Ellipsoid) -> Result<(), Error> {
        self.e = well_conditioned(next, self.trace.iterations)?;
        Ok(())
    }

    /// Shallow cut along an isotropic direction (or just a record when `direction` is `None`).
    fn step(&mut self, direction: Option<&Vector>, queries: u64, cone_angle: Option<f64>, degenerate: bool) -> Result<(), Error> {
        let k = self.trace.iterations;
        let center = self.e.center().clone();
        let log_volume = self.e.log_volume();
        let log_det_before = self.e.log_det();
        let log_det_change = match direction {
            Some(d) => {
                let next = geometry::shallow_cut(&self.e, d, cut_depth(self.n()))?;
                self.replace(next)?;
                Some(self.e.log_det() - log_det_before)
            }
            None => None,
        };
        self.trace.iterations += 1;
        if self.record {
            self.trace.records.push(IterationRecord {
                k,
                f_center: self.problem.value(&center),
                center,
                log_volume,
                queries_cumulative: queries,
                cone_angle,
                degenerate,
                feasibility_cuts: self.pending_feasibility,
                log_det_change,
                minimizer_membership: self.e.membership(self.problem.minimizer()),
            });
        }
        self.pending_feasibility = 0;
        Ok(())
    }

    fn finish(mut self, point: Vector, oracle: &Oracle<'_>, selection: u64) -> (Vector, RunTrace) {
        self.trace.total_queries = oracle.queries();
        self.trace.selection_queries = selection;
        self.trace.centers = self.centers.len();
        self.trace.suboptimality = self.problem.suboptimality(&point);
        (point, self.trace)
    }
}

fn check_setup(problem: &ProblemInstance, oracle: &Oracle<'_>, kind: OracleKind, cfg: &SolverConfig) -> Result<(), Error> {
    if oracle.kind() != kind {
        return Err(OracleError::WrongKind { expected: kind, actual: oracle.kind() }.into());
    }
    if !core::ptr::eq(oracle.problem(), problem) && oracle.problem() != problem {
        return Err(Error::InvalidArgument("oracle belongs to a different problem"));
    }
    problem.ensure_interior(cfg.eps)?;
    Ok(())
}

/// Ellipsoid method with directional-preference pruning.
///
/// Runs `K = ceil(8n(n+1) ln(2RL/eps))` iterations of pruning to angle
/// `asin(1/(2n))` followed by a shallow cut of depth `1/(2n)`, then selects
/// among the centers with [`compare_dp`] at tolerance `eps / 2`. Stops early
/// once `sqrt(lambda_min) < eps / (2L)`.
pub fn optimize_dp(problem: &ProblemInstance, oracle: &mut Oracle<'_>, cfg: &SolverConfig) -> Result<(Vector, RunTrace), Error> {
    check_setup(problem, oracle, OracleKind::DirectionalPreference, cfg)?;
    let n = problem.dim();
    let l = problem.lipschitz();
    let planned = cfg.max_iterations.unwrap_or_else(|| dp_iterations(n, problem.radius(), l, cfg.eps));
    let mut drv = Driver::new(problem, SolverKind::DirectionalPreference, planned, cfg.eps / (2.0 * l), cfg.record_trace)?;
    let theta = dp_angle(n);
    loop {
        if let Status::Stop(t) = drv.prepare()? {
            drv.trace.termination = t;
            break;
        }
        if drv.trace.iterations == planned {
            break;
        }
        let transform = drv.e.isotropic()?;
        let pr = pd_dp(oracle, &transform, theta)?;
        drv.step(Some(&pr.direction), oracle.queries(), Some(pr.final_angle), false)?;
    }
    if drv.centers.is_empty() {
        return Err(Error::InvalidArgument("no feasible center was produced"));
    }
    let before = oracle.queries();
    let point = compare_dp(&drv.centers, oracle, cfg.eps / 2.0)?;
    let selection = oracle.queries() - before;
    Ok(drv.finish(point, oracle, selection))
}

/// Ellipsoid method with comparator pruning.
///
/// Runs `K = ceil(8n(n+1) ln(RL/eps))` iterations; each probes at isotropic
/// distance [`comparator_step`], prunes to angle `asin(1/(2 sqrt(2) n))` and
/// shallow-cuts along the result (the first basis vector when every
/// direction is unknown). The output is the winner of a comparator knockout
/// over the centers. Stops early once `sqrt(lambda_min) < eps / L`.
pub fn optimize_c(problem: &ProblemInstance, oracle: &mut Oracle<'_>, cfg: &SolverConfig) -> Result<(Vector, RunTrace), Error> {
    check_setup(problem, oracle, OracleKind::Comparator, cfg)?;
    let n = problem.dim();
    let (l, r, beta) = (problem.lipschitz(), problem.radius(), problem.smoothness());
    let planned = cfg.max_iterations.unwrap_or_else(|| comparator_iterations(n, r, l, cfg.eps));
    let mut drv = Driver::new(problem, SolverKind::Comparator, planned, cfg.eps / l, cfg.record_trace)?;
    let theta = comparator_angle(n);
    loop {
        if let Status::Stop(t) = drv.prepare()? {
            drv.trace.termination = t;
            break;
        }
        if drv.trace.iterations == planned {
            break;
        }
        let transform = drv.e.isotropic()?;
        let t = comparator_step(cfg.eps, transform.lambda_max(), n, beta, r);
        let pr = pd_c(oracle, &transform, theta, t)?;
        drv.step(Some(&pr.direction), oracle.queries(), Some(pr.final_angle), pr.degenerate)?;
    }
    if drv.centers.is_empty() {
        return Err(Error::InvalidArgument("no feasible center was produced"));
    }
    let before = oracle.queries();
    let mut best = drv.centers[0].clone();
    for x in drv.centers.iter().skip(1) {
        if oracle.query_comparator(&best, x)? == Sign::Minus {
            best = x.clone();
        }
    }
    let selection = oracle.queries() - before;
    Ok(drv.finish(best, oracle, selection))
}

/// Ellipsoid method with forward-difference gradients from exact values.
///
/// At each center with isotropic radius `s` it samples `g(0)` and `g(d e_j)`
/// for `d = min(eps / (2(2n+1) sqrt(n) beta s), s/(2n))` and cuts along the
/// difference quotient `p` when the error ball of radius `sqrt(n) beta d / 2`
/// around `p` subtends at most `asin(1/(2n))`, i.e. `|p| >= n sqrt(n) beta d`.
/// Otherwise the gradient is provably small, the center is `eps`-optimal and
/// the run stops. The output is the center with the smallest sampled value.
/// Also stops once `sqrt(lambda_min) < eps / L`.
pub fn optimize_v(problem: &ProblemInstance, oracle: &mut Oracle<'_>, cfg: &SolverConfig) -> Result<(Vector, RunTrace), Error> {
    check_setup(problem, oracle, OracleKind::Value, cfg)?;
    let n = problem.dim();
    let nf = n as f64;
    let (l, beta) = (problem.lipschitz(), problem.smoothness());
    let planned = cfg.max_iterations.unwrap_or_else(|| dp_iterations(n, problem.radius(), l, cfg.eps));
    let mut drv = Driver::new(problem, SolverKind::Value, planned, cfg.eps / l, cfg.record_trace)?;
    let mut best: Option<(f64, Vector)> = None;
    loop {
        if let Status::Stop(t) = drv.prepare()? {
            drv.trace.termination = t;
            break;
        }
        if drv.trace.iterations == planned {
            break;
        }
        let transform = drv.e.isotropic()?;
        let s = transform.radius();
        let d = (cfg.eps / (2.0 * (2.0 * nf + 1.0) * nf.sqrt() * beta * s)).min(s / (2.0 * nf));
        let center = transform.center().clone();
        let f0 = oracle.query_value(&center)?;
        if best.as_ref().is_none_or(|(fb, _)| f0 < *fb) {
            best = Some((f0, center.clone()));
        }
        let mut p = Vector::zeros(n);
        for j in 0..n {
            let y = transform.inverse(&(unit_vector(n, j) * d));
            p[j] = (oracle.query_value(&y)? - f0) / d;
        }
        let half_width = nf.sqrt() * beta * d / 2.0;
        if p.norm() >= 2.0 * nf * half_width && p.norm() > 0.0 {
            drv.step(Some(&p), oracle.queries(), None, false)?;
        } else {
            drv.step(None, oracle.queries(), None, false)?;
            drv.trace.termination = Termination::NearStationary;
            best = Some((f0, center));
            break;
        }
    }
    let point = match best {
        Some((_, x)) => x,
        // no center was ever queried: the loop stopped before the first iteration
        None => drv.centers.last().cloned().ok_or(Error::InvalidArgument("no feasible center was produced"))?,
    };
    Ok(drv.finish(point, oracle, 0))
}

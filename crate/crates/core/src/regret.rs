//! Three-phase low-regret minimization with a noisy value oracle.
//!
//! Phase 1 runs the ellipsoid method with averaged finite-difference
//! gradients, escalating the number of repetitions (and shrinking the
//! difference step) until the estimate is accurate enough for a shallow cut.
//! Phase 2 re-evaluates every visited center and keeps the one with the
//! lowest mean. Phase 3 spends the rest of the horizon on that point.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::bounds::{cut_depth, regret_rounds};
use crate::geometry;
use crate::linalg::unit_vector;
use crate::oracles::{Oracle, OracleError, OracleKind};
use crate::problems::{initial_ellipsoid, ProblemInstance};
use crate::solvers::{restore_probe_region, well_conditioned, Status};
use crate::{Error, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct RegretConfig {
    /// Total number of oracle queries `T`.
    pub horizon: u64,
    /// Failure probability.
    pub delta: f64,
    /// Noise scale of the oracle.
    pub sigma: f64,
}

/// Constants derived from a configuration and an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretParams {
    /// Phase-1 rounds `K = ceil(8n(n+1) ln(2 R L T^(1/4)))`.
    pub rounds: usize,
    /// `delta / (4 n K log16(15T / (2n)))`.
    pub delta_prime: f64,
    /// Base repetitions `max(1, ceil(32 sigma^2 n^4 ln(2 / delta')))`.
    pub tau: u64,
    /// Phase-2 repetitions per center, `max(1, ceil(32 sigma^2 sqrt(T) ln(2(K+1)/delta)))`.
    pub phase2_repeats: u64,
    /// Accuracy target `T^(-1/4)`.
    pub target: f64,
}

impl RegretParams {
    pub fn new(problem: &ProblemInstance, cfg: &RegretConfig) -> Result<Self, Error> {
        if cfg.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be positive"));
        }
        if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
            return Err(Error::InvalidArgument("delta must lie in (0, 1]"));
        }
        if !(cfg.sigma >= 0.0) || !cfg.sigma.is_finite() {
            return Err(Error::InvalidArgument("sigma must be finite and nonnegative"));
        }
        let n = problem.dim();
        let nf = n as f64;
        let t = cfg.horizon as f64;
        let rounds = regret_rounds(n, problem.radius(), problem.lipschitz(), cfg.horizon);
        let kf = rounds as f64;
        // log16 is clamped at 1 so that tiny horizons keep delta' <= delta
        let levels = ((15.0 * t / (2.0 * nf)).ln() / 16f64.ln()).max(1.0);
        let delta_prime = cfg.delta / (4.0 * nf * kf * levels);
        let s2 = cfg.sigma * cfg.sigma;
        let tau = ceil_count(32.0 * s2 * nf.powi(4) * (2.0 / delta_prime).ln());
        let phase2_repeats = ceil_count(32.0 * s2 * t.sqrt() * (2.0 * (kf + 1.0) / cfg.delta).ln());
        Ok(RegretParams { rounds, delta_prime, tau, phase2_repeats, target: t.powf(-0.25) })
    }
}

fn ceil_count(x: f64) -> u64 {
    let c = x.ceil();
    if c.is_finite() && c >= 1.0 {
        if c >= u64::MAX as f64 {
            u64::MAX
        } else {
            c as u64
        }
    } else {
        1
    }
}

/// `K (R L tau + 5 T^(3/4) n^(-1/4) max(nR, 1)(1 + beta) tau^(1/4))
///  + (K + 1) r R L + T^(3/4)` with the Phase-2 repetitions `r`.
pub fn regret_bound(problem: &ProblemInstance, cfg: &RegretConfig) -> Result<f64, Error> {
    let p = RegretParams::new(problem, cfg)?;
    let n = problem.dim() as f64;
    let (r, l, beta) = (problem.radius(), problem.lipschitz(), problem.smoothness());
    let t = cfg.horizon as f64;
    let k = p.rounds as f64;
    let tau = p.tau as f64;
    let explore = k * (r * l * tau + 5.0 * t.powf(0.75) * n.powf(-0.25) * (n * r).max(1.0) * (1.0 + beta) * tau.powf(0.25));
    Ok(explore + (k + 1.0) * p.phase2_repeats as f64 * r * l + t.powf(0.75))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegretPhase {
    Explore,
    Select,
    Commit,
}

impl RegretPhase {
    pub fn number(self) -> u8 {
        match self {
            RegretPhase::Explore => 1,
            RegretPhase::Select => 2,
            RegretPhase::Commit => 3,
        }
    }
}

impl fmt::Display for RegretPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Outcome of one escalation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelCase {
    /// The estimate was accurate enough; the ellipsoid was cut.
    Cut,
    /// Not conclusive; moved to the next level.
    Escalate,
    /// The horizon ran out inside this level.
    Exhausted,
}

/// A run of consecutive queries at one point. Phase 1 blocks carry the
/// round `k`, Phase 2 blocks the index of the center being re-evaluated and
/// the Phase 3 block the index of the selected center.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBlock {
    pub phase: RegretPhase,
    pub k: usize,
    /// Queries spent in this block (fewer than requested when the horizon ran out).
    pub queries: u64,
    /// Cumulative query count after the block.
    pub queries_end: u64,
    /// `f(x) - f*` of the block's point, the regret of each of its queries.
    pub regret: f64,
    /// `f(x)` of the block's point.
    pub value: f64,
    /// Log-volume of the Phase-1 ellipsoid the block belongs to.
    pub log_volume: Option<f64>,
}

/// One escalation level `(k, i)` of Phase 1. `gradient_norm` and
/// `estimate_error` use ground truth and are for verification only.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub k: usize,
    pub i: u32,
    pub step: f64,
    pub half_width: f64,
    pub repeats: u64,
    pub estimate_norm: f64,
    pub case: LevelCase,
    pub queries_cumulative: u64,
    /// `|grad (f o T^{-1})(0)|`.
    pub gradient_norm: f64,
    /// `|p - grad (f o T^{-1})(0)|`.
    pub estimate_error: f64,
    pub center_suboptimality: f64,
    pub log_volume: f64,
}

impl LevelRecord {
    /// Whether the estimate lies within `sqrt(n) Delta_i` of the true gradient.
    pub fn within_confidence(&self, n: usize) -> bool {
        self.estimate_error <= (n as f64).sqrt() * self.half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub n: usize,
    pub params: RegretParams,
    pub horizon: u64,
    /// `f(x_t) - f*` of every query, in order.
    pub instantaneous: Vec<f64>,
    /// Query index at which each phase started, if it was reached.
    pub phase_starts: [Option<u64>; 3],
    pub levels: Vec<LevelRecord>,
    pub blocks: Vec<QueryBlock>,
    /// Centers visited in Phase 1.
    pub centers: Vec<Vector>,
    /// Phase-2 empirical means, one per fully evaluated center.
    pub phase2_means: Vec<f64>,
    /// Index into `centers` of the Phase-2 choice.
    pub selected: Option<usize>,
    /// Phase-1 cuts performed.
    pub cuts: usize,
    pub feasibility_cuts: usize,
    /// False when the horizon ran out before Phase 1 finished.
    pub phase1_complete: bool,
    pub total_queries: u64,
    pub final_suboptimality: f64,
}

impl RegretTrace {
    pub fn cumulative_regret(&self) -> f64 {
        self.instantaneous.iter().sum()
    }

    /// Running sums of the instantaneous regret.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.instantaneous
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect()
    }

    /// Phase of the query with zero-based index `t`.
    pub fn phase_of(&self, t: u64) -> RegretPhase {
        match self.phase_starts {
            [_, _, Some(s3)] if t >= s3 => RegretPhase::Commit,
            [_, Some(s2), _] if t >= s2 => RegretPhase::Select,
            _ => RegretPhase::Explore,
        }
    }

    pub fn reached(&self, phase: RegretPhase) -> bool {
        self.phase_starts[phase.number() as usize - 1].is_some()
    }
}

struct Meter<'a, 'p> {
    oracle: &'a mut Oracle<'p>,
    problem: &'a ProblemInstance,
    horizon: u64,
    instantaneous: Vec<f64>,
    blocks: Vec<QueryBlock>,
}

#[derive(Clone, Copy)]
struct Label {
    phase: RegretPhase,
    k: usize,
    log_volume: Option<f64>,
}

impl Meter<'_, '_> {
    fn used(&self) -> u64 {
        self.instantaneous.len() as u64
    }

    fn left(&self) -> u64 {
        self.horizon - self.used()
    }

    fn query(&mut self, x: &Vector) -> Result<Option<f64>, Error> {
        if self.used() >= self.horizon {
            return Ok(None);
        }
        let y = self.oracle.query_noisy_value(x)?;
        self.instantaneous.push(self.problem.suboptimality(x));
        Ok(Some(y))
    }

    /// Mean of `reps` queries at `x`, or `None` when the horizon ends first
    /// (the queries that fit are still spent).
    fn mean(&mut self, x: &Vector, reps: u64, label: Label) -> Result<Option<f64>, Error> {
        let start = self.used();
        let mut sum = 0.0;
        let mut complete = true;
        for _ in 0..reps {
            match self.query(x)? {
                Some(y) => sum += y,
                None => {
                    complete = false;
                    break;
                }
            }
        }
        let queries = self.used() - start;
        if queries > 0 {
            let value = self.problem.value(x);
            self.blocks.push(QueryBlock {
                phase: label.phase,
                k: label.k,
                queries,
                queries_end: self.used(),
                regret: value - self.problem.optimum_value(),
                value,
                log_volume: label.log_volume,
            });
        }
        Ok(complete.then(|| sum / reps as f64))
    }
}

/// Runs the three phases for exactly `cfg.horizon` queries (or fewer when
/// nothing is left to do) and returns the final point: the Phase-2 choice,
/// or the most recent center when the horizon ran out during Phase 1.
pub fn regret_nv(problem: &ProblemInstance, oracle: &mut Oracle<'_>, cfg: &RegretConfig) -> Result<(Vector, RegretTrace), Error> {
    if oracle.kind() != OracleKind::NoisyValue {
        return Err(OracleError::WrongKind { expected: OracleKind::NoisyValue, actual: oracle.kind() }.into());
    }
    if oracle.sigma() != cfg.sigma {
        return Err(Error::InvalidArgument("oracle noise scale differs from the configuration"));
    }
    let params = RegretParams::new(problem, cfg)?;
    let n = problem.dim();
    let nf = n as f64;
    let minimum = (n as u64 + 1).saturating_mul(params.tau);
    if cfg.horizon < minimum {
        return Err(Error::HorizonTooSmall { horizon: cfg.horizon, minimum });
    }
    problem.ensure_interior(params.target)?;
    let beta = problem.smoothness();
    let depth = cut_depth(n);

    let mut trace = RegretTrace {
        n,
        params: params.clone(),
        horizon: cfg.horizon,
        instantaneous: Vec::new(),
        phase_starts: [Some(0), None, None],
        levels: Vec::new(),
        centers: Vec::new(),
        phase2_means: Vec::new(),
        selected: None,
        cuts: 0,
        feasibility_cuts: 0,
        blocks: Vec::new(),
        phase1_complete: false,
        total_queries: 0,
        final_suboptimality: f64::NAN,
    };
    let mut meter = Meter { oracle, problem, horizon: cfg.horizon, instantaneous: Vec::new(), blocks: Vec::new() };
    let mut e = initial_ellipsoid(problem.domain())?;

    'rounds: for k in 0..=params.rounds {
        match restore_probe_region(&mut e, problem.domain(), 0.0, &mut trace.feasibility_cuts, k)? {
            Status::Ready => {}
            Status::Stop(_) => break 'rounds,
        }
        trace.centers.push(e.center().clone());
        if k == params.rounds {
            trace.phase1_complete = true;
            break;
        }
        let transform = e.isotropic()?;
        let center = transform.center().clone();
        let s = transform.radius();
        let lambda = transform.lambda_max();
        let d = s.min(1.0) / (2.0 * nf);
        let big_delta = d * (2.0 + beta * lambda) / (2.0 * lambda);
        let true_grad = transform.gradient_to_isotropic(&problem.gradient(&center));
        let center_subopt = problem.suboptimality(&center);
        let log_volume = e.log_volume();
        let label = Label { phase: RegretPhase::Explore, k, log_volume: Some(log_volume) };
        let mut i: u32 = 0;
        loop {
            let scale = 2f64.powi(i as i32);
            let step = d / scale;
            let half_width = big_delta / scale;
            let repeats = 16u64.checked_pow(i).and_then(|m| m.checked_mul(params.tau)).unwrap_or(u64::MAX);
            let mut record = LevelRecord {
                k,
                i,
                step,
                half_width,
                repeats,
                estimate_norm: f64::NAN,
                case: LevelCase::Exhausted,
                queries_cumulative: 0,
                gradient_norm: true_grad.norm(),
                estimate_error: f64::NAN,
                center_suboptimality: center_subopt,
                log_volume,
            };
            let mut means = Vec::with_capacity(n + 1);
            let mut points = Vec::with_capacity(n + 1);
            points.push(center.clone());
            for j in 0..n {
                points.push(transform.inverse(&(unit_vector(n, j) * step)));
            }
            for x in &points {
                match meter.mean(x, repeats, label)? {
                    Some(m) => means.push(m),
                    None => {
                        record.queries_cumulative = meter.used();
                        trace.levels.push(record);
                        break 'rounds;
                    }
                }
            }
            let p = Vector::from_fn(n, |j, _| (means[j + 1] - means[0]) / step);
            let pn = p.norm();
            let width = nf.sqrt() * half_width;
            record.estimate_norm = pn;
            record.estimate_error = (&p - &true_grad).norm();
            record.queries_cumulative = meter.used();
            if pn > width && width / pn <= depth {
                record.case = LevelCase::Cut;
                trace.levels.push(record);
                e = well_conditioned(geometry::shallow_cut(&e, &p, depth)?, k)?;
                trace.cuts += 1;
                break;
            }
            record.case = LevelCase::Escalate;
            trace.levels.push(record);
            i += 1;
        }
    }

    let point = if trace.phase1_complete && meter.left() > 0 {
        trace.phase_starts[1] = Some(meter.used());
        let mut best: Option<(f64, usize)> = None;
        for (idx, c) in trace.centers.iter().enumerate() {
            let label = Label { phase: RegretPhase::Select, k: idx, log_volume: None };
            match meter.mean(c, params.phase2_repeats, label)? {
                Some(m) => {
                    trace.phase2_means.push(m);
                    if best.is_none_or(|(bm, _)| m < bm) {
                        best = Some((m, idx));
                    }
                }
                None => break,
            }
        }
        let idx = best.map_or(trace.centers.len() - 1, |(_, i)| i);
        trace.selected = Some(idx);
        let x = trace.centers[idx].clone();
        if meter.left() > 0 {
            trace.phase_starts[2] = Some(meter.used());
            let label = Label { phase: RegretPhase::Commit, k: idx, log_volume: None };
            meter.mean(&x, meter.left(), label)?;
        }
        x
    } else {
        match trace.centers.last() {
            Some(c) => c.clone(),
            None => e.center().clone(),
        }
    };
    trace.instantaneous = meter.instantaneous;
    trace.blocks = meter.blocks;
    trace.total_queries = trace.instantaneous.len() as u64;
    trace.final_suboptimality = problem.suboptimality(&point);
    Ok((point, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic, Domain};
    use crate::Matrix;

    fn unit_quadratic() -> ProblemInstance {
        make_quadratic(Matrix::identity(2, 2), Vector::from_vec(alloc::vec![0.3, -0.2]), Domain::ball(Vector::zeros(2), 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn parameters_match_formulas() {
        let p = unit_quadratic();
        let cfg = RegretConfig { horizon: 1_000_000, delta: 0.1, sigma: 0.05 };
        let params = RegretParams::new(&p, &cfg).unwrap();
        let l = p.lipschitz();
        let k = (48.0 * (2.0 * l * 1e6f64.powf(0.25)).ln()).ceil() as usize;
        assert_eq!(params.rounds, k);
        let dp = 0.1 / (8.0 * k as f64 * (15e6f64 / 4.0).ln() / 16f64.ln());
        assert!((params.delta_prime - dp).abs() < 1e-15);
        assert_eq!(params.tau, (32.0 * 0.0025 * 16.0 * (2.0 / dp).ln()).ceil() as u64);
    }

    #[test]
    fn budget_is_exact() {
        let p = unit_quadratic();
        let cfg = RegretConfig { horizon: 5000, delta: 0.1, sigma: 0.05 };
        let mut o = Oracle::noisy_value(&p, 0.05, 3).unwrap();
        let (_, trace) = regret_nv(&p, &mut o, &cfg).unwrap();
        assert_eq!(trace.total_queries, 5000);
        assert_eq!(o.queries(), 5000);
        assert!(!trace.phase1_complete);
        let per_block: u64 = trace.blocks.iter().map(|b| b.queries).sum();
        assert_eq!(per_block, 5000);
        let mut t = 0;
        for b in &trace.blocks {
            for r in &trace.instantaneous[t as usize..b.queries_end as usize] {
                assert_eq!(*r, b.regret);
            }
            t = b.queries_end;
        }
    }

    #[test]
    fn noiseless_run_reaches_target() {
        let p = unit_quadratic();
        let cfg = RegretConfig { horizon: 1_000_000, delta: 0.1, sigma: 0.0 };
        let mut o = Oracle::noisy_value(&p, 0.0, 0).unwrap();
        let (x, trace) = regret_nv(&p, &mut o, &cfg).unwrap();
        assert_eq!(trace.params.tau, 1);
        assert!(trace.cuts > 0);
        assert!(p.suboptimality(&x) <= trace.params.target);
        assert!(trace.levels.iter().all(|l| l.case != LevelCase::Cut || l.estimate_error < 1e-6 + l.step));
    }

    #[test]
    fn tiny_horizon_is_rejected() {
        let p = unit_quadratic();
        let cfg = RegretConfig { horizon: 10, delta: 0.1, sigma: 0.05 };
        let mut o = Oracle::noisy_value(&p, 0.05, 3).unwrap();
        assert!(matches!(regret_nv(&p, &mut o, &cfg), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn bound_is_monotone() {
        let p = unit_quadratic();
        let base = RegretConfig { horizon: 10_000, delta: 0.1, sigma: 0.05 };
        let b0 = regret_bound(&p, &base).unwrap();
        let b1 = regret_bound(&p, &RegretConfig { horizon: 20_000, ..base.clone() }).unwrap();
        let b2 = regret_bound(&p, &RegretConfig { sigma: 0.1, ..base }).unwrap();
        assert!(b1 >= b0 && b2 >= b0);
    }
}

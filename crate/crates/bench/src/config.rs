//! Experiment and sweep configuration: the JSON schema, field-level
//! validation and instance construction.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use subzero_core::problems::{
    make_logsumexp, make_quadratic, make_smoothed_norm, suite_instance, Domain, Objective, ProblemInstance, ProblemKind,
};
use subzero_core::solvers::SolverKind;
use subzero_core::{Matrix, Vector};

use crate::error::BenchError;

/// A schema violation, reported with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverName {
    #[serde(rename = "dp")]
    Dp,
    #[serde(rename = "comparator")]
    Comparator,
    #[serde(rename = "value")]
    Value,
    #[serde(rename = "regret-nv")]
    RegretNv,
}

impl SolverName {
    pub const ALL: [SolverName; 4] = [SolverName::Dp, SolverName::Comparator, SolverName::Value, SolverName::RegretNv];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Dp => "dp",
            SolverName::Comparator => "comparator",
            SolverName::Value => "value",
            SolverName::RegretNv => "regret-nv",
        }
    }

    /// The ellipsoid solver behind this name, `None` for regret-nv.
    pub fn ellipsoid(self) -> Option<SolverKind> {
        match self {
            SolverName::Dp => Some(SolverKind::DirectionalPreference),
            SolverName::Comparator => Some(SolverKind::Comparator),
            SolverName::Value => Some(SolverKind::Value),
            SolverName::RegretNv => None,
        }
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverName::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ConfigError::new("solver", format!("unknown solver '{s}' (expected dp, comparator, value or regret-nv)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// Explicit objective parameters. Which keys are required depends on the kind:
/// `q` and `minimizer` for quadratic, `directions` and `temperature` for
/// logsumexp, `minimizer` and `mu` for smoothed-norm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametersSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimizer: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: String,
    pub n: usize,
    /// Instance seed. When absent every run seed also picks the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ParametersSpec>,
}

/// Raw experiment configuration as read from JSON or assembled from flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, alias = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| json_error(&e))
    }

    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        let problem = ValidProblem::new(&self.problem)?;
        let solver: SolverName = self.solver.parse()?;
        let settings = SolverSettings::new(solver, self.eps, self.horizon, self.delta, self.sigma)?;
        check_seeds(&self.seeds)?;
        if self.max_queries == Some(0) {
            return Err(ConfigError::new("max_queries", "must be positive"));
        }
        Ok(Experiment {
            problem,
            settings,
            seeds: self.seeds.clone(),
            max_queries: self.max_queries,
            out: self.out.clone(),
            format: self.format,
        })
    }
}

fn json_error(e: &serde_json::Error) -> ConfigError {
    let msg = e.to_string();
    // serde names the field inside backticks, e.g. "missing field `n`"
    let field = msg.split('`').nth(1).filter(|_| msg.contains("field")).map(str::to_string).unwrap_or_else(|| "<document>".to_string());
    ConfigError::new(field, msg)
}

fn check_seeds(seeds: &[u64]) -> Result<(), ConfigError> {
    if seeds.is_empty() {
        return Err(ConfigError::new("seeds", "at least one seed is required"));
    }
    let unique: BTreeSet<_> = seeds.iter().collect();
    if unique.len() != seeds.len() {
        return Err(ConfigError::new("seeds", "seeds must be distinct"));
    }
    Ok(())
}

/// Solver-specific settings after validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverSettings {
    Ellipsoid { solver: SolverName, eps: f64 },
    Regret { horizon: u64, delta: f64, sigma: f64 },
}

impl SolverSettings {
    pub fn new(
        solver: SolverName,
        eps: Option<f64>,
        horizon: Option<u64>,
        delta: Option<f64>,
        sigma: Option<f64>,
    ) -> Result<Self, ConfigError> {
        let unused = |field: &str| ConfigError::new(field, format!("not used by solver {solver}"));
        let required = |field: &str| ConfigError::new(field, format!("required for solver {solver}"));
        if solver == SolverName::RegretNv {
            if eps.is_some() {
                return Err(unused("eps"));
            }
            let horizon = horizon.ok_or_else(|| required("horizon"))?;
            let delta = delta.ok_or_else(|| required("delta"))?;
            let sigma = sigma.ok_or_else(|| required("sigma"))?;
            if horizon == 0 {
                return Err(ConfigError::new("horizon", "must be positive"));
            }
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(ConfigError::new("delta", format!("must lie in (0, 1], got {delta}")));
            }
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(ConfigError::new("sigma", format!("must be finite and nonnegative, got {sigma}")));
            }
            Ok(SolverSettings::Regret { horizon, delta, sigma })
        } else {
            for (field, present) in [("horizon", horizon.is_some()), ("delta", delta.is_some()), ("sigma", sigma.is_some())] {
                if present {
                    return Err(unused(field));
                }
            }
            let eps = eps.ok_or_else(|| required("eps"))?;
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(ConfigError::new("eps", format!("must be positive and finite, got {eps}")));
            }
            Ok(SolverSettings::Ellipsoid { solver, eps })
        }
    }

    pub fn solver(&self) -> SolverName {
        match self {
            SolverSettings::Ellipsoid { solver, .. } => *solver,
            SolverSettings::Regret { .. } => SolverName::RegretNv,
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            SolverSettings::Ellipsoid { eps, .. } => Some(*eps),
            SolverSettings::Regret { .. } => None,
        }
    }

    pub fn horizon(&self) -> Option<u64> {
        match self {
            SolverSettings::Regret { horizon, .. } => Some(*horizon),
            SolverSettings::Ellipsoid { .. } => None,
        }
    }
}

/// Problem description checked against the schema; instances are built per run seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidProblem {
    pub kind: ProblemKind,
    pub n: usize,
    pub seed: Option<u64>,
    domain: Option<Domain>,
    objective: Option<Objective>,
}

impl ValidProblem {
    pub fn new(spec: &ProblemSpec) -> Result<Self, ConfigError> {
        let kind: ProblemKind = spec.kind.parse().map_err(|_| {
            ConfigError::new("problem.kind", format!("unknown kind '{}' (expected quadratic, logsumexp or smoothed-norm)", spec.kind))
        })?;
        let n = spec.n;
        if n < 2 {
            return Err(ConfigError::new("problem.n", format!("must be at least 2, got {n}")));
        }
        let domain = spec.domain.as_ref().map(|d| domain_from_spec(d, n)).transpose()?;
        let objective = spec.parameters.as_ref().map(|p| objective_from_spec(kind, p, n)).transpose()?;
        Ok(ValidProblem { kind, n, seed: spec.seed, domain, objective })
    }

    /// Suite instance (or explicit instance) for a run seed.
    pub fn instance(&self, run_seed: u64) -> Result<ProblemInstance, BenchError> {
        let seed = self.seed.unwrap_or(run_seed);
        let custom = self.domain.is_some() || self.objective.is_some();
        let objective = match &self.objective {
            Some(o) => o.clone(),
            None => suite_instance(self.kind, self.n, seed).map_err(subzero_core::Error::from)?.objective().clone(),
        };
        let domain = match (&self.domain, &self.objective) {
            (Some(d), _) => d.clone(),
            (None, Some(_)) => Domain::ball(Vector::zeros(self.n), 1.0).map_err(subzero_core::Error::from)?,
            (None, None) => return Ok(suite_instance(self.kind, self.n, seed).map_err(subzero_core::Error::from)?),
        };
        let p = match objective {
            Objective::Quadratic { q, minimizer } => make_quadratic(q, minimizer, domain),
            Objective::LogSumExp { directions, temperature } => make_logsumexp(directions, temperature, domain),
            Objective::SmoothedNorm { minimizer, mu } => make_smoothed_norm(minimizer, mu, domain),
            Objective::Rescaled { .. } => unreachable!("configs never describe rescaled objectives"),
        }
        .map_err(subzero_core::Error::from)?;
        let name = if custom { format!("custom-{}-n{}", self.kind, self.n) } else { p.name().to_string() };
        Ok(p.with_name(name))
    }
}

fn check_len(field: &str, v: &[f64], n: usize) -> Result<Vector, ConfigError> {
    if v.len() != n {
        return Err(ConfigError::new(field, format!("expected {n} entries, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::new(field, "entries must be finite"));
    }
    Ok(Vector::from_column_slice(v))
}

fn domain_from_spec(d: &DomainSpec, n: usize) -> Result<Domain, ConfigError> {
    match d {
        DomainSpec::Ball { center, radius } => {
            let c = check_len("problem.domain.ball.center", center, n)?;
            Domain::ball(c, *radius).map_err(|e| ConfigError::new("problem.domain.ball.radius", e.to_string()))
        }
        DomainSpec::Box { lower, upper } => {
            let lo = check_len("problem.domain.box.lower", lower, n)?;
            let hi = check_len("problem.domain.box.upper", upper, n)?;
            Domain::cube(lo, hi).map_err(|e| ConfigError::new("problem.domain.box", e.to_string()))
        }
    }
}

fn objective_from_spec(kind: ProblemKind, p: &ParametersSpec, n: usize) -> Result<Objective, ConfigError> {
    let field = |name: &str| format!("problem.parameters.{name}");
    let missing = |name: &str| ConfigError::new(field(name), format!("required for kind {kind}"));
    let extra = |name: &str| ConfigError::new(field(name), format!("not used by kind {kind}"));
    let present = [
        ("q", p.q.is_some()),
        ("minimizer", p.minimizer.is_some()),
        ("directions", p.directions.is_some()),
        ("temperature", p.temperature.is_some()),
        ("mu", p.mu.is_some()),
    ];
    let allowed: &[&str] = match kind {
        ProblemKind::Quadratic => &["q", "minimizer"],
        ProblemKind::LogSumExp => &["directions", "temperature"],
        ProblemKind::SmoothedNorm => &["minimizer", "mu"],
    };
    if let Some((name, _)) = present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
        return Err(extra(name));
    }
    match kind {
        ProblemKind::Quadratic => {
            let rows = p.q.as_ref().ok_or_else(|| missing("q"))?;
            if rows.len() != n {
                return Err(ConfigError::new(field("q"), format!("expected {n} rows, found {}", rows.len())));
            }
            let mut q = Matrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                let r = check_len(&format!("{}[{i}]", field("q")), row, n)?;
                q.set_row(i, &r.transpose());
            }
            let m = check_len(&field("minimizer"), p.minimizer.as_ref().ok_or_else(|| missing("minimizer"))?, n)?;
            Ok(Objective::Quadratic { q, minimizer: m })
        }
        ProblemKind::LogSumExp => {
            let dirs = p.directions.as_ref().ok_or_else(|| missing("directions"))?;
            if dirs.is_empty() {
                return Err(ConfigError::new(field("directions"), "at least one direction is required"));
            }
            let directions = dirs
                .iter()
                .enumerate()
                .map(|(i, d)| check_len(&format!("{}[{i}]", field("directions")), d, n))
                .collect::<Result<Vec<_>, _>>()?;
            let temperature = p.temperature.ok_or_else(|| missing("temperature"))?;
            Ok(Objective::LogSumExp { directions, temperature })
        }
        ProblemKind::SmoothedNorm => {
            let m = check_len(&field("minimizer"), p.minimizer.as_ref().ok_or_else(|| missing("minimizer"))?, n)?;
            let mu = p.mu.ok_or_else(|| missing("mu"))?;
            Ok(Objective::SmoothedNorm { minimizer: m, mu })
        }
    }
}

/// A validated experiment: one problem and solver, several seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub problem: ValidProblem,
    pub settings: SolverSettings,
    pub seeds: Vec<u64>,
    pub max_queries: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Grid of experiments. Every list is crossed with every other; `eps`
/// applies to the ellipsoid solvers and `horizon` to regret-nv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub problems: Vec<String>,
    pub solvers: Vec<String>,
    pub n: Vec<usize>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default, alias = "T")]
    pub horizon: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Fixes the instance across seeds when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// One grid cell: everything except the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: ValidProblem,
    pub settings: SolverSettings,
}

impl Cell {
    /// Stable identifier, also used as the per-cell file name.
    pub fn id(&self) -> String {
        let budget = match self.settings {
            SolverSettings::Ellipsoid { eps, .. } => format!("eps{eps}"),
            SolverSettings::Regret { horizon, .. } => format!("T{horizon}"),
        };
        format!("{}-{}-n{}-{}", self.settings.solver(), self.problem.kind, self.problem.n, budget)
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| json_error(&e))
    }

    /// Expands the grid in a fixed order: problem, solver, n, then eps or horizon.
    pub fn cells(&self) -> Result<Vec<Cell>, ConfigError> {
        for (field, empty) in [("problems", self.problems.is_empty()), ("solvers", self.solvers.is_empty()), ("n", self.n.is_empty())] {
            if empty {
                return Err(ConfigError::new(field, "must not be empty"));
            }
        }
        check_seeds(&self.seeds)?;
        if self.max_queries == Some(0) {
            return Err(ConfigError::new("max_queries", "must be positive"));
        }
        let solvers = self.solvers.iter().map(|s| s.parse::<SolverName>()).collect::<Result<Vec<_>, _>>()?;
        let has_regret = solvers.contains(&SolverName::RegretNv);
        if solvers.iter().any(|s| *s != SolverName::RegretNv) && self.eps.is_empty() {
            return Err(ConfigError::new("eps", "required for the ellipsoid solvers"));
        }
        if has_regret && self.horizon.is_empty() {
            return Err(ConfigError::new("horizon", "required for solver regret-nv"));
        }
        let mut cells = Vec::new();
        for kind in &self.problems {
            for &solver in &solvers {
                for &n in &self.n {
                    let spec = ProblemSpec { kind: kind.clone(), n, seed: self.instance_seed, domain: None, parameters: None };
                    let problem = ValidProblem::new(&spec)?;
                    if solver == SolverName::RegretNv {
                        for &t in &self.horizon {
                            let settings = SolverSettings::new(solver, None, Some(t), self.delta, self.sigma)?;
                            cells.push(Cell { problem: problem.clone(), settings });
                        }
                    } else {
                        for &eps in &self.eps {
                            let settings = SolverSettings::new(solver, Some(eps), None, None, None)?;
                            cells.push(Cell { problem: problem.clone(), settings });
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// Parses `"3"`, `"1,2,5"` or a half-open range `"0..5"`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, ConfigError> {
    let bad = || ConfigError::new("seeds", format!("cannot parse '{s}' (use 7, 1,2,3 or 0..5)"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b <= a {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::from_json(r#"{"problem": {"kind": "quadratic", "n": 2, "seed": 7}, "solver": "dp", "eps": 0.01}"#).unwrap()
    }

    #[test]
    fn missing_eps_names_the_field() {
        let mut c = base();
        c.eps = None;
        let e = c.validate().unwrap_err();
        assert_eq!(e.field, "eps");
    }

    #[test]
    fn regret_requires_its_fields() {
        let mut c = base();
        c.solver = "regret-nv".into();
        assert_eq!(c.validate().unwrap_err().field, "eps");
        c.eps = None;
        c.horizon = Some(1000);
        assert_eq!(c.validate().unwrap_err().field, "delta");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json(r#"{"problem": {"kind": "quadratic", "n": 2}, "solver": "dp", "epsilon": 0.1}"#).unwrap_err();
        assert_eq!(e.field, "epsilon");
        let e = ExperimentConfig::from_json(r#"{"solver": "dp", "eps": 0.1}"#).unwrap_err();
        assert_eq!(e.field, "problem");
    }

    #[test]
    fn parameters_are_checked_per_kind() {
        let mut c = base();
        c.problem.parameters = Some(ParametersSpec { mu: Some(0.1), ..Default::default() });
        assert_eq!(c.validate().unwrap_err().field, "problem.parameters.mu");
        c.problem.parameters =
            Some(ParametersSpec { q: Some(vec![vec![1.0, 0.0], vec![0.0]]), minimizer: Some(vec![0.0, 0.0]), ..Default::default() });
        assert_eq!(c.validate().unwrap_err().field, "problem.parameters.q[1]");
    }

    #[test]
    fn explicit_instance_is_built() {
        let mut c = base();
        c.problem.parameters =
            Some(ParametersSpec { q: Some(vec![vec![1.0, 0.0], vec![0.0, 4.0]]), minimizer: Some(vec![0.1, -0.2]), ..Default::default() });
        let p = c.validate().unwrap().problem.instance(0).unwrap();
        assert_eq!(p.smoothness(), 4.0);
        assert_eq!(p.name(), "custom-quadratic-n2");
    }

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("3..3").is_err());
    }

    #[test]
    fn grid_cardinality() {
        let s = SweepConfig::from_json(
            r#"{"problems": ["quadratic"], "solvers": ["dp", "comparator"], "n": [2, 3, 5], "eps": [0.01], "seeds": [0, 1, 2, 3, 4]}"#,
        )
        .unwrap();
        assert_eq!(s.cells().unwrap().len() * s.seeds.len(), 30);
    }
}

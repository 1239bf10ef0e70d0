//! The four sub-zeroth-order oracles with query counting, an optional
//! budget and seeded Gaussian noise.

use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::all_finite;
use crate::problems::ProblemInstance;
use crate::{Sign, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    /// Sign of a directional derivative.
    DirectionalPreference,
    /// Which of two points has the smaller value.
    Comparator,
    /// Exact function value.
    Value,
    /// Function value plus `N(0, sigma^2)` noise.
    NoisyValue,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::DirectionalPreference => "directional-preference",
            OracleKind::Comparator => "comparator",
            OracleKind::Value => "value",
            OracleKind::NoisyValue => "noisy-value",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// A query point lies outside the domain.
    Infeasible {
        margin: f64,
    },
    BudgetExhausted {
        budget: u64,
    },
    WrongKind {
        expected: OracleKind,
        actual: OracleKind,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    InvalidDirection,
    InvalidSigma {
        sigma: f64,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Infeasible { margin } => {
                write!(f, "query point outside the domain (signed margin {margin:e})")
            }
            OracleError::BudgetExhausted { budget } => write!(f, "query budget of {budget} exhausted"),
            OracleError::WrongKind { expected, actual } => {
                write!(f, "{actual} oracle cannot answer {expected} queries")
            }
            OracleError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            OracleError::InvalidDirection => f.write_str("direction must be finite and nonzero"),
            OracleError::InvalidSigma { sigma } => write!(f, "noise scale {sigma} must be finite and nonnegative"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Oracle access to one problem instance. Each successful query increments
/// the counter by one; failed queries leave it untouched.
#[derive(Debug, Clone)]
pub struct Oracle<'p> {
    kind: OracleKind,
    problem: &'p ProblemInstance,
    sigma: f64,
    seed: u64,
    rng: ChaCha8Rng,
    queries: u64,
    budget: Option<u64>,
}

impl<'p> Oracle<'p> {
    fn with_kind(kind: OracleKind, problem: &'p ProblemInstance, sigma: f64, seed: u64) -> Self {
        Oracle { kind, problem, sigma, seed, rng: ChaCha8Rng::seed_from_u64(seed), queries: 0, budget: None }
    }

    pub fn directional_preference(problem: &'p ProblemInstance) -> Self {
        Oracle::with_kind(OracleKind::DirectionalPreference, problem, 0.0, 0)
    }

    pub fn comparator(problem: &'p ProblemInstance) -> Self {
        Oracle::with_kind(OracleKind::Comparator, problem, 0.0, 0)
    }

    pub fn value(problem: &'p ProblemInstance) -> Self {
        Oracle::with_kind(OracleKind::Value, problem, 0.0, 0)
    }

    pub fn noisy_value(problem: &'p ProblemInstance, sigma: f64, seed: u64) -> Result<Self, OracleError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(OracleError::InvalidSigma { sigma });
        }
        Ok(Oracle::with_kind(OracleKind::NoisyValue, problem, sigma, seed))
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn problem(&self) -> &'p ProblemInstance {
        self.problem
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Queries left before the budget is exhausted, `None` without a budget.
    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.queries)
    }

    fn admit(&self, kind: OracleKind, points: &[&Vector]) -> Result<(), OracleError> {
        if kind != self.kind {
            return Err(OracleError::WrongKind { expected: kind, actual: self.kind });
        }
        if let Some(budget) = self.budget {
            if self.queries >= budget {
                return Err(OracleError::BudgetExhausted { budget });
            }
        }
        let domain = self.problem.domain();
        for x in points {
            if x.len() != domain.dim() {
                return Err(OracleError::DimensionMismatch { expected: domain.dim(), found: x.len() });
            }
            if !domain.contains(x) {
                return Err(OracleError::Infeasible { margin: domain.margin(x) });
            }
        }
        Ok(())
    }

    /// `-1` iff `<grad f(x), y> < 0`, `+1` otherwise.
    pub fn query_dp(&mut self, x: &Vector, y: &Vector) -> Result<Sign, OracleError> {
        self.admit(OracleKind::DirectionalPreference, &[x])?;
        if y.len() != x.len() {
            return Err(OracleError::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        if !all_finite(y) || y.norm() == 0.0 {
            return Err(OracleError::InvalidDirection);
        }
        self.queries += 1;
        Ok(Sign::of(self.problem.gradient(x).dot(y)))
    }

    /// `-1` iff `f(x) >= f(y)`, `+1` otherwise.
    pub fn query_comparator(&mut self, x: &Vector, y: &Vector) -> Result<Sign, OracleError> {
        self.admit(OracleKind::Comparator, &[x, y])?;
        self.queries += 1;
        Ok(if self.problem.value(x) >= self.problem.value(y) { Sign::Minus } else { Sign::Plus })
    }

    pub fn query_value(&mut self, x: &Vector) -> Result<f64, OracleError> {
        self.admit(OracleKind::Value, &[x])?;
        self.queries += 1;
        Ok(self.problem.value(x))
    }

    /// `f(x) + sigma Z` with `Z` standard normal from the seeded stream.
    pub fn query_noisy_value(&mut self, x: &Vector) -> Result<f64, OracleError> {
        self.admit(OracleKind::NoisyValue, &[x])?;
        self.queries += 1;
        let f = self.problem.value(x);
        if self.sigma == 0.0 {
            return Ok(f);
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Ok(f + self.sigma * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic, Domain};
    use crate::Matrix;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn half_norm() -> ProblemInstance {
        let dom = Domain::ball(Vector::zeros(2), 2.0).unwrap();
        make_quadratic(Matrix::identity(2, 2), Vector::zeros(2), dom).unwrap()
    }

    #[test]
    fn dp_examples() {
        let p = half_norm();
        let mut o = Oracle::directional_preference(&p);
        assert_eq!(o.query_dp(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap(), Sign::Minus);
        assert_eq!(o.query_dp(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), Sign::Plus);
        assert_eq!(o.queries(), 2);
        assert_eq!(o.query_dp(&v(&[1.0, 0.0]), &v(&[0.0, 0.0])), Err(OracleError::InvalidDirection));
        assert!(matches!(o.query_dp(&v(&[3.0, 0.0]), &v(&[1.0, 0.0])), Err(OracleError::Infeasible { .. })));
        assert_eq!(o.queries(), 2);
    }

    #[test]
    fn comparator_and_value_examples() {
        let p = half_norm();
        let mut c = Oracle::comparator(&p);
        let x = v(&[0.3, 0.4]);
        assert_eq!(c.query_comparator(&x, &x).unwrap(), Sign::Minus);
        assert_eq!(c.query_comparator(&Vector::zeros(2), &v(&[1.0, 0.0])).unwrap(), Sign::Plus);
        let mut o = Oracle::value(&p);
        assert_eq!(o.query_value(&Vector::zeros(2)).unwrap(), 0.0);
        assert_eq!(o.query_value(&v(&[1.0, 1.0])).unwrap(), 1.0);
        assert_eq!(o.query_value(&x).unwrap().to_bits(), p.value(&x).to_bits());
        assert!(matches!(o.query_dp(&x, &x), Err(OracleError::WrongKind { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let p = half_norm();
        let mut o = Oracle::value(&p).with_budget(3);
        for _ in 0..3 {
            o.query_value(&Vector::zeros(2)).unwrap();
        }
        assert_eq!(o.query_value(&Vector::zeros(2)), Err(OracleError::BudgetExhausted { budget: 3 }));
        assert_eq!(o.queries(), 3);
        assert_eq!(o.remaining(), Some(0));
    }

    #[test]
    fn noiseless_noisy_oracle_is_exact() {
        let p = half_norm();
        let mut o = Oracle::noisy_value(&p, 0.0, 9).unwrap();
        let x = v(&[0.5, -0.25]);
        assert_eq!(o.query_noisy_value(&x).unwrap(), p.value(&x));
        assert!(Oracle::noisy_value(&p, -1.0, 0).is_err());
    }

    #[test]
    fn noise_moments() {
        let p = half_norm();
        let sigma = 0.3;
        let mut o = Oracle::noisy_value(&p, sigma, 42).unwrap();
        let x = v(&[1.0, 0.0]);
        let n = 100_000;
        let draws: alloc::vec::Vec<f64> = (0..n).map(|_| o.query_noisy_value(&x).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() <= 4.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.05);
    }

    #[test]
    fn replay_is_deterministic() {
        let p = half_norm();
        let run = || {
            let mut o = Oracle::noisy_value(&p, 1.0, 5).unwrap();
            (0..10).map(|_| o.query_noisy_value(&Vector::zeros(2)).unwrap().to_bits()).collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}

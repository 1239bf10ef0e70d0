//! Convex domains, smooth convex objectives with known constants, and a
//! seeded generator for the benchmark suite.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Cholesky, SymmetricEigen};
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Ellipsoid, GeometryError, Halfspace};
use crate::linalg::{all_finite, all_finite_matrix, unit_vector};
use crate::{Matrix, Vector};

/// Relative slack allowed by domain membership tests.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemError {
    DimensionMismatch { expected: usize, found: usize },
    DimensionTooSmall { n: usize },
    NonFinite,
    InvalidParameter { name: &'static str, value: f64 },
    DegenerateDomain,
    NotPositiveDefinite { min_eigenvalue: f64 },
    MinimizerOutside,
    InteriorViolated { eps: f64, radius: f64, margin: f64 },
    ReferenceRunFailed { gradient_norm: f64 },
    EmptyDirections,
    ValidationFailed { check: &'static str, sample: usize, excess: f64 },
    Geometry(GeometryError),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ProblemError::*;
        match self {
            DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            DimensionTooSmall { n } => write!(f, "dimension {n} is below the minimum of 2"),
            NonFinite => f.write_str("non-finite problem data"),
            InvalidParameter { name, value } => write!(f, "invalid value {value} for {name}"),
            DegenerateDomain => f.write_str("domain has zero radius or width"),
            NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            MinimizerOutside => f.write_str("minimizer lies outside the domain"),
            InteriorViolated { eps, radius, margin } => write!(
                f,
                "interior condition violated for eps = {eps}: ball of radius {radius} around the minimizer \
                 needs margin {radius} but the domain leaves {margin}"
            ),
            ReferenceRunFailed { gradient_norm } => {
                write!(f, "reference minimization did not converge (gradient norm {gradient_norm:e})")
            }
            EmptyDirections => f.write_str("log-sum-exp needs at least one direction"),
            ValidationFailed { check, sample, excess } => {
                write!(f, "validation check '{check}' failed at sample {sample} (excess {excess:e})")
            }
            Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ProblemError {}

impl From<GeometryError> for ProblemError {
    fn from(e: GeometryError) -> Self {
        ProblemError::Geometry(e)
    }
}

/// Compact convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
}

impl Domain {
    pub fn ball(center: Vector, radius: f64) -> Result<Self, ProblemError> {
        if !all_finite(&center) || !radius.is_finite() {
            return Err(ProblemError::NonFinite);
        }
        if center.len() < 2 {
            return Err(ProblemError::DimensionTooSmall { n: center.len() });
        }
        if radius <= 0.0 {
            return Err(ProblemError::DegenerateDomain);
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn cube(lower: Vector, upper: Vector) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() {
            return Err(ProblemError::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if !all_finite(&lower) || !all_finite(&upper) {
            return Err(ProblemError::NonFinite);
        }
        if lower.len() < 2 {
            return Err(ProblemError::DimensionTooSmall { n: lower.len() });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| u <= l) {
            return Err(ProblemError::DegenerateDomain);
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lower, .. } => lower.len(),
        }
    }

    pub fn center(&self) -> Vector {
        match self {
            Domain::Ball { center, .. } => center.clone(),
            Domain::Box { lower, upper } => (lower + upper) * 0.5,
        }
    }

    /// Radius of the smallest ball around [`Domain::center`] containing the domain.
    pub fn radius(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => *radius,
            Domain::Box { lower, upper } => (upper - lower).norm() * 0.5,
        }
    }

    fn scale(&self) -> f64 {
        self.radius() + self.center().amax()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.len() != self.dim() || !all_finite(x) {
            return false;
        }
        let tol = FEASIBILITY_TOL * self.scale().max(1.0);
        match self {
            Domain::Ball { center, radius } => (x - center).norm() <= radius + tol,
            Domain::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper.iter())).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
        }
    }

    /// Largest distance from `x` to a point of the domain.
    pub fn max_distance_from(&self, x: &Vector) -> f64 {
        match self {
            Domain::Ball { center, radius } => (x - center).norm() + radius,
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(v, (l, u))| {
                    let d = (v - l).abs().max((u - v).abs());
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Distance from `x` to the complement of the domain (negative outside).
    pub fn margin(&self, x: &Vector) -> f64 {
        match self {
            Domain::Ball { center, radius } => radius - (x - center).norm(),
            Domain::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper.iter())).map(|(v, (l, u))| (v - l).min(u - v)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// The domain halfspace that cuts deepest into `e`, measured as relative
    /// depth (see [`Halfspace::depth_in`]). Returns it only when it intersects
    /// the concentric copy of `e` scaled by `ratio`, i.e. when that inner
    /// ellipsoid is not contained in the domain.
    pub fn deepest_cut(&self, e: &Ellipsoid, ratio: f64) -> Option<(Halfspace, f64)> {
        let best = match self {
            Domain::Box { lower, upper } => {
                let n = lower.len();
                let mut best: Option<(Halfspace, f64)> = None;
                for i in 0..n {
                    for (sign, offset) in [(1.0, upper[i]), (-1.0, -lower[i])] {
                        let h = Halfspace { normal: unit_vector(n, i) * sign, offset };
                        let depth = h.depth_in(e);
                        if best.as_ref().is_none_or(|(_, d)| depth > *d) {
                            best = Some((h, depth));
                        }
                    }
                }
                best
            }
            Domain::Ball { center, radius } => {
                let z = farthest_point(&e.scaled(ratio), center);
                let diff = &z - center;
                let dist = diff.norm();
                if dist <= *radius || dist == 0.0 {
                    return None;
                }
                let normal = diff / dist;
                let offset = normal.dot(center) + radius;
                let h = Halfspace { normal, offset };
                let depth = h.depth_in(e);
                Some((h, depth))
            }
        }?;
        if best.1 > -ratio {
            Some(best)
        } else {
            None
        }
    }

    /// Image of the domain under `x -> factor * x`.
    pub fn scaled(&self, factor: f64) -> Domain {
        match self {
            Domain::Ball { center, radius } => Domain::Ball { center: center * factor, radius: radius * factor },
            Domain::Box { lower, upper } => Domain::Box { lower: lower * factor, upper: upper * factor },
        }
    }

    /// Uniform sample from the domain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            Domain::Ball { center, radius } => {
                let n = center.len();
                let mut g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                while g.norm() == 0.0 {
                    g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                }
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                center + g.normalize() * r
            }
            Domain::Box { lower, upper } => Vector::from_fn(lower.len(), |i, _| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>()),
        }
    }
}

/// Point of `e` farthest from `c`.
fn farthest_point(e: &Ellipsoid, c: &Vector) -> Vector {
    // maximize |w + M u| over |u| <= 1 with M = A^{1/2}, in the eigenbasis of A
    let eig = e.eigen();
    let v = &eig.eigenvectors;
    let m: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let w = v.transpose() * (e.center() - c);
    let n = m.len();
    let top = (0..n).fold(0, |b, i| if m[i] > m[b] { i } else { b });
    let mmax = m[top];
    let wn = w.norm();
    let mut u = Vector::zeros(n);
    let near_top: Vec<bool> = m.iter().map(|mi| mi * mi >= mmax * mmax * (1.0 - 1e-12)).collect();
    let top_weight: f64 = (0..n).filter(|&i| near_top[i]).map(|i| w[i] * w[i]).sum::<f64>().sqrt();
    if wn == 0.0 || top_weight <= 1e-14 * wn.max(mmax) {
        // degenerate case: fill the top eigendirection after the others
        let mut norm2 = 0.0;
        for i in 0..n {
            if !near_top[i] {
                u[i] = m[i] * w[i] / (mmax * mmax - m[i] * m[i]);
                norm2 += u[i] * u[i];
            }
        }
        if norm2 <= 1.0 {
            u[top] = (1.0 - norm2).sqrt();
        } else {
            u /= norm2.sqrt();
        }
    } else {
        let phi = |mu: f64| -> f64 { (0..n).map(|i| (m[i] * w[i] / (mu - m[i] * m[i])).powi(2)).sum() };
        let mut lo = mmax * mmax;
        let mut hi = mmax * mmax + mmax * wn * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for i in 0..n {
            u[i] = m[i] * w[i] / (hi - m[i] * m[i]);
        }
        let nu = u.norm();
        if nu > 0.0 {
            u /= nu;
        }
    }
    let mu_vec = Vector::from_fn(n, |i, _| m[i] * u[i]);
    e.center() + v * mu_vec
}

/// Smallest ellipsoid containing the domain: `E(r^2 I, c)` for a ball and
/// `E(n diag(a_i^2), c)` for a box with half-widths `a_i`.
pub fn initial_ellipsoid(d: &Domain) -> Result<Ellipsoid, ProblemError> {
    match d {
        Domain::Ball { center, radius } => {
            if *radius <= 0.0 {
                return Err(ProblemError::DegenerateDomain);
            }
            Ok(Ellipsoid::ball(center.clone(), *radius)?)
        }
        Domain::Box { lower, upper } => {
            let n = lower.len() as f64;
            let half = (upper - lower) * 0.5;
            if half.iter().any(|h| *h <= 0.0) {
                return Err(ProblemError::DegenerateDomain);
            }
            let diag = half.map(|h| n * h * h);
            Ok(Ellipsoid::new(Matrix::from_diagonal(&diag), d.center())?)
        }
    }
}

/// Smooth convex objective with analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `(x - x*)^T Q (x - x*) / 2`
    Quadratic { q: Matrix, minimizer: Vector },
    /// `t ln sum_i exp(<a_i, x> / t)`
    LogSumExp { directions: Vec<Vector>, temperature: f64 },
    /// `sqrt(|x - x*|^2 + mu^2) - mu`
    SmoothedNorm { minimizer: Vector, mu: f64 },
    /// `inner(x / factor)`
    Rescaled { inner: Box<Objective>, factor: f64 },
}

impl Objective {
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Objective::Quadratic { q, minimizer } => {
                let d = x - minimizer;
                0.5 * d.dot(&(q * &d))
            }
            Objective::LogSumExp { directions, temperature } => {
                let (m, s, _) = lse_parts(directions, *temperature, x);
                temperature * (m + s.ln())
            }
            Objective::SmoothedNorm { minimizer, mu } => {
                let d2 = (x - minimizer).norm_squared();
                // sqrt(d2 + mu^2) - mu without cancellation
                d2 / ((d2 + mu * mu).sqrt() + mu)
            }
            Objective::Rescaled { inner, factor } => inner.value(&(x / *factor)),
        }
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        match self {
            Objective::Quadratic { q, minimizer } => q * (x - minimizer),
            Objective::LogSumExp { directions, temperature } => {
                let (_, s, w) = lse_parts(directions, *temperature, x);
                let mut g = Vector::zeros(x.len());
                for (a, wi) in directions.iter().zip(w) {
                    g += a * (wi / s);
                }
                g
            }
            Objective::SmoothedNorm { minimizer, mu } => {
                let d = x - minimizer;
                let r = (d.norm_squared() + mu * mu).sqrt();
                d / r
            }
            Objective::Rescaled { inner, factor } => inner.gradient(&(x / *factor)) / *factor,
        }
    }

    fn hessian(&self, x: &Vector) -> Matrix {
        let n = x.len();
        match self {
            Objective::Quadratic { q, .. } => q.clone(),
            Objective::LogSumExp { directions, temperature } => {
                let (_, s, w) = lse_parts(directions, *temperature, x);
                let g = self.gradient(x);
                let mut h = Matrix::zeros(n, n);
                for (a, wi) in directions.iter().zip(w) {
                    h += a * a.transpose() * (wi / s);
                }
                (h - &g * g.transpose()) / *temperature
            }
            Objective::SmoothedNorm { minimizer, mu } => {
                let d = x - minimizer;
                let r = (d.norm_squared() + mu * mu).sqrt();
                (Matrix::identity(n, n) - &d * d.transpose() / (r * r)) / r
            }
            Objective::Rescaled { inner, factor } => inner.hessian(&(x / *factor)) / (factor * factor),
        }
    }
}

/// Max-shifted pieces of log-sum-exp: `(max z, sum exp(z - max), exp(z_i - max))`.
fn lse_parts(directions: &[Vector], t: f64, x: &Vector) -> (f64, f64, Vec<f64>) {
    let z: Vec<f64> = directions.iter().map(|a| a.dot(x) / t).collect();
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|zi| (zi - m).exp()).collect();
    let s = w.iter().sum();
    (m, s, w)
}

/// Where the stored optimum value comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    ClosedForm,
    /// Damped Newton run to a gradient norm of at most `1e-10`.
    ReferenceRun {
        iterations: usize,
        gradient_norm: f64,
    },
}

/// A smooth convex problem over a compact convex domain together with the
/// constants the solvers rely on. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    name: String,
    objective: Objective,
    domain: Domain,
    lipschitz: f64,
    smoothness: f64,
    optimum_value: f64,
    minimizer: Vector,
    provenance: Provenance,
}

impl ProblemInstance {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Lipschitz constant of `f` on the domain.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Smoothness constant `beta`.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    /// `R(C)`, see [`Domain::radius`].
    pub fn radius(&self) -> f64 {
        self.domain.radius()
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    pub fn minimizer(&self) -> &Vector {
        &self.minimizer
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.objective.gradient(x)
    }

    pub fn suboptimality(&self, x: &Vector) -> f64 {
        self.value(x) - self.optimum_value
    }

    /// Checks that the ball of radius `sqrt(eps / L)` around the minimizer
    /// lies in the domain.
    pub fn ensure_interior(&self, eps: f64) -> Result<(), ProblemError> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(ProblemError::InvalidParameter { name: "eps", value: eps });
        }
        let radius = (eps / self.lipschitz).sqrt();
        let margin = self.domain.margin(&self.minimizer);
        if margin < radius {
            return Err(ProblemError::InteriorViolated { eps, radius, margin });
        }
        Ok(())
    }
}

fn check_point(x: &Vector, n: usize) -> Result<(), ProblemError> {
    if x.len() != n {
        return Err(ProblemError::DimensionMismatch { expected: n, found: x.len() });
    }
    if !all_finite(x) {
        return Err(ProblemError::NonFinite);
    }
    Ok(())
}

/// `f(x) = (x - x*)^T Q (x - x*) / 2` with `beta = lambda_max(Q)` and
/// `L = lambda_max(Q) max_{x in C} |x - x*|`.
pub fn make_quadratic(q: Matrix, minimizer: Vector, domain: Domain) -> Result<ProblemInstance, ProblemError> {
    let n = domain.dim();
    check_point(&minimizer, n)?;
    if q.nrows() != n || q.ncols() != n {
        return Err(ProblemError::DimensionMismatch { expected: n, found: q.nrows() });
    }
    if !all_finite_matrix(&q) {
        return Err(ProblemError::NonFinite);
    }
    let asym = (&q - q.transpose()).amax();
    if asym > 1e-12 * q.amax() {
        return Err(ProblemError::InvalidParameter { name: "q (asymmetry)", value: asym });
    }
    let eig = SymmetricEigen::new(q.clone());
    let (min, max) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if min <= 0.0 {
        return Err(ProblemError::NotPositiveDefinite { min_eigenvalue: min });
    }
    if !domain.contains(&minimizer) {
        return Err(ProblemError::MinimizerOutside);
    }
    let lipschitz = max * domain.max_distance_from(&minimizer);
    Ok(ProblemInstance {
        name: "quadratic".to_string(),
        objective: Objective::Quadratic { q, minimizer: minimizer.clone() },
        domain,
        lipschitz,
        smoothness: max,
        optimum_value: 0.0,
        minimizer,
        provenance: Provenance::ClosedForm,
    })
}

/// `f(x) = t ln sum_i exp(<a_i, x> / t)` with `L = max |a_i|` and
/// `beta = max |a_i|^2 / t`. The optimum comes from a reference Newton run
/// started at the domain center.
pub fn make_logsumexp(directions: Vec<Vector>, temperature: f64, domain: Domain) -> Result<ProblemInstance, ProblemError> {
    let n = domain.dim();
    if directions.is_empty() {
        return Err(ProblemError::EmptyDirections);
    }
    for a in &directions {
        check_point(a, n)?;
    }
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(ProblemError::InvalidParameter { name: "temperature", value: temperature });
    }
    let amax = directions.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let objective = Objective::LogSumExp { directions, temperature };
    let (minimizer, iterations, gradient_norm) = reference_minimize(&objective, &domain.center())?;
    if !domain.contains(&minimizer) {
        return Err(ProblemError::MinimizerOutside);
    }
    Ok(ProblemInstance {
        name: "logsumexp".to_string(),
        optimum_value: objective.value(&minimizer),
        objective,
        domain,
        lipschitz: amax,
        smoothness: amax * amax / temperature,
        minimizer,
        provenance: Provenance::ReferenceRun { iterations, gradient_norm },
    })
}

/// `f(x) = sqrt(|x - x*|^2 + mu^2) - mu` with `beta = 1 / mu` and
/// `L = D / sqrt(D^2 + mu^2)` for the largest distance `D` from `x*` to the domain.
pub fn make_smoothed_norm(minimizer: Vector, mu: f64, domain: Domain) -> Result<ProblemInstance, ProblemError> {
    let n = domain.dim();
    check_point(&minimizer, n)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ProblemError::InvalidParameter { name: "mu", value: mu });
    }
    if !domain.contains(&minimizer) {
        return Err(ProblemError::MinimizerOutside);
    }
    let dmax = domain.max_distance_from(&minimizer);
    Ok(ProblemInstance {
        name: "smoothed-norm".to_string(),
        objective: Objective::SmoothedNorm { minimizer: minimizer.clone(), mu },
        domain,
        lipschitz: dmax / (dmax * dmax + mu * mu).sqrt(),
        smoothness: 1.0 / mu,
        optimum_value: 0.0,
        minimizer,
        provenance: Provenance::ClosedForm,
    })
}

/// Instance over `sqrt(beta) C` with `f'(sqrt(beta) x) = f(x)`, so that
/// `beta' = 1`, `L' = L / sqrt(beta)` and `R' = sqrt(beta) R`. A minimizer
/// `x'` of the new instance maps back through `x = x' / sqrt(beta)`.
pub fn beta_rescale(p: &ProblemInstance) -> ProblemInstance {
    let factor = p.smoothness.sqrt();
    ProblemInstance {
        name: p.name.clone(),
        objective: Objective::Rescaled { inner: Box::new(p.objective.clone()), factor },
        domain: p.domain.scaled(factor),
        lipschitz: p.lipschitz / factor,
        smoothness: 1.0,
        optimum_value: p.optimum_value,
        minimizer: &p.minimizer * factor,
        provenance: p.provenance.clone(),
    }
}

/// Damped Newton with backtracking, used to pin down optima without a
/// closed form. Returns the point, the iteration count and the final gradient norm.
fn reference_minimize(f: &Objective, start: &Vector) -> Result<(Vector, usize, f64), ProblemError> {
    const TARGET: f64 = 1e-12;
    const ACCEPT: f64 = 1e-10;
    let n = start.len();
    let mut x = start.clone();
    let mut fx = f.value(&x);
    let mut g = f.gradient(&x);
    let mut iterations = 0;
    while iterations < 500 && g.norm() > TARGET {
        iterations += 1;
        let h = f.hessian(&x);
        let mut damping = 0.0;
        let step = loop {
            let reg = &h + Matrix::identity(n, n) * damping;
            if let Some(ch) = Cholesky::new(reg) {
                break ch.solve(&g);
            }
            damping = if damping == 0.0 { 1e-12 } else { damping * 10.0 };
            if damping > 1e12 {
                return Err(ProblemError::ReferenceRunFailed { gradient_norm: g.norm() });
            }
        };
        let slope = g.dot(&step);
        let mut a = 1.0;
        let mut moved = false;
        while a > 1e-20 {
            let cand = &x - &step * a;
            let fc = f.value(&cand);
            // near the optimum values stop resolving, so a smaller gradient also counts
            if fc <= fx - 1e-4 * a * slope || f.gradient(&cand).norm() < g.norm() {
                x = cand;
                fx = fc;
                moved = true;
                break;
            }
            a *= 0.5;
        }
        g = f.gradient(&x);
        if !moved {
            break;
        }
    }
    let gn = g.norm();
    if gn > ACCEPT || !all_finite(&x) {
        return Err(ProblemError::ReferenceRunFailed { gradient_norm: gn });
    }
    Ok((x, iterations, gn))
}

/// Families of the benchmark suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Quadratic,
    LogSumExp,
    SmoothedNorm,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::Quadratic, ProblemKind::LogSumExp, ProblemKind::SmoothedNorm];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::LogSumExp => "logsumexp",
            ProblemKind::SmoothedNorm => "smoothed-norm",
        }
    }

    fn salt(self) -> u64 {
        match self {
            ProblemKind::Quadratic => 0x51ab_0001,
            ProblemKind::LogSumExp => 0x51ab_0002,
            ProblemKind::SmoothedNorm => 0x51ab_0003,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadratic" => Ok(ProblemKind::Quadratic),
            "logsumexp" | "log-sum-exp" => Ok(ProblemKind::LogSumExp),
            "smoothed-norm" | "smoothed_norm" => Ok(ProblemKind::SmoothedNorm),
            _ => Err(ProblemError::InvalidParameter { name: "kind", value: f64::NAN }),
        }
    }
}

/// Largest distance of a suite minimizer from the center of its unit-ball domain.
pub const SUITE_OFFSET: f64 = 0.4;

/// Seeded instance of the benchmark suite in dimension `n`. Every instance
/// lives on a unit ball whose center is at most [`SUITE_OFFSET`] away from
/// the minimizer.
///
/// * quadratic: random rotation of `diag(1, ..., 10)` with log-uniform interior eigenvalues;
/// * log-sum-exp: directions `±e_j` perturbed by up to `0.15` per coordinate, `t = 0.5`;
/// * smoothed norm: `mu = 0.1`.
pub fn suite_instance(kind: ProblemKind, n: usize, seed: u64) -> Result<ProblemInstance, ProblemError> {
    if n < 2 {
        return Err(ProblemError::DimensionTooSmall { n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ kind.salt().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let offset = random_in_ball(&mut rng, n, SUITE_OFFSET);
    let p = match kind {
        ProblemKind::Quadratic => {
            let rot = random_rotation(&mut rng, n);
            let eigs = Vector::from_fn(n, |i, _| match i {
                0 => 1.0,
                i if i == n - 1 => 10.0,
                _ => 10f64.powf(rng.random::<f64>()),
            });
            let mut q = &rot * Matrix::from_diagonal(&eigs) * rot.transpose();
            crate::linalg::symmetrize(&mut q);
            make_quadratic(q, offset, Domain::ball(Vector::zeros(n), 1.0)?)?
        }
        ProblemKind::LogSumExp => {
            let mut dirs = Vec::with_capacity(2 * n);
            for j in 0..n {
                for s in [1.0, -1.0] {
                    let noise = Vector::from_fn(n, |_, _| 0.15 * (2.0 * rng.random::<f64>() - 1.0));
                    dirs.push(unit_vector(n, j) * s + noise);
                }
            }
            let objective = Objective::LogSumExp { directions: dirs.clone(), temperature: 0.5 };
            let (xstar, _, _) = reference_minimize(&objective, &Vector::zeros(n))?;
            make_logsumexp(dirs, 0.5, Domain::ball(&xstar - &offset, 1.0)?)?
        }
        ProblemKind::SmoothedNorm => make_smoothed_norm(offset, 0.1, Domain::ball(Vector::zeros(n), 1.0)?)?,
    };
    Ok(p.with_name(alloc::format!("{}-n{}-s{}", kind.as_str(), n, seed)))
}

fn random_in_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vector {
    let g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    if g.norm() == 0.0 {
        return Vector::zeros(n);
    }
    g.normalize() * r
}

fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix {
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        for _ in 0..2 {
            for c in &cols {
                v -= c * c.dot(&v);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / norm);
        }
    }
    Matrix::from_columns(&cols)
}

/// Summary of [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_gradient_norm: f64,
    pub max_smoothness_ratio: f64,
    pub max_gradient_error: f64,
}

/// Checks the stated constants of an instance on `samples` uniform points
/// (and random partners) of its domain: `|grad f| <= L`, the smoothness
/// inequality with `beta`, agreement of the gradient with central finite
/// differences, `f >= f*`, and convexity along the sampled segments.
pub fn validate_instance(p: &ProblemInstance, samples: usize, seed: u64) -> Result<ValidationReport, ProblemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let beta = p.smoothness();
    let mut report = ValidationReport { samples, max_gradient_norm: 0.0, max_smoothness_ratio: 0.0, max_gradient_error: 0.0 };
    let fail = |check, sample, excess| Err(ProblemError::ValidationFailed { check, sample, excess });
    for k in 0..samples {
        let x = p.domain.sample(&mut rng);
        let y = p.domain.sample(&mut rng);
        let fx = p.value(&x);
        let fy = p.value(&y);
        let gx = p.gradient(&x);
        let scale = 1.0 + fx.abs();
        let gn = gx.norm();
        report.max_gradient_norm = report.max_gradient_norm.max(gn);
        if gn > p.lipschitz * (1.0 + 1e-9) {
            return fail("lipschitz", k, gn - p.lipschitz);
        }
        let d = &y - &x;
        let gap = fy - fx - gx.dot(&d);
        let dd = d.norm_squared();
        if gap < -1e-10 * scale {
            return fail("convexity", k, -gap);
        }
        if dd > 0.0 {
            report.max_smoothness_ratio = report.max_smoothness_ratio.max(2.0 * gap / dd / beta);
        }
        if gap > beta * dd / 2.0 + 1e-10 * scale {
            return fail("smoothness", k, gap - beta * dd / 2.0);
        }
        if fx < p.optimum_value - 1e-9 * scale {
            return fail("optimum", k, p.optimum_value - fx);
        }
        let h = 1e-5;
        let mut err: f64 = 0.0;
        for j in 0..n {
            let e = unit_vector(n, j) * h;
            let fd = (p.value(&(&x + &e)) - p.value(&(&x - &e))) / (2.0 * h);
            err = err.max((fd - gx[j]).abs());
        }
        report.max_gradient_error = report.max_gradient_error.max(err);
        // central differences are exact up to h^2 times third derivatives
        if err > 1e-5 * (1.0 + gn) * (1.0 + beta * beta) {
            return fail("gradient", k, err);
        }
    }
    Ok(report)
}

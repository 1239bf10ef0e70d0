//! Gradient-direction estimation by cone pruning, the comparator-based
//! derivative sign test and the bisection tournament over candidate points.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::bounds::comparator_prune_cap;
use crate::geometry::{cone_prune_geometry, orthonormal_completion, IsotropicTransform};
use crate::linalg::unit_vector;
use crate::oracles::Oracle;
use crate::{Error, Sign, Vector};

/// State after one pruning iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneStep {
    pub direction: Vector,
    pub angle: f64,
    pub unknown: usize,
    /// False while the cone carries no information yet (start, or after the
    /// lead direction turned out unknown).
    pub cone_valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneResult {
    /// Unit cone axis in isotropic coordinates.
    pub direction: Vector,
    pub final_angle: f64,
    pub unknown_directions: Vec<Vector>,
    pub iterations: usize,
    /// Set when every direction became unknown or the iteration cap was hit
    /// before the target angle.
    pub degenerate: bool,
    pub steps: Vec<PruneStep>,
}

/// Narrows a cone around `grad (f o T^{-1})(0)` with directional-preference
/// queries at the transform center until its semi-angle is at most `theta`.
/// Every iteration queries all `n` basis directions.
pub fn pd_dp(oracle: &mut Oracle<'_>, transform: &IsotropicTransform, theta: f64) -> Result<PruneResult, Error> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidArgument("theta must lie in (0, pi/2)"));
    }
    let n = transform.dim();
    let x = transform.center();
    let mut p = unit_vector(n, 0);
    let mut gamma = FRAC_PI_2;
    let mut steps = Vec::new();
    while gamma > theta {
        let basis = orthonormal_completion(&[], &p)?;
        let mut signs = Vec::with_capacity(n);
        for d in &basis {
            signs.push(oracle.query_dp(x, &transform.direction_to_original(d))?);
        }
        let cone = cone_prune_geometry(gamma, &signs, &basis)?;
        p = cone.direction;
        gamma = cone.semi_angle;
        steps.push(PruneStep { direction: p.clone(), angle: gamma, unknown: 0, cone_valid: true });
    }
    Ok(PruneResult { direction: p, final_angle: gamma, unknown_directions: Vec::new(), iterations: steps.len(), degenerate: false, steps })
}

/// Outcome of [`fdd_c`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Known(Sign),
    Unknown,
}

/// Sign of the derivative of `f o T^{-1}` at 0 along the unit vector `d`,
/// read off two comparisons at `T^{-1}(-t d)`, `T^{-1}(0)`, `T^{-1}(t d)`.
///
/// Strictly increasing values give `+1`, non-increasing values give `-1`,
/// anything else (a valley or a plateau) is unknown. A known sign is the
/// true sign whenever the derivative is nonzero; an unknown answer implies
/// `|<grad, d>| <= beta_iso t / 2` where `beta_iso <= beta` is the smoothness of
/// `f o T^{-1}`.
pub fn fdd_c(oracle: &mut Oracle<'_>, transform: &IsotropicTransform, d: &Vector, t: f64) -> Result<Derivative, Error> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument("probe step must be positive"));
    }
    let x = transform.center();
    let step = transform.direction_to_original(d) * t;
    let minus = x - &step;
    let plus = x + &step;
    let c1 = oracle.query_comparator(&minus, x)?;
    let c2 = oracle.query_comparator(x, &plus)?;
    Ok(match (c1, c2) {
        (Sign::Plus, Sign::Plus) => Derivative::Known(Sign::Plus),
        (Sign::Minus, Sign::Minus) => Derivative::Known(Sign::Minus),
        _ => Derivative::Unknown,
    })
}

/// Comparator analogue of [`pd_dp`]. Directions whose sign cannot be
/// resolved are moved, one per iteration, into the unknown set and pruning
/// continues in their orthogonal complement. Every iteration probes all `n`
/// directions (`2n` comparisons). Iterations are capped at
/// `ceil(2n ln(2 sqrt(2) n) + n)`.
pub fn pd_c(oracle: &mut Oracle<'_>, transform: &IsotropicTransform, theta: f64, t: f64) -> Result<PruneResult, Error> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidArgument("theta must lie in (0, pi/2)"));
    }
    let n = transform.dim();
    let cap = comparator_prune_cap(n);
    let mut unknown: Vec<Vector> = Vec::new();
    let mut p = unit_vector(n, 0);
    let mut gamma = FRAC_PI_2;
    let mut valid = false;
    let mut steps = Vec::new();
    while gamma > theta && unknown.len() < n && steps.len() < cap {
        let basis = orthonormal_completion(&unknown, &p)?;
        for d in &unknown {
            fdd_c(oracle, transform, d, t)?;
        }
        let mut outcomes = Vec::with_capacity(basis.len());
        for d in &basis {
            outcomes.push(fdd_c(oracle, transform, d, t)?);
        }
        if let Some(i) = outcomes.iter().position(|o| *o == Derivative::Unknown) {
            unknown.push(basis[i].clone());
            if i == 0 {
                if basis.len() > 1 {
                    p = basis[1].clone();
                }
                gamma = FRAC_PI_2;
                valid = false;
            }
        } else {
            let signs: Vec<Sign> = outcomes
                .iter()
                .map(|o| match o {
                    Derivative::Known(s) => *s,
                    Derivative::Unknown => unreachable!(),
                })
                .collect();
            if basis.len() >= 2 {
                let cone = cone_prune_geometry(gamma, &signs, &basis)?;
                p = cone.direction;
                gamma = cone.semi_angle;
            } else {
                p = &basis[0] * signs[0].as_f64();
                gamma = 0.0;
            }
            valid = true;
        }
        steps.push(PruneStep { direction: p.clone(), angle: gamma, unknown: unknown.len(), cone_valid: valid });
    }
    let all_unknown = unknown.len() == n;
    let degenerate = all_unknown || gamma > theta;
    Ok(PruneResult {
        direction: if all_unknown { unit_vector(n, 0) } else { p },
        final_angle: gamma,
        unknown_directions: unknown,
        iterations: steps.len(),
        degenerate,
        steps,
    })
}

/// Bisection tournament: repeatedly takes two points from the pool, halves
/// the segment between them towards descent (guided by directional
/// preference at the midpoint) until it is shorter than `2 eps / (L m)`, and
/// returns the final midpoint to the pool. The result is within `eps` of the
/// best input value.
pub fn compare_dp(points: &[Vector], oracle: &mut Oracle<'_>, eps: f64) -> Result<Vector, Error> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("compare_dp needs at least one point"));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive"));
    }
    let m = points.len();
    let threshold = 2.0 * eps / (oracle.problem().lipschitz() * m as f64);
    let mut pool: VecDeque<Vector> = points.iter().cloned().collect();
    while pool.len() > 1 {
        let mut left = pool.pop_front().expect("pool has two points");
        let mut right = pool.pop_front().expect("pool has two points");
        while (&right - &left).norm() > threshold {
            let mid = (&left + &right) * 0.5;
            let dir = (&right - &left) * 0.5;
            match oracle.query_dp(&mid, &dir)? {
                Sign::Minus => left = mid,
                Sign::Plus => right = mid,
            }
        }
        pool.push_back((left + right) * 0.5);
    }
    Ok(pool.pop_front().expect("pool is nonempty"))
}

//! Ellipsoids, the isotropic change of coordinates, shallow and deep cuts,
//! and the cone geometry used by pruning.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use nalgebra::{Cholesky, SymmetricEigen};
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

use crate::linalg::{all_finite, all_finite_matrix, angle_between, symmetrize, unit_vector};
use crate::{Matrix, Sign, Vector};

/// Relative asymmetry tolerated in a shape matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest `lambda_min / lambda_max` accepted before an ellipsoid is
/// considered degenerate.
pub const CONDITION_LIMIT: f64 = 1e-13;
/// Residual below which a vector is treated as lying in a span.
pub const SPAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    DimensionMismatch { expected: usize, found: usize },
    DimensionTooSmall { n: usize },
    NonFinite,
    NotSymmetric { asymmetry: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    IllConditioned { ratio: f64 },
    AngleOutOfRange { angle: f64 },
    ShallowCutTooDeep { sin_theta: f64, limit: f64 },
    EmptyIntersection { alpha: f64 },
    ZeroVector,
    NotUnit { norm: f64 },
    NotOrthogonal { dot: f64 },
    LeadInSpan { residual: f64 },
    SignCount { expected: usize, found: usize },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeometryError::*;
        match self {
            DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            DimensionTooSmall { n } => write!(f, "dimension {n} is below the minimum of 2"),
            NonFinite => f.write_str("non-finite entry"),
            NotSymmetric { asymmetry } => write!(f, "shape matrix is not symmetric (relative asymmetry {asymmetry:e})"),
            NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "shape matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            IllConditioned { ratio } => write!(f, "shape matrix is nearly degenerate (eigenvalue ratio {ratio:e})"),
            AngleOutOfRange { angle } => write!(f, "angle {angle} outside the admissible range"),
            ShallowCutTooDeep { sin_theta, limit } => {
                write!(f, "shallow cut depth {sin_theta} exceeds 1/n = {limit}")
            }
            EmptyIntersection { alpha } => {
                write!(f, "halfspace misses the ellipsoid (relative depth {alpha})")
            }
            ZeroVector => f.write_str("zero direction"),
            NotUnit { norm } => write!(f, "expected a unit vector, norm is {norm}"),
            NotOrthogonal { dot } => write!(f, "vectors are not orthogonal (inner product {dot:e})"),
            LeadInSpan { residual } => write!(f, "lead lies in the span of the fixed vectors (residual {residual:e})"),
            SignCount { expected, found } => write!(f, "expected {expected} signs, found {found}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// `E(A, c) = { x : (x - c)^T A^{-1} (x - c) <= 1 }` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    shape: Matrix,
    center: Vector,
}

impl Ellipsoid {
    pub fn new(shape: Matrix, center: Vector) -> Result<Self, GeometryError> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: shape.nrows() });
        }
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall { n });
        }
        if !all_finite_matrix(&shape) || !all_finite(&center) {
            return Err(GeometryError::NonFinite);
        }
        let scale = shape.amax();
        let asym = (&shape - shape.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(GeometryError::NotSymmetric { asymmetry: asym / scale.max(f64::MIN_POSITIVE) });
        }
        let mut shape = shape;
        symmetrize(&mut shape);
        let e = Ellipsoid { shape, center };
        let min = e.eigen().eigenvalues.min();
        if min <= 0.0 {
            return Err(GeometryError::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(e)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        let n = center.len();
        Ellipsoid::new(Matrix::identity(n, n) * (radius * radius), center)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        SymmetricEigen::new(self.shape.clone())
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigen().eigenvalues.max()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigen().eigenvalues.min()
    }

    /// `lambda_min / lambda_max`.
    pub fn condition_ratio(&self) -> f64 {
        let ev = self.eigen().eigenvalues;
        ev.min() / ev.max()
    }

    pub fn log_det(&self) -> f64 {
        self.eigen().eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// Natural log of the volume, `ln det(A) / 2 + ln V_n`.
    pub fn log_volume(&self) -> f64 {
        0.5 * self.log_det() + ln_unit_ball_volume(self.dim())
    }

    /// `(x - c)^T A^{-1} (x - c)`; at most 1 inside the ellipsoid.
    pub fn membership(&self, x: &Vector) -> f64 {
        let diff = x - &self.center;
        match Cholesky::new(self.shape.clone()) {
            Some(ch) => diff.dot(&ch.solve(&diff)),
            None => {
                let eig = self.eigen();
                let proj = eig.eigenvectors.transpose() * diff;
                proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| p * p / l).sum()
            }
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.membership(x) <= 1.0 + 1e-12
    }

    /// `sqrt(a^T A a)`: half the width of the ellipsoid along `a`, scaled by `|a|`.
    pub fn width(&self, a: &Vector) -> f64 {
        a.dot(&(&self.shape * a)).max(0.0).sqrt()
    }

    /// Same ellipsoid with the shape scaled by `factor^2`.
    pub fn scaled(&self, factor: f64) -> Ellipsoid {
        Ellipsoid { shape: &self.shape * (factor * factor), center: self.center.clone() }
    }

    pub fn isotropic(&self) -> Result<IsotropicTransform, GeometryError> {
        IsotropicTransform::new(self)
    }
}

/// Natural log of the volume of the unit ball in `R^n`.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_n = V_{n-2} 2 pi / n
    let mut acc = if n.is_multiple_of(2) { 0.0 } else { 2.0f64.ln() };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        acc += (2.0 * PI / k as f64).ln();
        k += 2;
    }
    acc
}

/// Coordinates in which an ellipsoid becomes a ball of radius `sqrt(lambda_max)`
/// around the origin: `T(x) = s A^{-1/2} (x - c)` with `s = sqrt(lambda_max(A))`.
#[derive(Debug, Clone)]
pub struct IsotropicTransform {
    sqrt_shape: Matrix,
    inv_sqrt_shape: Matrix,
    scale: f64,
    center: Vector,
}

impl IsotropicTransform {
    pub fn new(e: &Ellipsoid) -> Result<Self, GeometryError> {
        let eig = e.eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            return Err(GeometryError::NotPositiveDefinite { min_eigenvalue: min });
        }
        let ratio = min / max;
        if ratio < CONDITION_LIMIT {
            return Err(GeometryError::IllConditioned { ratio });
        }
        let v = &eig.eigenvectors;
        let sq = eig.eigenvalues.map(|l| l.sqrt());
        let inv = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
        let mut sqrt_shape = v * Matrix::from_diagonal(&sq) * v.transpose();
        let mut inv_sqrt_shape = v * Matrix::from_diagonal(&inv) * v.transpose();
        symmetrize(&mut sqrt_shape);
        symmetrize(&mut inv_sqrt_shape);
        Ok(IsotropicTransform { sqrt_shape, inv_sqrt_shape, scale: max.sqrt(), center: e.center.clone() })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Radius of the image ball, `sqrt(lambda_max)`.
    pub fn radius(&self) -> f64 {
        self.scale
    }

    pub fn lambda_max(&self) -> f64 {
        self.scale * self.scale
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn forward(&self, x: &Vector) -> Vector {
        (&self.inv_sqrt_shape * (x - &self.center)) * self.scale
    }

    pub fn inverse(&self, y: &Vector) -> Vector {
        (&self.sqrt_shape * y) / self.scale + &self.center
    }

    /// Linear part of the inverse map. A displacement `d` in isotropic
    /// coordinates corresponds to `A^{1/2} d / s` in the original space, so the
    /// directional derivative of `f o T^{-1}` along `d` is the derivative of
    /// `f` along this vector.
    pub fn direction_to_original(&self, d: &Vector) -> Vector {
        (&self.sqrt_shape * d) / self.scale
    }

    /// Maps an isotropic gradient (a normal in isotropic coordinates) to the
    /// corresponding normal in the original space, `A^{-1/2} g`.
    pub fn normal_to_original(&self, g: &Vector) -> Vector {
        &self.inv_sqrt_shape * g
    }

    /// Gradient of `f o T^{-1}` at `y` given the gradient of `f` at `T^{-1}(y)`.
    pub fn gradient_to_isotropic(&self, grad: &Vector) -> Vector {
        (&self.sqrt_shape * grad) / self.scale
    }
}

/// Ratio `vol(E') / vol(E)` of a cut through relative depth `sin(theta)`:
/// `(n^2 (1 - s^2) / (n^2 - 1))^((n-1)/2) * n (1 + s) / (n + 1)` with `s = sin(theta)`.
/// Valid for `theta` in `[-pi/2, asin(1/n)]`.
pub fn shallow_cut_volume_ratio(n: usize, theta: f64) -> Result<f64, GeometryError> {
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall { n });
    }
    let nf = n as f64;
    if !theta.is_finite() || theta < -PI / 2.0 || theta.sin() > 1.0 / nf + 1e-15 {
        return Err(GeometryError::AngleOutOfRange { angle: theta });
    }
    Ok(cut_volume_ratio(n, -theta.sin()))
}

/// Volume ratio of a cut at relative depth `alpha` (negative for shallow cuts),
/// `(n^2 (1 - alpha^2) / (n^2 - 1))^((n-1)/2) * n (1 - alpha) / (n + 1)`.
pub fn cut_volume_ratio(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    let dil = nf * nf * (1.0 - alpha * alpha) / (nf * nf - 1.0);
    dil.powf((nf - 1.0) / 2.0) * nf * (1.0 - alpha) / (nf + 1.0)
}

/// Minimum-volume ellipsoid containing `E ∩ { x : <a, x - c> <= -alpha sqrt(a^T A a) }`.
///
/// `alpha` is the relative depth: `0` is a central cut, negative values are
/// shallow cuts and positive values deep cuts. Requires `-1/n <= alpha < 1`.
pub fn cut(e: &Ellipsoid, normal: &Vector, alpha: f64) -> Result<Ellipsoid, GeometryError> {
    let n = e.dim();
    if normal.len() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, found: normal.len() });
    }
    if !all_finite(normal) || !alpha.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let nf = n as f64;
    if alpha < -1.0 / nf - 1e-15 {
        return Err(GeometryError::ShallowCutTooDeep { sin_theta: -alpha, limit: 1.0 / nf });
    }
    if alpha >= 1.0 {
        return Err(GeometryError::EmptyIntersection { alpha });
    }
    let alpha = alpha.max(-1.0 / nf);
    let aa = normal.dot(&(&e.shape * normal));
    if !(aa > 0.0) {
        return Err(GeometryError::ZeroVector);
    }
    let b = (&e.shape * normal) / aa.sqrt();
    let tau = (1.0 + nf * alpha) / (nf + 1.0);
    let delta = nf * nf * (1.0 - alpha * alpha) / (nf * nf - 1.0);
    let sigma = 2.0 * (1.0 + nf * alpha) / ((nf + 1.0) * (1.0 + alpha));
    let center = &e.center - &b * tau;
    let mut shape = (&e.shape - &b * b.transpose() * sigma) * delta;
    symmetrize(&mut shape);
    if !all_finite_matrix(&shape) || !all_finite(&center) {
        return Err(GeometryError::NonFinite);
    }
    let next = Ellipsoid { shape, center };
    let ev = next.eigen().eigenvalues;
    if ev.min() <= 0.0 {
        return Err(GeometryError::NotPositiveDefinite { min_eigenvalue: ev.min() });
    }
    Ok(next)
}

/// Shallow cut driven by a direction `g` given in the isotropic coordinates of
/// `e`: keeps every point whose image `y` satisfies `<g, y> <= sin(theta) |g| s`.
/// The result contains `E ∩ T^{-1}({ y : <g, y> <= |g| |y| sin(theta) })`.
pub fn shallow_cut(e: &Ellipsoid, g: &Vector, sin_theta: f64) -> Result<Ellipsoid, GeometryError> {
    let n = e.dim();
    if g.len() != n {
        return Err(GeometryError::DimensionMismatch { expected: n, found: g.len() });
    }
    let limit = 1.0 / n as f64;
    if !(0.0..=limit + 1e-15).contains(&sin_theta) {
        return Err(GeometryError::ShallowCutTooDeep { sin_theta, limit });
    }
    let norm = g.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(GeometryError::ZeroVector);
    }
    let t = IsotropicTransform::new(e)?;
    let a = t.normal_to_original(&(g / norm));
    cut(e, &a, -sin_theta)
}

/// `{ x : <normal, x> <= offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn contains(&self, x: &Vector) -> bool {
        self.normal.dot(x) <= self.offset
    }

    /// Relative depth of the halfspace boundary in `e`, `(<a, c> - b) / sqrt(a^T A a)`.
    /// Positive when the center violates the halfspace; at least 1 when the
    /// halfspace misses `e` entirely.
    pub fn depth_in(&self, e: &Ellipsoid) -> f64 {
        (self.normal.dot(e.center()) - self.offset) / e.width(&self.normal)
    }
}

/// Cut `e` by a halfspace. Errors with [`GeometryError::EmptyIntersection`]
/// when the halfspace misses `e`.
pub fn cut_halfspace(e: &Ellipsoid, h: &Halfspace) -> Result<Ellipsoid, GeometryError> {
    let alpha = h.depth_in(e);
    cut(e, &h.normal, alpha)
}

/// `{ w : angle(w, direction) <= semi_angle }` with a unit axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub direction: Vector,
    pub semi_angle: f64,
}

impl Cone {
    pub fn new(direction: Vector, semi_angle: f64) -> Result<Self, GeometryError> {
        let norm = direction.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(GeometryError::NotUnit { norm });
        }
        if !(0.0..=PI / 2.0).contains(&semi_angle) {
            return Err(GeometryError::AngleOutOfRange { angle: semi_angle });
        }
        Ok(Cone { direction, semi_angle })
    }

    pub fn contains(&self, w: &Vector) -> bool {
        angle_between(w, &self.direction) <= self.semi_angle + 1e-12
    }
}

/// Orthonormal basis of `span(fixed)^⊥` whose first vector is `lead`.
///
/// `fixed` must be orthonormal and `lead` a unit vector orthogonal to them.
/// Returns `n - fixed.len()` vectors; the remaining ones are Gram-Schmidt
/// completions of the standard basis vectors with the largest residuals.
pub fn orthonormal_completion(fixed: &[Vector], lead: &Vector) -> Result<Vec<Vector>, GeometryError> {
    let n = lead.len();
    if let Some(f) = fixed.iter().find(|f| f.len() != n) {
        return Err(GeometryError::DimensionMismatch { expected: n, found: f.len() });
    }
    let norm = lead.norm();
    if (norm - 1.0).abs() > SPAN_TOL {
        return Err(GeometryError::NotUnit { norm });
    }
    let residual = (lead - project(fixed, lead)).norm();
    if residual < SPAN_TOL {
        return Err(GeometryError::LeadInSpan { residual });
    }
    if let Some(dot) = fixed.iter().map(|f| f.dot(lead)).find(|d| d.abs() > SPAN_TOL) {
        return Err(GeometryError::NotOrthogonal { dot });
    }
    let mut all: Vec<Vector> = fixed.to_vec();
    all.push(lead.clone());
    let mut out = alloc::vec![lead.clone()];
    while all.len() < n {
        let (best, _) = (0..n)
            .map(|j| {
                let e = unit_vector(n, j);
                let r = &e - project(&all, &e);
                (r.clone(), r.norm())
            })
            .fold((Vector::zeros(n), -1.0), |acc, (r, nr)| if nr > acc.1 { (r, nr) } else { acc });
        // second pass removes the rounding left by the first projection
        let mut v = &best - project(&all, &best);
        v /= v.norm();
        all.push(v.clone());
        out.push(v);
    }
    Ok(out)
}

fn project(basis: &[Vector], v: &Vector) -> Vector {
    let mut p = Vector::zeros(v.len());
    for b in basis {
        p += b * b.dot(v);
    }
    p
}

/// One cone-pruning step.
///
/// `basis` is orthonormal with the current cone axis first, `signs` holds the
/// observed signs of `<grad, basis[i]>` and `gamma` is the current semi-angle.
/// With `s_0` the lead sign, the candidate set is spanned by
/// `w_0 = s_0 d_0` and `w_i = s_0 cos(gamma) d_0 + s_i sin(gamma) d_i`; the new
/// axis is their normalized sum and the new semi-angle the angle between the
/// axis and `w_1`. Needs at least two directions.
pub fn cone_prune_geometry(gamma: f64, signs: &[Sign], basis: &[Vector]) -> Result<Cone, GeometryError> {
    let m = basis.len();
    if signs.len() != m {
        return Err(GeometryError::SignCount { expected: m, found: signs.len() });
    }
    if m < 2 {
        return Err(GeometryError::SignCount { expected: 2, found: m });
    }
    if !(gamma > 0.0 && gamma <= PI / 2.0) {
        return Err(GeometryError::AngleOutOfRange { angle: gamma });
    }
    let s0 = signs[0].as_f64();
    let lead = &basis[0] * s0;
    let (sg, cg) = (gamma.sin(), gamma.cos());
    let mut sum = lead.clone();
    let mut second = None;
    for (d, s) in basis.iter().zip(signs).skip(1) {
        let w = &lead * cg + d * (s.as_f64() * sg);
        sum += &w;
        if second.is_none() {
            second = Some(w);
        }
    }
    let norm = sum.norm();
    if norm == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let direction = sum / norm;
    let semi_angle = angle_between(&direction, second.as_ref().expect("m >= 2"));
    Ok(Cone { direction, semi_angle })
}

/// Closed form of `sin(gamma') / sin(gamma)` for a prune over `m` directions
/// starting from semi-angle `gamma`.
pub fn cone_shrink_factor(m: usize, gamma: f64) -> f64 {
    let mf = m as f64;
    let c = gamma.cos();
    let num = (mf - 2.0) * (mf - 2.0) * c * c + 2.0 * (mf - 2.0) * c + mf - 1.0;
    let den = (mf - 1.0) * (mf - 2.0) * c * c + 2.0 * (mf - 1.0) * c + mf;
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn volume_ratio_examples() {
        let r0 = shallow_cut_volume_ratio(2, 0.0).unwrap();
        assert!((r0 - 0.769800).abs() < 1e-6, "{r0}");
        let r1 = shallow_cut_volume_ratio(2, 0.25f64.asin()).unwrap();
        assert!((r1 - 0.931695).abs() < 1e-6, "{r1}");
        assert!(shallow_cut_volume_ratio(2, 0.6f64.asin()).is_err());
        assert!(shallow_cut_volume_ratio(1, 0.0).is_err());
    }

    #[test]
    fn central_cut_of_unit_disc() {
        let e = Ellipsoid::ball(Vector::zeros(2), 1.0).unwrap();
        let e2 = shallow_cut(&e, &v(&[1.0, 0.0]), 0.0).unwrap();
        let c = e2.center();
        assert!((c[0] + 1.0 / 3.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        let ratio = (e2.log_det() - e.log_det()).exp().sqrt();
        assert!((ratio - 0.769800).abs() < 1e-6);
    }

    #[test]
    fn cut_det_ratio_matches_closed_form() {
        let shape = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 2.0, 0.2, 0.5, 0.2, 1.5]);
        let e = Ellipsoid::new(shape, v(&[0.3, -0.2, 1.0])).unwrap();
        for &alpha in &[-1.0 / 3.0, -0.2, 0.0, 0.4, 0.9] {
            let e2 = cut(&e, &v(&[0.2, -1.0, 0.7]), alpha).unwrap();
            let got = ((e2.log_det() - e.log_det()) / 2.0).exp();
            assert!((got - cut_volume_ratio(3, alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_round_trip() {
        let shape = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let e = Ellipsoid::new(shape, v(&[1.0, -1.0])).unwrap();
        let t = e.isotropic().unwrap();
        let x = v(&[0.4, 2.5]);
        assert!((t.inverse(&t.forward(&x)) - &x).norm() < 1e-14);
        // boundary maps to the sphere of radius sqrt(lambda_max)
        let eig = e.eigen();
        let u = eig.eigenvectors.column(0).into_owned() * eig.eigenvalues[0].sqrt() + e.center();
        assert!((t.forward(&u).norm() - t.radius()).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        let c = Vector::zeros(2);
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(Ellipsoid::new(asym, c.clone()), Err(GeometryError::NotSymmetric { .. })));
        let indef = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(Ellipsoid::new(indef, c.clone()), Err(GeometryError::NotPositiveDefinite { .. })));
        let thin = Matrix::from_diagonal(&v(&[1.0, 1e-15]));
        let e = Ellipsoid::new(thin, c).unwrap();
        assert!(matches!(e.isotropic(), Err(GeometryError::IllConditioned { .. })));
    }

    #[test]
    fn cone_prune_examples() {
        let basis = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let cone = cone_prune_geometry(PI / 2.0, &[Sign::Plus, Sign::Plus], &basis).unwrap();
        assert!((cone.semi_angle - PI / 4.0).abs() < 1e-12);
        assert!((&cone.direction - v(&[1.0, 1.0]) / 2f64.sqrt()).norm() < 1e-12);

        let b3 = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
        let c3 = cone_prune_geometry(PI / 2.0, &[Sign::Plus; 3], &b3).unwrap();
        assert!((c3.semi_angle - 0.955317).abs() < 1e-6);
        let c4 = cone_prune_geometry(PI / 4.0, &[Sign::Plus; 3], &b3).unwrap();
        let ratio = c4.semi_angle.sin() / (PI / 4.0).sin();
        assert!((ratio - 0.757116).abs() < 1e-6, "{ratio}");
        assert!((cone_shrink_factor(3, PI / 4.0) - ratio).abs() < 1e-12);
    }

    #[test]
    fn negative_lead_flips_axis() {
        let basis = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let cone = cone_prune_geometry(PI / 2.0, &[Sign::Minus, Sign::Plus], &basis).unwrap();
        assert!((&cone.direction - v(&[-1.0, 1.0]) / 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn completion_examples() {
        let e1 = v(&[1.0, 0.0, 0.0]);
        let b = orthonormal_completion(&[], &e1).unwrap();
        assert_eq!(b.len(), 3);
        let b2 = orthonormal_completion(&[v(&[0.0, 0.0, 1.0])], &e1).unwrap();
        assert_eq!(b2.len(), 2);
        assert!(b2[1][2].abs() < 1e-15 && (b2[1][1].abs() - 1.0).abs() < 1e-15);
        assert!(matches!(orthonormal_completion(core::slice::from_ref(&e1), &e1), Err(GeometryError::LeadInSpan { .. })));
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((ln_unit_ball_volume(2) - PI.ln()).abs() < 1e-15);
        assert!((ln_unit_ball_volume(3) - (4.0 * PI / 3.0).ln()).abs() < 1e-14);
        assert!((ln_unit_ball_volume(5) - (8.0 * PI * PI / 15.0).ln()).abs() < 1e-14);
    }
}

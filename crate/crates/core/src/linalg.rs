use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Angle in radians between two vectors, computed as
/// `2 atan2(|a/|a| - b/|b||, |a/|a| + b/|b||)` which stays accurate for
/// nearly parallel and nearly antiparallel inputs. A zero vector has angle 0
/// with everything.
pub fn angle_between(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ua = a / na;
    let ub = b / nb;
    2.0 * Float::atan2((&ua - &ub).norm(), (&ua + &ub).norm())
}

/// The `i`-th standard basis vector of dimension `n`.
pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

pub(crate) fn symmetrize(m: &mut Matrix) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

pub(crate) fn all_finite_matrix(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub(crate) fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn angles_of_simple_pairs() {
        let e1 = unit_vector(2, 0);
        let e2 = unit_vector(2, 1);
        assert!((angle_between(&e1, &e2) - FRAC_PI_2).abs() < 1e-15);
        assert!((angle_between(&e1, &(&e1 + &e2)) - FRAC_PI_4).abs() < 1e-15);
        assert!((angle_between(&e1, &(-&e1)) - PI).abs() < 1e-15);
        assert_eq!(angle_between(&e1, &(e1.clone() * 3.0)), 0.0);
    }

    #[test]
    fn tiny_angles_keep_precision() {
        let a = Vector::from_vec(alloc::vec![1.0, 0.0]);
        let b = Vector::from_vec(alloc::vec![1.0, 1e-9]);
        assert!((angle_between(&a, &b) - 1e-9).abs() < 1e-20);
    }
}

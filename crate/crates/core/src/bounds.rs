//! Closed-form iteration counts, step sizes and query bounds.

#[allow(unused_imports)] // inherent f64 methods shadow it when std is linked
use num_traits::Float;

/// `ceil(8 n (n + 1) ln(2 R L / eps))`, at least 1.
pub fn dp_iterations(n: usize, radius: f64, lipschitz: f64, eps: f64) -> usize {
    rounds(n, 2.0 * radius * lipschitz / eps)
}

/// `ceil(8 n (n + 1) ln(R L / eps))`, at least 1.
pub fn comparator_iterations(n: usize, radius: f64, lipschitz: f64, eps: f64) -> usize {
    rounds(n, radius * lipschitz / eps)
}

/// `ceil(8 n (n + 1) ln(2 R L T^(1/4)))`, at least 1.
pub fn regret_rounds(n: usize, radius: f64, lipschitz: f64, horizon: u64) -> usize {
    rounds(n, 2.0 * radius * lipschitz * (horizon as f64).powf(0.25))
}

fn rounds(n: usize, arg: f64) -> usize {
    let nf = n as f64;
    let k = (8.0 * nf * (nf + 1.0) * arg.ln()).ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}

/// Target cone angle of directional-preference pruning, `asin(1/(2n))`.
pub fn dp_angle(n: usize) -> f64 {
    (1.0 / (2.0 * n as f64)).asin()
}

/// Target cone angle of comparator pruning, `asin(1/(2 sqrt(2) n))`.
pub fn comparator_angle(n: usize) -> f64 {
    (1.0 / (2.0 * 2f64.sqrt() * n as f64)).asin()
}

/// Depth of every oracle-driven shallow cut, `1/(2n)`.
pub fn cut_depth(n: usize) -> f64 {
    1.0 / (2.0 * n as f64)
}

/// Upper bound on pruning iterations needed to reach `theta` from a
/// half-space, `ceil(2n ln(1/sin theta))`; equals `ceil(2n ln 2n)` at the
/// directional-preference angle.
pub fn prune_iterations(n: usize, theta: f64) -> usize {
    let k = (2.0 * n as f64 * (1.0 / theta.sin()).ln()).ceil();
    if k > 0.0 {
        k as usize
    } else {
        0
    }
}

/// `max(4 / (4n - sqrt(2) n sqrt((4n^2 - 1) / (4n^2))), 1)`.
pub fn comparator_kappa(n: usize) -> f64 {
    let nf = n as f64;
    let inner = ((4.0 * nf * nf - 1.0) / (4.0 * nf * nf)).sqrt();
    (4.0 / (4.0 * nf - 2f64.sqrt() * nf * inner)).max(1.0)
}

/// Comparator probe distance in isotropic coordinates,
/// `min(eps, sqrt(lambda_max)) / (kappa n^(5/2) max(beta, 1) max(R, 1))`.
pub fn comparator_step(eps: f64, lambda_max: f64, n: usize, beta: f64, radius: f64) -> f64 {
    let nf = n as f64;
    eps.min(lambda_max.sqrt()) / (comparator_kappa(n) * nf.powf(2.5) * beta.max(1.0) * radius.max(1.0))
}

/// Query bound for the directional-preference method,
/// `n K ceil(2n ln 2n) + K log2(R L (K + 1) / eps)`.
pub fn dp_query_bound(n: usize, radius: f64, lipschitz: f64, eps: f64) -> f64 {
    let k = dp_iterations(n, radius, lipschitz, eps) as f64;
    let nf = n as f64;
    nf * k * (2.0 * nf * (2.0 * nf).ln()).ceil() + k * (radius * lipschitz * (k + 1.0) / eps).log2()
}

/// Query bound for the comparator method, `2n ceil(2n ln(2 sqrt(2) n) + n) K + K`.
pub fn comparator_query_bound(n: usize, radius: f64, lipschitz: f64, eps: f64) -> f64 {
    let k = comparator_iterations(n, radius, lipschitz, eps) as f64;
    2.0 * n as f64 * comparator_prune_cap(n) as f64 * k + k
}

/// Iteration cap of comparator pruning, `ceil(2n ln(2 sqrt(2) n) + n)`.
pub fn comparator_prune_cap(n: usize) -> usize {
    let nf = n as f64;
    (2.0 * nf * (2.0 * 2f64.sqrt() * nf).ln() + nf).ceil() as usize
}

/// Query bound for the value method, `(n + 1) K` with the directional-preference `K`.
pub fn value_query_bound(n: usize, radius: f64, lipschitz: f64, eps: f64) -> f64 {
    ((n + 1) * dp_iterations(n, radius, lipschitz, eps)) as f64
}

/// Provable query bound of a bisection tournament over `m` points whose
/// pairwise distances are at most `diameter`:
/// `(m - 1) ceil(log2(diameter L m / (2 eps)))`.
pub fn tournament_query_bound(m: usize, diameter: f64, lipschitz: f64, eps: f64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    let per = (diameter * lipschitz * m as f64 / (2.0 * eps)).log2().ceil().max(0.0);
    (m - 1) as f64 * per
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_counts() {
        assert_eq!(dp_iterations(2, 1.0, 2.0, 0.01), 288);
        assert_eq!(regret_rounds(2, 1.0, 1.0, 1_000_000), 200);
        assert_eq!(dp_iterations(2, 1.0, 1.0, 10.0), 1);
    }

    #[test]
    fn kappa_values() {
        let raw = 4.0 / (8.0 - 2f64.sqrt() * 2.0 * (15.0f64 / 16.0).sqrt());
        assert!((raw - 0.760256).abs() < 1e-6);
        assert_eq!(comparator_kappa(2), 1.0);
        for n in 2..50 {
            assert_eq!(comparator_kappa(n), 1.0);
        }
    }

    #[test]
    fn prune_iteration_bound() {
        assert_eq!(prune_iterations(2, dp_angle(2)), 6);
        assert_eq!(comparator_prune_cap(2), (4.0 * (4.0 * 2f64.sqrt()).ln() + 2.0f64).ceil() as usize);
    }
}

//! Closed-form limit quantities for seed-personalized PageRank on the
//! two-community dSBM: limiting means and variances per community, the
//! Chebyshev misclassification bounds, the Chebyshev-optimal threshold and
//! the damping factor maximizing the separation between the non-seed part of
//! community 1 and community 2.
//!
//! Conventions used throughout: `lambda = 1 - exp(-(a+b)/2)`, communities have
//! equal weight 1/2, seeds carry personalization 1 and everything else 0, so
//! the limit personalization is Bernoulli(s) for community 1 and 0 for
//! community 2. All formulas are evaluated in double precision; `lambda` is
//! formed through `exp_m1`, which is exact in the regimes where
//! `exp(-(a+b)/2)` underflows.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Every closed-form limit quantity for one `(a, b, s, c)` point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TheoryStats {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub c: f64,
    /// `1 - exp(-(a+b)/2)`: probability that a Poisson in-neighbor count is hit,
    /// i.e. the factor by which kernel mass survives the size-biased out-degree.
    pub lambda: f64,
    /// Determinant normalizer of the 2x2 mean system.
    pub delta_det: f64,
    /// Limit mean scale-free PageRank of community 1 (seeds included).
    pub r1: f64,
    /// Limit mean scale-free PageRank of community 2.
    pub r2: f64,
    /// Limit mean over the non-seed part of community 1; `r1 - s(1-c)`.
    pub r1_hat: f64,
    /// `E[1/D^2]` for `D = 1 + Poisson((a+b)/2)`.
    pub inv_sq_moment: f64,
    /// Variance-recursion eigen-coefficient along `(1,-1)`.
    pub g1: f64,
    /// Variance-recursion eigen-coefficient along `(1,1)`.
    pub g2: f64,
    /// Exact limit variance of community 1.
    pub v1: f64,
    /// Exact limit variance of community 2.
    pub v2: f64,
    /// Closed upper bound on `v1`.
    pub v1_bound: f64,
    /// Closed upper bound on `v2`.
    pub v2_bound: f64,
    /// Bound on P(community-1 score below 5s/8).
    pub delta1: f64,
    /// Bound on P(community-2 score above 5s/8).
    pub delta2: f64,
    /// Second eigenvalue factor `E = lambda (a-b)/(a+b)`.
    pub second_eig: f64,
    /// Damping factor maximizing `r1_hat - r2`.
    pub c_star: f64,
    /// Chebyshev-optimal threshold; NaN when a variance vanishes.
    pub x0_star: f64,
    /// Lower bound on `r1` (valid when `mean_bounds_ok`).
    pub r1_lower: f64,
    /// Upper bound on `r2` (valid when `mean_bounds_ok`): `s/2`.
    pub r2_upper: f64,
    /// Hypotheses of the mean bounds hold: `exp(-(a+b)/2) <= b/(4a)` and `c > 1/2`.
    pub mean_bounds_ok: bool,
    /// Hypotheses of the misclassification bounds hold.
    pub misclass_bounds_ok: bool,
    /// A misclassification bound exceeds 1 and carries no information.
    pub vacuous: bool,
}

/// `1 - exp(-(a+b)/2)` without cancellation.
pub fn lambda(a: f64, b: f64) -> f64 {
    -(-(a + b) / 2.0).exp_m1()
}

fn check_kernel(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::invalid_params(format!(
            "kernel entries must be finite and non-negative, got a={a}, b={b}"
        )));
    }
    if a + b <= 0.0 {
        return Err(Error::invalid_params("kernel must satisfy a + b > 0"));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if !s.is_finite() || s <= 0.0 || s >= 1.0 {
        return Err(Error::invalid_params(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

// Damping is accepted on [0,1): the closed forms are exact at c = 0, where
// PageRank degenerates to the personalization.
fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || c < 0.0 || c >= 1.0 {
        return Err(Error::invalid_params(format!("c must lie in [0,1), got {c}")));
    }
    Ok(())
}

/// Limit mean scale-free PageRanks `(r1, r2, r1_hat)`.
///
/// Solves the 2x2 mean system in closed form:
/// `r1 = (1 - c*lambda*a/(a+b)) s(1-c)/Delta`, `r2 = (c*lambda*b/(a+b)) s(1-c)/Delta`
/// with `Delta = (1 - c*lambda*a/(a+b))^2 - (c*lambda*b/(a+b))^2`, and
/// `r1_hat = r1 - s(1-c)`.
pub fn limit_means(a: f64, b: f64, s: f64, c: f64) -> Result<(f64, f64, f64)> {
    check_kernel(a, b)?;
    check_s(s)?;
    check_c(c)?;
    let lam = lambda(a, b);
    if c * lam >= 1.0 {
        // cannot occur for c < 1 since lambda < 1; guard is defensive
        return Err(Error::invalid_params(format!(
            "mean system is singular: c*lambda = {} >= 1",
            c * lam
        )));
    }
    let diag = c * lam * a / (a + b);
    let off = c * lam * b / (a + b);
    let delta_det = (1.0 - diag) * (1.0 - diag) - off * off;
    let r1 = (1.0 - diag) * s * (1.0 - c) / delta_det;
    let r2 = off * s * (1.0 - c) / delta_det;
    Ok((r1, r2, r1 - s * (1.0 - c)))
}

/// Determinant normalizer of the mean system.
pub fn delta_det(a: f64, b: f64, c: f64) -> f64 {
    let lam = lambda(a, b);
    let diag = c * lam * a / (a + b);
    let off = c * lam * b / (a + b);
    (1.0 - diag) * (1.0 - diag) - off * off
}

/// Mean bounds `r1 >= s(1 - 2b/((1-c)(a+b)))` and `r2 <= s/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanBounds {
    pub r1_lower: f64,
    pub r2_upper: f64,
    /// True iff `exp(-(a+b)/2) <= b/(4a)` and `c > 1/2`.
    pub conditions_met: bool,
}

pub fn mean_bounds(a: f64, b: f64, s: f64, c: f64) -> MeanBounds {
    let one_minus_lambda = (-(a + b) / 2.0).exp();
    // NaN comparison (a = b = 0) correctly yields false.
    let conditions_met = one_minus_lambda <= b / (4.0 * a) && c > 0.5;
    MeanBounds {
        r1_lower: s * (1.0 - 2.0 * b / ((1.0 - c) * (a + b))),
        r2_upper: s / 2.0,
        conditions_met,
    }
}

const LN_FACTORIAL_SMALL: usize = 20;

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n <= LN_FACTORIAL_SMALL as u64 {
        let mut f = 1.0f64;
        for k in 2..=n {
            f *= k as f64;
        }
        return f.ln();
    }
    // Stirling series; good to ~1e-13 relative from n = 21 on.
    let x = n as f64;
    let x2 = x * x;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// `E[1/(N+1)^2]` for `N ~ Poisson(mu)`, to absolute error below 1e-14.
///
/// Direct series with the term recurrence while `exp(-mu)` is representable;
/// for larger `mu` the series is summed in log space over a window of
/// 40 standard deviations around the mode, whose complement carries Poisson
/// tail mass far below the target accuracy.
pub fn poisson_inv_sq_moment(mu: f64) -> f64 {
    assert!(mu.is_finite() && mu >= 0.0, "mu must be finite and non-negative");
    if mu == 0.0 {
        return 1.0;
    }
    if mu <= 600.0 {
        let cutoff = (mu + 40.0 * mu.sqrt() + 40.0).ceil() as u64;
        let mut term = (-mu).exp();
        let mut sum = 0.0;
        for n in 0..=cutoff {
            sum += term / (((n + 1) * (n + 1)) as f64);
            term *= mu / (n + 1) as f64;
        }
        sum
    } else {
        let spread = 40.0 * mu.sqrt();
        let lo = ((mu - spread).floor()).max(0.0) as u64;
        let hi = (mu + spread).ceil() as u64;
        let ln_mu = mu.ln();
        let mut sum = 0.0;
        for n in lo..=hi {
            let ln_term = n as f64 * ln_mu - mu - ln_factorial(n);
            sum += ln_term.exp() / (((n + 1) * (n + 1)) as f64);
        }
        sum
    }
}

/// Exact limit variances plus the closed upper bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variances {
    pub v1: f64,
    pub v2: f64,
    pub g1: f64,
    pub g2: f64,
    pub v1_bound: f64,
    pub v2_bound: f64,
}

/// Limit variances of the per-community PageRank laws.
///
/// With `m2 = E[1/D^2]`, `g1 = c^2 m2 (a-b)/2` and `g2 = c^2 m2 (a+b)/2`, the
/// variance vector solves a 2x2 linear system whose closed form is
/// `v = (K r^2 + (1-c)^2 s(1-s) k) / (2(1-g1)(1-g2))`.
pub fn limit_variances(a: f64, b: f64, s: f64, c: f64) -> Result<Variances> {
    let (r1, r2, _) = limit_means(a, b, s, c)?;
    let m2 = poisson_inv_sq_moment((a + b) / 2.0);
    let g1 = c * c * m2 * (a - b) / 2.0;
    let g2 = c * c * m2 * (a + b) / 2.0;
    if g2 >= 1.0 {
        // ruled out by E[1/(N+1)^2] E[N] <= 1; guard is defensive
        return Err(Error::invalid_params(format!(
            "variance system is singular: g2 = {g2} >= 1"
        )));
    }
    let denom = 2.0 * (1.0 - g1) * (1.0 - g2);
    let k_diag = g1 + g2 - 2.0 * g1 * g2;
    let k_off = g2 - g1;
    let bern = (1.0 - c) * (1.0 - c) * s * (1.0 - s);
    let v1 = (k_diag * r1 * r1 + k_off * r2 * r2 + bern * (2.0 - g1 - g2)) / denom;
    let v2 = (k_off * r1 * r1 + k_diag * r2 * r2 + bern * k_off) / denom;
    let shared = 4.0 * c * c * s * s / ((a + b) * (1.0 - c * c));
    let v1_bound = shared + (1.0 - c) / (1.0 + c) * s * (1.0 - s);
    let v2_bound = shared * (1.0 + (1.0 - c) * (1.0 - s) / (2.0 * s * (1.0 + c)));
    Ok(Variances { v1, v2, g1, g2, v1_bound, v2_bound })
}

/// Misclassification bounds at the threshold `x0 = 5s/8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisclassBounds {
    pub delta1: f64,
    pub delta2: f64,
    /// True iff `8b/(a+b) < 1/2`, `exp(-(a+b)/2) < b/(4a)` and
    /// `c` lies in `(1/2, 1 - 8b/(a+b)]`.
    pub conditions_met: bool,
    /// A bound exceeds 1 and carries no information.
    pub vacuous: bool,
}

pub fn misclassification_bounds(a: f64, b: f64, s: f64, c: f64) -> MisclassBounds {
    let shared = 256.0 * c * c / ((a + b) * (1.0 - c * c));
    let delta1 = shared + 64.0 * (1.0 - c) * (1.0 - s) / ((1.0 + c) * s);
    let delta2 = shared * (1.0 + (1.0 - c) * (1.0 - s) / (2.0 * (1.0 + c) * s));
    let ratio = 8.0 * b / (a + b);
    let conditions_met = ratio < 0.5
        && (-(a + b) / 2.0).exp() < b / (4.0 * a)
        && c > 0.5
        && c <= 1.0 - ratio;
    MisclassBounds {
        delta1,
        delta2,
        conditions_met,
        vacuous: delta1 > 1.0 || delta2 > 1.0,
    }
}

/// Threshold minimizing the sum of the two Chebyshev error bounds,
/// `x0* = (r1 v2^{1/3} + r2 v1^{1/3}) / (v1^{1/3} + v2^{1/3})`.
pub fn optimal_threshold(r1: f64, r2: f64, v1: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::invalid_params(format!(
            "optimal threshold requires positive variances, got v1={v1}, v2={v2}"
        )));
    }
    let w1 = v1.cbrt();
    let w2 = v2.cbrt();
    Ok((r1 * w2 + r2 * w1) / (w1 + w2))
}

/// Separation eigenvalue `E` and the damping factor `c*` maximizing
/// `r1_hat(c) - r2(c)`.
///
/// `E = lambda (a-b)/(a+b)` and `c* = (1 - sqrt(1-E))/E`, extended by
/// continuity to `c* = 1/2` at `E = 0`.
pub fn optimal_damping(a: f64, b: f64) -> Result<(f64, f64)> {
    check_kernel(a, b)?;
    if a < b {
        return Err(Error::invalid_params(format!(
            "optimal damping requires a >= b, got a={a}, b={b}"
        )));
    }
    let e = (a - b) / (a + b) * lambda(a, b);
    let c_star = if e > 1e-8 {
        (1.0 - (1.0 - e).sqrt()) / e
    } else {
        // series around E = 0 avoids the 0/0
        0.5 + e / 8.0 + e * e / 16.0
    };
    Ok((e, c_star))
}

/// Closed form for the separation `r1_hat(c) - r2(c) = s c E (1-c) / (1 - cE)`.
///
/// The published statement of this curve drops the `cE` factor, but the
/// three-community mean system gives exactly this expression, and its argmax
/// over `c` is `(1 - sqrt(1-E))/E`, matching the stated optimum.
pub fn mean_separation(a: f64, b: f64, s: f64, c: f64) -> Result<f64> {
    check_kernel(a, b)?;
    check_s(s)?;
    check_c(c)?;
    let e = (a - b) / (a + b) * lambda(a, b);
    Ok(s * c * e * (1.0 - c) / (1.0 - c * e))
}

/// Assembles every closed-form quantity for one parameter point.
pub fn evaluate(a: f64, b: f64, s: f64, c: f64) -> Result<TheoryStats> {
    let (r1, r2, r1_hat) = limit_means(a, b, s, c)?;
    let var = limit_variances(a, b, s, c)?;
    let mb = mean_bounds(a, b, s, c);
    let cb = misclassification_bounds(a, b, s, c);
    let (second_eig, c_star) = if a >= b {
        optimal_damping(a, b)?
    } else {
        let e = (a - b) / (a + b) * lambda(a, b);
        (e, f64::NAN)
    };
    let x0_star = if var.v1 > 0.0 && var.v2 > 0.0 {
        optimal_threshold(r1, r2, var.v1, var.v2)?
    } else {
        f64::NAN
    };
    Ok(TheoryStats {
        a,
        b,
        s,
        c,
        lambda: lambda(a, b),
        delta_det: delta_det(a, b, c),
        r1,
        r2,
        r1_hat,
        inv_sq_moment: poisson_inv_sq_moment((a + b) / 2.0),
        g1: var.g1,
        g2: var.g2,
        v1: var.v1,
        v2: var.v2,
        v1_bound: var.v1_bound,
        v2_bound: var.v2_bound,
        delta1: cb.delta1,
        delta2: cb.delta2,
        second_eig,
        c_star,
        x0_star,
        r1_lower: mb.r1_lower,
        r2_upper: mb.r2_upper,
        mean_bounds_ok: mb.conditions_met,
        misclass_bounds_ok: cb.conditions_met,
        vacuous: cb.vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Solves [[1-d, -o], [-o, 1-d]] x = [(1-c)s, 0] by Gaussian elimination;
    // independent of the closed form under test.
    fn solve_mean_system(a: f64, b: f64, s: f64, c: f64) -> (f64, f64) {
        let lam = lambda(a, b);
        let m = [
            [1.0 - c * lam * a / (a + b), -c * lam * b / (a + b)],
            [-c * lam * b / (a + b), 1.0 - c * lam * a / (a + b)],
        ];
        let rhs = [(1.0 - c) * s, 0.0];
        let factor = m[1][0] / m[0][0];
        let m11 = m[1][1] - factor * m[0][1];
        let b1 = rhs[1] - factor * rhs[0];
        let x1 = b1 / m11;
        let x0 = (rhs[0] - m[0][1] * x1) / m[0][0];
        (x0, x1)
    }

    fn random_point(rng: &mut impl Rng) -> (f64, f64, f64, f64) {
        let a: f64 = rng.gen_range(0.0..300.0);
        let b: f64 = rng.gen_range(0.0..300.0);
        let (a, b) = if a + b < 1e-3 { (a + 1.0, b) } else { (a, b) };
        let s = rng.gen_range(0.05..0.95);
        let c = rng.gen_range(0.01..0.99);
        (a, b, s, c)
    }

    #[test]
    fn fig1_means_match_frozen_values() {
        let (r1, r2, r1_hat) = limit_means(150.0, 10.0, 0.2, 0.85).unwrap();
        assert!((r1 - 0.15853658536585366).abs() < 1e-12);
        assert!((r2 - 0.041463414634146341).abs() < 1e-12);
        assert!((r1_hat - 0.12853658536585366).abs() < 1e-12);
    }

    #[test]
    fn no_cross_edges_starve_community_two() {
        let (_, r2, _) = limit_means(42.0, 0.0, 0.3, 0.7).unwrap();
        assert_eq!(r2, 0.0);
    }

    #[test]
    fn symmetric_kernel_row_sum_identity() {
        // summing the two mean equations when a = b gives
        // r1 + r2 = s(1-c)/(1 - c*lambda)
        let (a, b, s, c) = (50.0, 50.0, 0.5, 0.5);
        let (r1, r2, _) = limit_means(a, b, s, c).unwrap();
        let lam = lambda(a, b);
        assert!((r1 + r2 - s * (1.0 - c) / (1.0 - c * lam)).abs() < 1e-14);
    }

    #[test]
    fn means_match_linear_solve_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (a, b, s, c) = random_point(&mut rng);
            let (r1, r2, _) = limit_means(a, b, s, c).unwrap();
            let (x1, x2) = solve_mean_system(a, b, s, c);
            assert!((r1 - x1).abs() <= 1e-12, "r1={r1} x1={x1} at ({a},{b},{s},{c})");
            assert!((r2 - x2).abs() <= 1e-12, "r2={r2} x2={x2} at ({a},{b},{s},{c})");
        }
    }

    #[test]
    fn seed_decomposition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let (a, b, s, c) = random_point(&mut rng);
            let (r1, _, r1_hat) = limit_means(a, b, s, c).unwrap();
            assert!((r1 - (r1_hat + s * (1.0 - c))).abs() <= 1e-12);
        }
    }

    #[test]
    fn system_eigenvalues_are_one_minus_c_lambda_and_one_minus_c_e() {
        // numeric eigensolve of the symmetric 2x2 via the characteristic polynomial
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let (a, b, _, c) = random_point(&mut rng);
            let lam = lambda(a, b);
            let d = 1.0 - c * lam * a / (a + b);
            let o = -c * lam * b / (a + b);
            let tr = 2.0 * d;
            let det = d * d - o * o;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let (lo, hi) = (tr / 2.0 - disc, tr / 2.0 + disc);
            let e = (a - b) / (a + b) * lam;
            let expect_lo = (1.0 - c * lam).min(1.0 - c * e);
            let expect_hi = (1.0 - c * lam).max(1.0 - c * e);
            assert!((lo - expect_lo).abs() < 1e-12);
            assert!((hi - expect_hi).abs() < 1e-12);
        }
    }

    #[test]
    fn fig1_mean_bounds_hold() {
        let mb = mean_bounds(150.0, 10.0, 0.2, 0.85);
        assert!(mb.conditions_met);
        assert!((mb.r1_lower - 1.0 / 30.0).abs() < 1e-14);
        assert_eq!(mb.r2_upper, 0.1);
        let (r1, r2, _) = limit_means(150.0, 10.0, 0.2, 0.85).unwrap();
        assert!(r1 >= mb.r1_lower);
        assert!(r2 <= mb.r2_upper);
    }

    #[test]
    fn mean_bound_conditions_fail_without_cross_edges() {
        assert!(!mean_bounds(42.0, 0.0, 0.2, 0.85).conditions_met);
    }

    #[test]
    fn mean_bound_conditions_require_c_above_half() {
        assert!(!mean_bounds(150.0, 10.0, 0.2, 0.5).conditions_met);
        assert!(mean_bounds(150.0, 10.0, 0.2, 0.5000001).conditions_met);
    }

    #[test]
    fn inv_sq_moment_at_zero_is_one() {
        assert_eq!(poisson_inv_sq_moment(0.0), 1.0);
    }

    #[test]
    fn inv_sq_moment_matches_frozen_values() {
        assert!((poisson_inv_sq_moment(1.0) - 0.48482910699568765).abs() < 1e-14);
        assert!((poisson_inv_sq_moment(5.0) - 0.051206539916321813).abs() < 1e-14);
        assert!((poisson_inv_sq_moment(80.0) - 0.00015825388192541105).abs() < 1e-14);
    }

    #[test]
    fn inv_sq_moment_bounds_at_mu_80() {
        let m = poisson_inv_sq_moment(80.0);
        assert!(m > 1.0 / (81.0 * 81.0) && m < 1.0 / 81.0);
        assert!(m <= 8.0 / (160.0 * 160.0));
    }

    // E[1/(N v 1)] by direct series: the independent right-hand side of the
    // moment identity.
    fn poisson_inv_max1(mu: f64) -> f64 {
        let mut term = (-mu).exp();
        let mut sum = term; // n = 0 contributes P(N=0) * 1
        let cutoff = (mu + 40.0 * mu.sqrt() + 40.0).ceil() as u64;
        for n in 1..=cutoff {
            term *= mu / n as f64;
            sum += term / n as f64;
        }
        sum
    }

    #[test]
    fn poisson_moment_identity() {
        for mu in [1.0, 5.0, 80.0] {
            let lhs = poisson_inv_sq_moment(mu) * mu + (-mu).exp();
            let rhs = poisson_inv_max1(mu);
            assert!((lhs - rhs).abs() < 1e-12, "mu={mu}: lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn windowed_series_agrees_with_direct_series() {
        for mu in [300.0, 500.0, 599.0] {
            let direct = poisson_inv_sq_moment(mu);
            // force the windowed path by shifting into its regime and back
            let spread = 40.0 * mu.sqrt();
            let lo = ((mu - spread).floor()).max(0.0) as u64;
            let hi = (mu + spread).ceil() as u64;
            let ln_mu = mu.ln();
            let mut windowed = 0.0;
            for n in lo..=hi {
                let ln_term = n as f64 * ln_mu - mu - ln_factorial(n);
                windowed += ln_term.exp() / (((n + 1) * (n + 1)) as f64);
            }
            assert!(
                (direct - windowed).abs() < 1e-15,
                "mu={mu}: direct={direct} windowed={windowed}"
            );
        }
    }

    #[test]
    fn large_mu_path_stays_near_inverse_square() {
        let mu: f64 = 5000.0;
        let m = poisson_inv_sq_moment(mu);
        assert!(m > 1.0 / ((mu + 1.0) * (mu + 1.0)));
        assert!(m < 1.1 / (mu * mu));
    }

    #[test]
    fn zero_damping_degenerates_to_personalization() {
        let v = limit_variances(150.0, 10.0, 0.2, 0.0).unwrap();
        assert_eq!(v.v1, 0.2 * 0.8);
        assert_eq!(v.v2, 0.0);
        let (r1, r2, _) = limit_means(150.0, 10.0, 0.2, 0.0).unwrap();
        assert_eq!(r1, 0.2);
        assert_eq!(r2, 0.0);
    }

    #[test]
    fn fig1_variances_match_frozen_values() {
        let v = limit_variances(150.0, 10.0, 0.2, 0.85).unwrap();
        assert!((v.v1 - 0.0038495445949696308).abs() < 1e-15);
        assert!((v.v2 - 3.1583341358557455e-5).abs() < 1e-17);
        assert!(v.v1 <= v.v1_bound);
        assert!(v.v2 <= v.v2_bound);
    }

    #[test]
    fn symmetric_kernel_collapses_antisymmetric_coefficient() {
        let v = limit_variances(60.0, 60.0, 0.3, 0.7).unwrap();
        assert_eq!(v.g1, 0.0);
        // with g1 = 0, K off-diagonal and k's second entry both equal g2:
        // v1 - v2 = (1-c)^2 s(1-s) (2 - 2 g2) / (2 (1-g2)) = (1-c)^2 s (1-s)
        let bern = 0.3f64 * 0.7 * 0.3 * 0.3;
        assert!((v.v1 - v.v2 - bern).abs() < 1e-15);
    }

    // Solves v = M2 (v + r^2) + h directly, independent of the packaged closed
    // form: (I - M2) v = M2 r^2 + h.
    fn solve_variance_system(a: f64, b: f64, s: f64, c: f64) -> (f64, f64) {
        let (r1, r2, _) = limit_means(a, b, s, c).unwrap();
        let m2 = poisson_inv_sq_moment((a + b) / 2.0);
        let maa = c * c * m2 * a / 2.0;
        let mbb = c * c * m2 * b / 2.0;
        let m = [[1.0 - maa, -mbb], [-mbb, 1.0 - maa]];
        let rhs = [
            maa * r1 * r1 + mbb * r2 * r2 + (1.0 - c) * (1.0 - c) * s * (1.0 - s),
            mbb * r1 * r1 + maa * r2 * r2,
        ];
        let factor = m[1][0] / m[0][0];
        let m11 = m[1][1] - factor * m[0][1];
        let b1 = rhs[1] - factor * rhs[0];
        let x1 = b1 / m11;
        let x0 = (rhs[0] - m[0][1] * x1) / m[0][0];
        (x0, x1)
    }

    #[test]
    fn variances_match_direct_system_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..500 {
            let (a, b, s, c) = random_point(&mut rng);
            let v = limit_variances(a, b, s, c).unwrap();
            let (w1, w2) = solve_variance_system(a, b, s, c);
            assert!((v.v1 - w1).abs() < 1e-12, "({a},{b},{s},{c}): {} vs {w1}", v.v1);
            assert!((v.v2 - w2).abs() < 1e-12, "({a},{b},{s},{c}): {} vs {w2}", v.v2);
        }
    }

    #[test]
    fn variance_bounds_dominate_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..1000 {
            let (a, b, s, c) = random_point(&mut rng);
            let v = limit_variances(a, b, s, c).unwrap();
            assert!(v.v1 <= v.v1_bound * (1.0 + 1e-12), "({a},{b},{s},{c})");
            assert!(v.v2 <= v.v2_bound * (1.0 + 1e-12), "({a},{b},{s},{c})");
            assert!(v.g2 <= (c * c).min(4.0 * c * c / (a + b)) + 1e-15);
        }
    }

    #[test]
    fn fig1_misclassification_conditions_fail() {
        // 8b/(a+b) = 0.5 is not strictly below 1/2
        let mb = misclassification_bounds(150.0, 10.0, 0.2, 0.85);
        assert!(!mb.conditions_met);
    }

    #[test]
    fn theorem_bounds_match_frozen_values() {
        let mb = misclassification_bounds(9950.0, 50.0, 0.9, 0.95);
        assert!(mb.conditions_met);
        assert!((mb.delta1 - 0.4193002849002849).abs() < 1e-12);
        assert!((mb.delta2 - 0.23730165826576083).abs() < 1e-12);
        assert!(!mb.vacuous);
    }

    #[test]
    fn bounds_blow_up_as_c_approaches_one() {
        let near = misclassification_bounds(9950.0, 50.0, 0.9, 0.999999);
        assert!(near.delta1 > 1.0);
        assert!(near.vacuous);
    }

    #[test]
    fn packaged_bounds_equal_assembled_chebyshev_bounds() {
        // delta_i must equal v_i_bound / (s/8)^2, the z = w = s/8 recipe
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            let (a, b, s, c) = random_point(&mut rng);
            let v = limit_variances(a, b, s, c).unwrap();
            let mb = misclassification_bounds(a, b, s, c);
            let z = s / 8.0;
            assert!((mb.delta1 - v.v1_bound / (z * z)).abs() <= 1e-12 * mb.delta1.max(1.0));
            assert!((mb.delta2 - v.v2_bound / (z * z)).abs() <= 1e-12 * mb.delta2.max(1.0));
        }
    }

    #[test]
    fn equal_variances_give_midpoint_threshold() {
        let x0 = optimal_threshold(0.4, 0.1, 0.02, 0.02).unwrap();
        assert!((x0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn equal_means_give_that_mean() {
        let x0 = optimal_threshold(0.3, 0.3, 0.01, 0.04).unwrap();
        assert!((x0 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn optimal_threshold_rejects_nonpositive_variance() {
        assert!(optimal_threshold(0.4, 0.1, 0.0, 0.1).is_err());
        assert!(optimal_threshold(0.4, 0.1, 0.1, -1.0).is_err());
    }

    #[test]
    fn fig1_threshold_minimizes_chebyshev_sum_on_grid() {
        let (r1, r2, _) = limit_means(150.0, 10.0, 0.2, 0.85).unwrap();
        let v = limit_variances(150.0, 10.0, 0.2, 0.85).unwrap();
        let x0 = optimal_threshold(r1, r2, v.v1, v.v2).unwrap();
        assert!((x0 - 0.061112759945680381).abs() < 1e-14);
        assert!(x0 > r2 && x0 < r1);
        let f = |x: f64| v.v1 / ((r1 - x) * (r1 - x)) + v.v2 / ((x - r2) * (x - r2));
        let mut best = (f64::NAN, f64::INFINITY);
        let mut x = r2 + 1e-4;
        while x < r1 {
            if f(x) < best.1 {
                best = (x, f(x));
            }
            x += 1e-4;
        }
        assert!((best.0 - x0).abs() <= 1e-4, "grid argmin {} vs closed {}", best.0, x0);
        assert!(f(x0) <= best.1 + 1e-12);
    }

    #[test]
    fn symmetric_kernel_gives_half_damping() {
        let (e, c_star) = optimal_damping(77.0, 77.0).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(c_star, 0.5);
    }

    #[test]
    fn optimal_damping_rejects_disassortative_kernel() {
        assert!(optimal_damping(2.0, 100.0).is_err());
    }

    #[test]
    fn fig2_damping_matches_frozen_values() {
        let (e, c_star) = optimal_damping(100.0, 2.0).unwrap();
        assert!((e - 0.9607843137254902).abs() < 1e-14);
        assert!((c_star - 0.83470398084975351).abs() < 1e-14);
        // soft cross-check against the reported empirical optimum near 0.86
        assert!((c_star - 0.86).abs() <= 0.05);
    }

    #[test]
    fn c_star_maximizes_separation_curve_on_grid() {
        let (a, b, s) = (100.0, 2.0, 0.15);
        let (_, c_star) = optimal_damping(a, b).unwrap();
        let mut best = (0.5, f64::NEG_INFINITY);
        let mut c = 0.5;
        while c < 1.0 - 1e-9 {
            let g = mean_separation(a, b, s, c).unwrap();
            if g > best.1 {
                best = (c, g);
            }
            c += 1e-5;
        }
        assert!((best.0 - c_star).abs() <= 2e-5, "grid {} vs closed {}", best.0, c_star);
    }

    #[test]
    fn separation_curve_matches_mean_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let (a, b, s, c) = random_point(&mut rng);
            let (a, b) = if a >= b { (a, b) } else { (b, a) };
            let (_, r2, r1_hat) = limit_means(a, b, s, c).unwrap();
            let gap = mean_separation(a, b, s, c).unwrap();
            assert!(
                (gap - (r1_hat - r2)).abs() <= 1e-12,
                "({a},{b},{s},{c}): {gap} vs {}",
                r1_hat - r2
            );
        }
    }

    #[test]
    fn separation_vanishes_as_c_approaches_one() {
        let g = mean_separation(100.0, 2.0, 0.15, 0.999999).unwrap();
        assert!(g < 1e-4);
    }

    #[test]
    fn evaluate_assembles_consistent_snapshot() {
        let t = evaluate(150.0, 10.0, 0.2, 0.85).unwrap();
        assert!((t.r1 - 0.15853658536585366).abs() < 1e-12);
        assert!((t.r1 - t.r1_hat - t.s * (1.0 - t.c)).abs() < 1e-15);
        assert!(t.mean_bounds_ok);
        assert!(!t.misclass_bounds_ok);
        assert!(t.x0_star.is_finite());
        assert!(t.delta_det > 0.0);
    }
}

//! Generating-function numerics for critical trees and their looptrees:
//! the total-progeny transform, the expected ball-volume recursion, its
//! limiting constant, and a lazy Monte Carlo sampler for cross-checks.

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use rand::Rng;

const FIXED_POINT_TOL: f64 = 1e-13;
const FIXED_POINT_MAX_ITERS: u64 = 100_000;

/// Evaluator for g(s) = E(s^{total progeny}), the minimal solution of
/// g = s * f(g) where f is the offspring generating function.
#[derive(Clone, Debug)]
pub struct ProgenyPgf {
    dist: OffspringDistribution,
    pub tolerance: f64,
    pub max_iterations: u64,
}

impl ProgenyPgf {
    pub fn new(dist: &OffspringDistribution) -> Self {
        ProgenyPgf {
            dist: dist.clone(),
            tolerance: FIXED_POINT_TOL,
            max_iterations: FIXED_POINT_MAX_ITERS,
        }
    }

    /// Iterates g <- s * f(g) from 0. The iterates increase monotonically
    /// to the smallest fixed point, which is the probabilistic one.
    pub fn eval(&self, s: f64) -> Result<f64> {
        debug_assert!((0.0..1.0).contains(&s), "s = {s} outside [0, 1)");
        let mut g = 0.0f64;
        for _ in 0..self.max_iterations {
            let next = s * self.dist.pgf(g);
            if (next - g).abs() <= self.tolerance {
                return Ok(next);
            }
            g = next;
        }
        Err(Error::FixedPointDiverged {
            iterations: self.max_iterations,
        })
    }
}

/// One-shot form of [`ProgenyPgf::eval`] with the default tolerance.
pub fn progeny_pgf(dist: &OffspringDistribution, s: f64) -> Result<f64> {
    ProgenyPgf::new(dist).eval(s)
}

/// Expected looptree ball volumes E(X^(0)), ..., E(X^(n_max)) of an
/// unconditioned critical tree, indexed by radius.
#[derive(Clone, Debug)]
pub struct VolumeExpectation {
    pub values: Vec<f64>,
}

impl VolumeExpectation {
    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// Dynamic program for the expected ball volume. The root's cycle of
/// length k+1 carries two vertices at each distance j < (k+1)/2 and one at
/// (k+1)/2 when k is odd, each the base of an independent copy, so
/// E(X^(n)) = 1 + sum_{j=1}^{n} (2 P(xi >= 2j) + pi_{2j-1}) E(X^(n-j)).
pub fn expected_outgrowth_volume(
    dist: &OffspringDistribution,
    n_max: usize,
) -> VolumeExpectation {
    let coef: Vec<f64> = (0..=n_max as u64)
        .map(|j| {
            if j == 0 {
                0.0
            } else {
                2.0 * dist.tail(2 * j) + dist.pmf(2 * j - 1)
            }
        })
        .collect();
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(1.0f64);
    for n in 1..=n_max {
        let mut acc = 1.0;
        for j in 1..=n {
            acc += coef[j] * values[n - j];
        }
        values.push(acc);
    }
    VolumeExpectation { values }
}

/// Limit of E(X^(n)) * n / a(n). Finite-variance laws give
/// 2 f''(1) / (3 + h + f''(1)) with h the odd-offspring mass; laws in a
/// stable domain with alpha < 2 give 2^(alpha-1) / Gamma(alpha).
pub fn m_constant(dist: &OffspringDistribution) -> f64 {
    match dist.second_factorial_moment() {
        Some(f2) => 2.0 * f2 / (3.0 + odd_mass(dist) + f2),
        None => {
            let a = dist.alpha();
            (a - 1.0).exp2() / statrs::function::gamma::gamma(a)
        }
    }
}

/// P(xi odd), summed until the remaining tail is negligible.
fn odd_mass(dist: &OffspringDistribution) -> f64 {
    let mut total = 0.0;
    let mut k = 1u64;
    while dist.tail(k) > 1e-18 {
        total += dist.pmf(k);
        k += 2;
    }
    total
}

/// Number of vertices within looptree distance `n` of the root of a fresh
/// unconditioned tree. Lazy: a vertex with outdegree k and remaining budget
/// b spawns, for each distance d <= b along its cycle, two sub-budgets
/// b - d while k >= 2d and one while k + 1 == 2d. Children beyond the
/// half-cycle are strictly farther, so the walk down offsets can stop at
/// the first failure.
pub fn sample_outgrowth_volume<R: Rng>(
    dist: &OffspringDistribution,
    n: u64,
    rng: &mut R,
) -> u64 {
    let mut count = 0u64;
    let mut budgets = vec![n];
    while let Some(b) = budgets.pop() {
        count += 1;
        if b == 0 {
            continue;
        }
        let k = dist.sample(rng);
        for d in 1..=b {
            if k >= 2 * d {
                budgets.push(b - d);
                budgets.push(b - d);
            } else if k + 1 == 2 * d {
                budgets.push(b - d);
            } else {
                break;
            }
        }
    }
    count
}

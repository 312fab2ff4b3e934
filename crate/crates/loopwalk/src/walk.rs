//! Simple random walk on looptrees: return probabilities through an exact
//! distribution-evolution kernel, and expected escape times through a
//! Dirichlet solve or Monte Carlo simulation.
//!
//! On a ball of radius R the kernel gives the infinite-graph return
//! probability exactly for steps t <= R - 1: a returning trajectory of
//! length t never leaves distance t/2 < R, where the ball's adjacency is
//! complete. `ball_return_probabilities` enforces the stronger requirement
//! R >= 2*n_max + 1 so every reported probability is exact.

use crate::ensemble;
use crate::error::{Error, Result};
use crate::looptree::Looptree;
use crate::solver;
use crate::spine::LoopspineBall;
use rand::Rng;

/// Vertex count above which the kernel step parallelizes.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 4096;

#[inline]
fn pull(graph: &Looptree, inv_deg: &[f64], cur: &[f64], v: u32) -> f64 {
    graph
        .neighbors(v)
        .iter()
        .map(|&u| cur[u as usize] * inv_deg[u as usize])
        .sum()
}

fn step(graph: &Looptree, inv_deg: &[f64], cur: &[f64], next: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if cur.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        next.par_iter_mut().enumerate().for_each(|(v, slot)| {
            *slot = pull(graph, inv_deg, cur, v as u32);
        });
        return;
    }
    for (v, slot) in next.iter_mut().enumerate() {
        *slot = pull(graph, inv_deg, cur, v as u32);
    }
}

/// Return probabilities p_t(root, root) for t = 0..=steps, plus the largest
/// deviation of total mass from 1 seen along the way. The pull kernel moves
/// mass along every adjacency slot symmetrically, so the drift measures
/// floating-point rounding only.
pub fn return_probabilities_checked(graph: &Looptree, steps: usize) -> (Vec<f64>, f64) {
    let n = graph.len();
    if n == 1 {
        return (vec![1.0; steps + 1], 0.0);
    }
    let root = graph.root() as usize;
    let inv_deg: Vec<f64> = (0..n as u32).map(|v| 1.0 / graph.degree(v) as f64).collect();
    let mut cur = vec![0.0f64; n];
    cur[root] = 1.0;
    let mut next = vec![0.0f64; n];
    let mut probs = Vec::with_capacity(steps + 1);
    probs.push(1.0);
    let mut drift = 0.0f64;
    ensemble::install(|| {
        for _ in 0..steps {
            step(graph, &inv_deg, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            probs.push(cur[root]);
            let mass: f64 = cur.iter().sum();
            drift = drift.max((mass - 1.0).abs());
        }
    });
    (probs, drift)
}

/// Return probabilities p_t(root, root) for t = 0..=steps.
pub fn return_probabilities(graph: &Looptree, steps: usize) -> Vec<f64> {
    return_probabilities_checked(graph, steps).0
}

/// Exact return probabilities p_t for t = 0..=2*n_max on the infinite
/// looptree the ball was drawn from. Requires radius >= 2*n_max + 1 so that
/// no trajectory of length <= 2*n_max can feel the truncation.
pub fn ball_return_probabilities(ball: &LoopspineBall, n_max: u64) -> Result<Vec<f64>> {
    let needed = 2 * n_max + 1;
    if ball.radius < needed {
        return Err(Error::RadiusTooSmall { radius: ball.radius, needed });
    }
    Ok(return_probabilities(&ball.graph, 2 * n_max as usize))
}

/// Expected number of steps, from each vertex, for the walk to first reach
/// distance >= r. Solves deg(v) T(v) - sum_slots T(u) = deg(v) on {d < r}
/// with T = 0 outside; entries at d >= r are exactly zero.
pub fn escape_profile(graph: &Looptree, dist: &[u64], r: u64) -> Result<Vec<f64>> {
    let maxd = dist.iter().copied().max().unwrap_or(0);
    if maxd < r {
        return Err(Error::RadiusTooSmall { radius: maxd + 1, needed: r + 1 });
    }
    let n = graph.len();
    let interior: Vec<bool> = (0..n).map(|v| dist[v] < r).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|v| if interior[v] { graph.degree(v as u32) as f64 } else { 0.0 })
        .collect();
    let order = farthest_first(dist, &interior);
    solver::solve_dirichlet(graph, &interior, &vec![0.0; n], &rhs, &order)
}

/// Expected escape time from the root to distance >= r. The ball must hold
/// one full shell beyond r so the interior adjacency is complete.
pub fn ball_escape_time(ball: &LoopspineBall, r: u64) -> Result<f64> {
    if ball.radius < r + 1 {
        return Err(Error::RadiusTooSmall { radius: ball.radius, needed: r + 1 });
    }
    let t = escape_profile(&ball.graph, &ball.dist, r)?;
    Ok(t[ball.graph.root() as usize])
}

/// Summary of one simulated walk from the root of a ball.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Vertex where the walk stopped.
    pub endpoint: u32,
    /// Steps actually taken.
    pub steps: u64,
    /// Visits to the root after time zero.
    pub returns: u64,
    /// Largest distance reached.
    pub max_distance: u64,
    /// exit_times[r - 1] = first time the walk reached distance >= r, for
    /// r = 1..=max_distance. Entries for r < radius are unbiased samples of
    /// the escape time from B(r).
    pub exit_times: Vec<u64>,
    /// True when the walk stopped on the frontier shell, where adjacency is
    /// incomplete, before spending its step budget.
    pub truncated: bool,
}

/// Simulates one walk from the root for at most `steps` steps, stopping
/// early (with the `truncated` flag) on the frontier shell at distance
/// radius - 1, beyond which transition probabilities are not materialized.
pub fn sample_trajectory<R: Rng + ?Sized>(
    ball: &LoopspineBall,
    steps: u64,
    rng: &mut R,
) -> Trajectory {
    let g = &ball.graph;
    let frontier = ball.radius - 1;
    let mut v = g.root();
    let mut t = 0u64;
    let mut returns = 0u64;
    let mut max_distance = 0u64;
    let mut exit_times = Vec::new();
    let mut truncated = frontier == 0;
    while t < steps && !truncated {
        let nb = g.neighbors(v);
        v = nb[rng.random_range(0..nb.len())];
        t += 1;
        if v == g.root() {
            returns += 1;
        }
        let d = ball.dist[v as usize];
        while max_distance < d {
            max_distance += 1;
            exit_times.push(t);
        }
        if d >= frontier {
            truncated = true;
        }
    }
    Trajectory {
        endpoint: v,
        steps: t,
        returns,
        max_distance,
        exit_times,
        truncated,
    }
}

/// Monte Carlo escape time from the root: (mean, standard error) over
/// independent walks run until they first reach distance >= r.
pub fn ball_escape_samples<R: Rng + ?Sized>(
    ball: &LoopspineBall,
    r: u64,
    trials: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if ball.radius < r + 1 {
        return Err(Error::RadiusTooSmall { radius: ball.radius, needed: r + 1 });
    }
    debug_assert!(trials >= 2);
    let g = &ball.graph;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for _ in 0..trials {
        let mut v = g.root();
        let mut steps = 0u64;
        while ball.dist[v as usize] < r {
            let nb = g.neighbors(v);
            v = nb[rng.random_range(0..nb.len())];
            steps += 1;
        }
        let s = steps as f64;
        sum += s;
        sumsq += s * s;
    }
    let mean = sum / trials as f64;
    let var = (sumsq - sum * sum / trials as f64) / (trials as f64 - 1.0);
    Ok((mean, (var.max(0.0) / trials as f64).sqrt()))
}

/// Interior vertices ordered farthest first; elimination in this order has
/// bounded fill on looptrees because cycles attach through single vertices.
pub(crate) fn farthest_first(dist: &[u64], interior: &[bool]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..dist.len() as u32)
        .filter(|&v| interior[v as usize])
        .collect();
    order.sort_by_key(|&v| std::cmp::Reverse(dist[v as usize]));
    order
}

//! Exponent extraction: log-log regression over ensemble means of ball
//! volumes, resistances, and escape times; spectral dimension from exact
//! return probabilities; and a total-variation check that balls of large
//! finite looptrees approach the law of the infinite sampler.

use crate::canon::canonical_form;
use crate::ensemble;
use crate::error::{Error, Result};
use crate::looptree::loop_transform;
use crate::offspring::OffspringDistribution;
use crate::resistance::ball_effective_resistance;
use crate::spine::{self, LoopspineBall};
use crate::tree;
use crate::walk;
use rand::RngCore;
use std::collections::HashMap;

/// Vertex budget for sampled balls; ensembles at the documented sizes stay
/// far below it.
// Materialized balls hold the graph in memory, so their cap is a memory
// bound. The count-only profile sampler stores nothing per vertex and its
// cap only limits runtime on freak realizations, so it can sit much higher.
const BALL_CAP: u64 = 1 << 24;
const PROFILE_CAP: u64 = 1 << 30;
const CONDITIONED_ATTEMPTS: u64 = 10_000_000;

/// Which points of a series enter a fit.
#[derive(Clone, Copy, Debug)]
pub enum Window {
    All,
    /// n at or above the geometric midpoint of the range, dropping
    /// small-n transients.
    UpperHalf,
    /// lo <= n <= hi.
    Range { lo: f64, hi: f64 },
}

/// Least-squares line through (log n, log y).
#[derive(Clone, Debug)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Regression standard error of the slope.
    pub stderr: f64,
    /// Smallest and largest n actually used.
    pub window: (f64, f64),
    pub points: usize,
}

pub fn fit_exponent(points: &[(f64, f64)], window: Window) -> Result<ExponentFit> {
    debug_assert!(
        points.windows(2).all(|w| w[0].0 < w[1].0),
        "n must increase"
    );
    let keep: Vec<(f64, f64)> = match window {
        Window::All => points.to_vec(),
        Window::UpperHalf => {
            let lo = points.first().map_or(0.0, |p| p.0);
            let hi = points.last().map_or(0.0, |p| p.0);
            let cut = (lo * hi).sqrt();
            points.iter().copied().filter(|p| p.0 >= cut).collect()
        }
        Window::Range { lo, hi } => points
            .iter()
            .copied()
            .filter(|p| p.0 >= lo && p.0 <= hi)
            .collect(),
    };
    if keep.len() < 4 {
        return Err(Error::TooFewPoints {
            have: keep.len(),
            need: 4,
        });
    }
    let k = keep.len() as f64;
    let xs: Vec<f64> = keep.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = keep
        .iter()
        .map(|p| {
            debug_assert!(p.1 > 0.0, "log fit needs positive values");
            p.1.ln()
        })
        .collect();
    let xbar = xs.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let stderr = (ssr.max(0.0) / ((k - 2.0) * sxx)).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        window: (keep[0].0, keep[keep.len() - 1].0),
        points: keep.len(),
    })
}

/// Spectral-dimension readout d_s = -2 * slope of log p_2n against log n.
#[derive(Clone, Debug)]
pub struct DsEstimate {
    pub ds: f64,
    pub fit: ExponentFit,
    /// The fitted series (n, p_2n), or (n, mean p_2n) when annealed.
    pub series: Vec<(f64, f64)>,
}

impl DsEstimate {
    /// Standard error of d_s propagated from the slope.
    pub fn stderr(&self) -> f64 {
        2.0 * self.fit.stderr
    }
}

fn ds_from_series(series: Vec<(f64, f64)>, window: Window) -> Result<DsEstimate> {
    let fit = fit_exponent(&series, window)?;
    Ok(DsEstimate {
        ds: -2.0 * fit.slope,
        fit,
        series,
    })
}

/// Exact kernel on one realization: ball of radius 2 n_max + 1, return
/// probabilities to time 2 n_max, fit over the window.
pub fn estimate_ds_quenched(
    dist: &OffspringDistribution,
    seed: u64,
    n_max: u64,
    window: Window,
) -> Result<DsEstimate> {
    let mut rng = ensemble::substream(seed, 0);
    let ball = spine::sample_ball(dist, 2 * n_max + 1, BALL_CAP, &mut rng)?;
    let p = walk::ball_return_probabilities(&ball, n_max)?;
    let series = (1..=n_max)
        .map(|n| (n as f64, p[(2 * n) as usize]))
        .collect();
    ds_from_series(series, window)
}

/// Averages exact per-realization kernels across independent realizations,
/// then fits log mean p_2n. Realization i uses substream (seed, i);
/// aggregation order is fixed, so results do not depend on thread count.
pub fn estimate_ds_annealed(
    dist: &OffspringDistribution,
    realizations: usize,
    n_max: u64,
    window: Window,
    seed: u64,
) -> Result<DsEstimate> {
    let runs: Vec<Result<Vec<f64>>> = ensemble::pmap(seed, realizations, |_, rng| {
        let ball = spine::sample_ball(dist, 2 * n_max + 1, BALL_CAP, rng)?;
        walk::ball_return_probabilities(&ball, n_max)
    });
    let mut mean = vec![0.0f64; 2 * n_max as usize + 1];
    for run in runs {
        for (m, v) in mean.iter_mut().zip(run?) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= realizations as f64;
    }
    let series = (1..=n_max)
        .map(|n| (n as f64, mean[(2 * n) as usize]))
        .collect();
    ds_from_series(series, window)
}

/// Mean of `eval` per radius over an ensemble of balls, one ball per
/// realization, sized to cover the largest radius.
fn ensemble_mean_points<F>(
    dist: &OffspringDistribution,
    realizations: usize,
    radii: &[u64],
    seed: u64,
    eval: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&LoopspineBall, u64) -> Result<f64> + Sync,
{
    debug_assert!(radii.windows(2).all(|w| w[0] < w[1]));
    let top = *radii.last().ok_or(Error::TooFewPoints { have: 0, need: 4 })?;
    let rows: Vec<Result<Vec<f64>>> = ensemble::pmap(seed, realizations, |_, rng| {
        let ball = spine::sample_ball(dist, top + 1, BALL_CAP, rng)?;
        radii.iter().map(|&n| eval(&ball, n)).collect()
    });
    let mut sums = vec![0.0f64; radii.len()];
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row?) {
            *s += v;
        }
    }
    Ok(radii
        .iter()
        .zip(sums)
        .map(|(&n, s)| (n as f64, s / realizations as f64))
        .collect())
}

/// Mean size of the open ball B(n) = {d < n} at each requested n over
/// independent realizations of the infinite looptree, so the chain control
/// gives |B(n)| = n exactly. Uses the count-only profile sampler: memory
/// stays flat even when individual balls run to millions of vertices.
pub fn mean_volume_points(
    dist: &OffspringDistribution,
    realizations: usize,
    radii: &[u64],
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    debug_assert!(radii.windows(2).all(|w| w[0] < w[1]));
    let top = *radii.last().ok_or(Error::TooFewPoints { have: 0, need: 4 })?;
    let rows: Vec<Result<Vec<u64>>> = ensemble::pmap(seed, realizations, |_, rng| {
        let profile = spine::sample_volume_profile(dist, top, PROFILE_CAP, rng)?;
        let mut volumes = Vec::with_capacity(radii.len());
        let mut acc = 0u64;
        let mut next = radii.iter();
        let mut want = next.next();
        for (d, &c) in profile.iter().enumerate() {
            while want == Some(&(d as u64)) {
                volumes.push(acc);
                want = next.next();
            }
            acc += c;
        }
        if want == Some(&top) {
            volumes.push(acc);
        }
        Ok(volumes)
    });
    let mut sums = vec![0.0f64; radii.len()];
    for row in rows {
        for (s, v) in sums.iter_mut().zip(row?) {
            *s += v as f64;
        }
    }
    Ok(radii
        .iter()
        .zip(sums)
        .map(|(&n, s)| (n as f64, s / realizations as f64))
        .collect())
}

/// Default fit for the ensemble exponent estimators: the upper dyadic half
/// of the supplied n, where slowly varying corrections have mostly died
/// off, falling back to the full range when fewer than four points
/// survive the cut.
fn fit_upper_half(pts: &[(f64, f64)]) -> Result<ExponentFit> {
    match fit_exponent(pts, Window::UpperHalf) {
        Err(Error::TooFewPoints { .. }) => fit_exponent(pts, Window::All),
        other => other,
    }
}

/// Slope of log Ê(V_n): ball volume means over independent realizations.
/// Theory: the volume growth exponent equals alpha.
pub fn estimate_volume_exponent(
    dist: &OffspringDistribution,
    realizations: usize,
    radii: &[u64],
    seed: u64,
) -> Result<ExponentFit> {
    let pts = mean_volume_points(dist, realizations, radii, seed)?;
    fit_upper_half(&pts)
}

/// Slope of log Ê(R_eff(root, complement of B(n))). Theory: exponent 1.
pub fn estimate_resistance_exponent(
    dist: &OffspringDistribution,
    realizations: usize,
    radii: &[u64],
    seed: u64,
) -> Result<ExponentFit> {
    let pts = ensemble_mean_points(dist, realizations, radii, seed, ball_effective_resistance)?;
    fit_upper_half(&pts)
}

/// Slope of log Ê(T_R), the exact expected escape time from the root.
/// Theory: exponent alpha + 1.
pub fn estimate_escape_exponent(
    dist: &OffspringDistribution,
    realizations: usize,
    radii: &[u64],
    seed: u64,
) -> Result<ExponentFit> {
    let pts = ensemble_mean_points(dist, realizations, radii, seed, walk::ball_escape_time)?;
    fit_upper_half(&pts)
}

fn empirical_law(draws: Vec<Result<String>>) -> Result<HashMap<String, u64>> {
    let mut counts = HashMap::new();
    for draw in draws {
        *counts.entry(draw?).or_insert(0u64) += 1;
    }
    Ok(counts)
}

fn total_variation(a: &HashMap<String, u64>, b: &HashMap<String, u64>) -> f64 {
    let ta: u64 = a.values().sum();
    let tb: u64 = b.values().sum();
    let mut dist = 0.0;
    for (class, &ca) in a {
        let cb = b.get(class).copied().unwrap_or(0);
        dist += (ca as f64 / ta as f64 - cb as f64 / tb as f64).abs();
    }
    for (class, &cb) in b {
        if !a.contains_key(class) {
            dist += cb as f64 / tb as f64;
        }
    }
    dist / 2.0
}

/// Total-variation distance, per tree size, between the empirical law of
/// the isomorphism class of the radius-`radius` ball of the looptree of a
/// conditioned size-N tree and that of the infinite looptree. Both sides
/// are sampled; the infinite-side sample is shared across sizes. Balls
/// hold the vertices at distance strictly below `radius`.
pub fn local_limit_test(
    dist: &OffspringDistribution,
    sizes: &[usize],
    radius: u64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let call_seed = |tag: u64| ensemble::substream(seed, tag).next_u64();
    let reference = empirical_law(ensemble::pmap(call_seed(0), samples, |_, rng| {
        spine::sample_ball(dist, radius, BALL_CAP, rng).map(|b| canonical_form(&b.graph))
    }))?;
    let mut out = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let law = empirical_law(ensemble::pmap(
            call_seed(k as u64 + 1),
            samples,
            |_, rng| {
                tree::sample_gw_conditioned(dist, n, CONDITIONED_ATTEMPTS, rng)
                    .map(|t| canonical_form(&loop_transform(&t).induced_ball(radius)))
            },
        ))?;
        out.push(total_variation(&reference, &law));
    }
    Ok(out)
}

//! Sparse Dirichlet solver for graph Laplacian systems.
//!
//! Solves `deg(v)·x(v) - Σ_{slots u of v} x(u) = rhs(v)` for every interior
//! vertex, with `x` pinned to given values outside. Elimination follows the
//! caller-supplied order; on looptrees a farthest-first (reverse breadth)
//! order keeps fill bounded because every cycle is attached by a single cut
//! vertex. The solution is verified against the original system; if direct
//! elimination degrades, a Jacobi-preconditioned conjugate gradient pass
//! takes over.

use crate::error::{Error, Result};
use crate::looptree::Looptree;

const RESIDUAL_TOL: f64 = 1e-9;
const CG_TOL: f64 = 1e-10;
const CG_MAX_ITERS: u64 = 100_000;

fn add_weight(row: &mut Vec<(u32, f64)>, u: u32, w: f64) {
    match row.iter_mut().find(|(x, _)| *x == u) {
        Some((_, s)) => *s += w,
        None => row.push((u, w)),
    }
}

fn remove_entry(row: &mut Vec<(u32, f64)>, u: u32) {
    if let Some(i) = row.iter().position(|(x, _)| *x == u) {
        row.swap_remove(i);
    }
}

struct Pivot {
    v: u32,
    diag: f64,
    rhs: f64,
    row: Vec<(u32, f64)>,
}

/// Dirichlet solve: `order` must list every interior vertex exactly once.
/// Returns the full x vector (boundary entries copied from `boundary`).
pub(crate) fn solve_dirichlet(
    graph: &Looptree,
    interior: &[bool],
    boundary: &[f64],
    rhs: &[f64],
    order: &[u32],
) -> Result<Vec<f64>> {
    let n = graph.len();
    debug_assert_eq!(interior.len(), n);
    debug_assert_eq!(boundary.len(), n);
    debug_assert_eq!(rhs.len(), n);
    debug_assert_eq!(order.len(), interior.iter().filter(|&&b| b).count());

    if order.is_empty() {
        return Ok(boundary.to_vec());
    }

    if let Some(x) = eliminate(graph, interior, boundary, rhs, order) {
        if residual_ok(graph, interior, boundary, rhs, &x) {
            return Ok(x);
        }
    }
    let x = conjugate_gradient(graph, interior, boundary, rhs)?;
    if residual_ok(graph, interior, boundary, rhs, &x) {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: CG_MAX_ITERS,
            residual: residual_inf(graph, interior, boundary, rhs, &x),
            target: RESIDUAL_TOL,
        })
    }
}

/// Gaussian elimination on the interior block, boundary terms folded into
/// the right-hand side. Returns None on a non-positive pivot (the interior
/// Laplacian block is positive definite, so that only happens through
/// severe cancellation).
fn eliminate(
    graph: &Looptree,
    interior: &[bool],
    boundary: &[f64],
    rhs: &[f64],
    order: &[u32],
) -> Option<Vec<f64>> {
    let n = graph.len();
    let mut diag = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for v in 0..n {
        if !interior[v] {
            continue;
        }
        diag[v] = graph.degree(v as u32) as f64;
        b[v] = rhs[v];
        for &u in graph.neighbors(v as u32) {
            if interior[u as usize] {
                // parallel edges collapse into one entry of weight 2
                add_weight(&mut rows[v], u, 1.0);
            } else {
                b[v] += boundary[u as usize];
            }
        }
    }

    let mut pivots: Vec<Pivot> = Vec::with_capacity(order.len());
    for &vu in order {
        let v = vu as usize;
        let d = diag[v];
        if d <= 1e-300 {
            return None;
        }
        let row = std::mem::take(&mut rows[v]);
        for (i, &(u, w)) in row.iter().enumerate() {
            let ui = u as usize;
            remove_entry(&mut rows[ui], vu);
            diag[ui] -= w * w / d;
            b[ui] += w / d * b[v];
            for &(u2, w2) in &row[i + 1..] {
                add_weight(&mut rows[ui], u2, w * w2 / d);
                add_weight(&mut rows[u2 as usize], u, w * w2 / d);
            }
        }
        pivots.push(Pivot { v: vu, diag: d, rhs: b[v], row });
    }

    let mut x = boundary.to_vec();
    for p in pivots.iter().rev() {
        let mut s = p.rhs;
        for &(u, w) in &p.row {
            s += w * x[u as usize];
        }
        x[p.v as usize] = s / p.diag;
    }
    Some(x)
}

fn residual_inf(
    graph: &Looptree,
    interior: &[bool],
    boundary: &[f64],
    rhs: &[f64],
    x: &[f64],
) -> f64 {
    let mut worst = 0.0f64;
    for v in 0..graph.len() {
        if !interior[v] {
            debug_assert_eq!(x[v], boundary[v]);
            continue;
        }
        let mut r = graph.degree(v as u32) as f64 * x[v] - rhs[v];
        for &u in graph.neighbors(v as u32) {
            r -= x[u as usize];
        }
        worst = worst.max(r.abs());
    }
    worst
}

fn residual_ok(
    graph: &Looptree,
    interior: &[bool],
    boundary: &[f64],
    rhs: &[f64],
    x: &[f64],
) -> bool {
    let xmax = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let bmax = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let scale = 1.0 + 8.0 * xmax + bmax;
    residual_inf(graph, interior, boundary, rhs, x) <= RESIDUAL_TOL * scale
}

/// Jacobi-preconditioned CG on the interior block.
fn conjugate_gradient(
    graph: &Looptree,
    interior: &[bool],
    boundary: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = graph.len();
    let idx: Vec<u32> = (0..n as u32).filter(|&v| interior[v as usize]).collect();
    let mut pos = vec![u32::MAX; n];
    for (i, &v) in idx.iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    let m = idx.len();

    let mut b = vec![0.0f64; m];
    let mut inv_diag = vec![0.0f64; m];
    for (i, &v) in idx.iter().enumerate() {
        let mut bi = rhs[v as usize];
        for &u in graph.neighbors(v) {
            if !interior[u as usize] {
                bi += boundary[u as usize];
            }
        }
        b[i] = bi;
        inv_diag[i] = 1.0 / graph.degree(v) as f64;
    }

    let apply = |y: &[f64], out: &mut [f64]| {
        for (i, &v) in idx.iter().enumerate() {
            let mut s = graph.degree(v) as f64 * y[i];
            for &u in graph.neighbors(v) {
                let p = pos[u as usize];
                if p != u32::MAX {
                    s -= y[p as usize];
                }
            }
            out[i] = s;
        }
    };

    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut y = vec![0.0f64; m];
    if bnorm == 0.0 {
        return Ok(expand(boundary, &idx, &y));
    }
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; m];
    for it in 0..CG_MAX_ITERS {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm,
                target: CG_TOL,
            });
        }
        let alpha = rz / pap;
        for i in 0..m {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= CG_TOL * bnorm {
            return Ok(expand(boundary, &idx, &y));
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: CG_MAX_ITERS,
        residual: r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm,
        target: CG_TOL,
    })
}

fn expand(boundary: &[f64], idx: &[u32], y: &[f64]) -> Vec<f64> {
    let mut x = boundary.to_vec();
    for (i, &v) in idx.iter().enumerate() {
        x[v as usize] = y[i];
    }
    x
}

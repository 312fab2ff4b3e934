//! Shared oracle helpers for the integration suites. Everything here is
//! deliberately naive: exhaustive enumeration, queue BFS, dense elimination.
//! The library is judged against these, not the other way round.

#![allow(dead_code)]

/// All depth-first outdegree sequences of plane trees on n vertices.
/// There are Catalan(n-1) of them.
pub fn enumerate_outdegrees(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    // `open` = vertices promised but not yet listed; starts at 1 (the root).
    fn rec(n: usize, open: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            if open == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if open == 0 {
            return;
        }
        let remaining = (n - cur.len()) as u64;
        // after this vertex: open - 1 + k more promised; they must fit
        for k in 0..remaining {
            let new_open = open - 1 + k;
            if new_open > remaining - 1 {
                continue;
            }
            cur.push(k as u32);
            rec(n, new_open, cur, out);
            cur.pop();
        }
    }
    rec(n, 1, &mut cur, &mut out);
    out
}

/// Plain queue BFS over an adjacency-list multigraph; u32::MAX = unreached.
pub fn bfs_distances(adj: &[Vec<u32>], root: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = std::collections::VecDeque::new();
    dist[root as usize] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v as usize] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Dense Gaussian elimination with partial pivoting; oracle for the sparse
/// solvers. Solves A x = b in place.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        assert!(a[col][col].abs() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Catalan numbers for enumeration counts.
pub fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for i in 0..n {
        c = c * 2 * (2 * i as u64 + 1) / (i as u64 + 2);
    }
    c
}

/// Exact return probability by summing over every t-step trajectory;
/// exponential in t, usable for t up to ~8 on degree-4 graphs.
pub fn brute_force_return_probability(adj: &[Vec<u32>], root: u32, t: usize) -> f64 {
    fn rec(adj: &[Vec<u32>], v: u32, root: u32, left: usize, p: f64) -> f64 {
        if left == 0 {
            return if v == root { p } else { 0.0 };
        }
        let nbrs = &adj[v as usize];
        let q = p / nbrs.len() as f64;
        nbrs.iter().map(|&u| rec(adj, u, root, left - 1, q)).sum()
    }
    rec(adj, root, root, t, 1.0)
}

/// Reference generator for balls of the infinite looptree, built the slow
/// way: materialize the size-biased spine tree down to tree depth `radius`
/// (spine child uniform among the children, independent unconditioned
/// offspring everywhere else), loop-transform the whole finite tree, and
/// take the induced ball. Every tree edge adds at least one unit of
/// looptree distance, so vertices below the truncation depth cannot enter
/// the ball and the truncation is invisible at this radius.
pub fn reference_ball<R: rand::Rng>(
    dist: &loopwalk::offspring::OffspringDistribution,
    radius: u64,
    rng: &mut R,
) -> loopwalk::looptree::Looptree {
    use loopwalk::offspring::OffspringDistribution;

    fn emit_gw<R: rand::Rng>(
        dist: &OffspringDistribution,
        depth: u64,
        limit: u64,
        out: &mut Vec<u32>,
        rng: &mut R,
    ) {
        if depth == limit {
            out.push(0);
            return;
        }
        let k = dist.sample(rng);
        out.push(k as u32);
        for _ in 0..k {
            emit_gw(dist, depth + 1, limit, out, rng);
        }
    }

    fn emit_spine<R: rand::Rng>(
        dist: &OffspringDistribution,
        depth: u64,
        limit: u64,
        out: &mut Vec<u32>,
        rng: &mut R,
    ) {
        if depth == limit {
            out.push(0);
            return;
        }
        let x = dist.sample_size_biased(rng);
        let u = rng.random_range(1..=x);
        out.push(x as u32);
        for j in 1..=x {
            if j == u {
                emit_spine(dist, depth + 1, limit, out, rng);
            } else {
                emit_gw(dist, depth + 1, limit, out, rng);
            }
        }
    }

    let mut out = Vec::new();
    emit_spine(dist, 0, radius, &mut out, rng);
    let tree = loopwalk::tree::PlaneTree::from_outdegrees(out).unwrap();
    loopwalk::looptree::loop_transform(&tree).induced_ball(radius)
}

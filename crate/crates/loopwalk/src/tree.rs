//! Finite plane trees in depth-first order, their Lukasiewicz coding, and
//! Galton-Watson samplers (free, and conditioned on total size via the
//! cyclic-rotation bijection).

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use rand::Rng;

const NONE: u32 = u32::MAX;

/// A rooted plane tree. Vertices are numbered 0..len in depth-first order,
/// so every parent precedes its children and vertex 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTree {
    out: Vec<u32>,
    parent: Vec<u32>,
    first_child: Vec<u32>,
    next_sibling: Vec<u32>,
}

impl PlaneTree {
    /// Builds a tree from its depth-first outdegree sequence, validating
    /// that the sequence encodes an excursion (equivalently, that the walk
    /// with steps out_i - 1 first hits -1 exactly at the last vertex).
    pub fn from_outdegrees(out: Vec<u32>) -> Result<Self> {
        let n = out.len();
        if n == 0 {
            return Err(Error::InvalidExcursion {
                index: 0,
                reason: "empty outdegree sequence",
            });
        }
        let mut parent = vec![NONE; n];
        let mut first_child = vec![NONE; n];
        let mut next_sibling = vec![NONE; n];
        // stack entries: (vertex, children still to attach, last child seen)
        let mut stack: Vec<(u32, u32, u32)> = Vec::new();
        for j in 0..n {
            let v = j as u32;
            if j > 0 {
                let top = match stack.last_mut() {
                    Some(t) => t,
                    // the walk already returned to -1: too many vertices
                    None => {
                        return Err(Error::InvalidExcursion {
                            index: j - 1,
                            reason: "walk hits -1 before the last step",
                        })
                    }
                };
                parent[j] = top.0;
                if top.2 == NONE {
                    first_child[top.0 as usize] = v;
                } else {
                    next_sibling[top.2 as usize] = v;
                }
                top.2 = v;
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if out[j] > 0 {
                stack.push((v, out[j], NONE));
            }
        }
        if !stack.is_empty() {
            return Err(Error::InvalidExcursion {
                index: n - 1,
                reason: "walk ends above -1: outdegrees promise more vertices",
            });
        }
        Ok(Self {
            out,
            parent,
            first_child,
            next_sibling,
        })
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Outdegrees in depth-first order.
    pub fn out(&self) -> &[u32] {
        &self.out
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != NONE).then_some(p)
    }

    /// Children of v, left to right.
    pub fn children(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        let first = self.first_child[v as usize];
        std::iter::successors((first != NONE).then_some(first), move |&c| {
            let s = self.next_sibling[c as usize];
            (s != NONE).then_some(s)
        })
    }

    /// Depth of every vertex; single pass, parents precede children.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.len()];
        for v in 1..self.len() {
            d[v] = d[self.parent[v] as usize] + 1;
        }
        d
    }

    pub fn height(&self) -> u64 {
        u64::from(self.depths().into_iter().max().unwrap_or(0))
    }
}

/// Steps of the Lukasiewicz walk: outdegree minus one, in depth-first order.
pub fn encode_lukasiewicz(tree: &PlaneTree) -> Vec<i64> {
    tree.out.iter().map(|&k| i64::from(k) - 1).collect()
}

/// Inverse of [`encode_lukasiewicz`]; rejects step sequences that are not
/// excursions, reporting the first offending position.
pub fn decode_lukasiewicz(steps: &[i64]) -> Result<PlaneTree> {
    let mut out = Vec::with_capacity(steps.len());
    for (i, &s) in steps.iter().enumerate() {
        if s < -1 {
            return Err(Error::InvalidExcursion {
                index: i,
                reason: "step below -1",
            });
        }
        out.push((s + 1) as u32);
    }
    PlaneTree::from_outdegrees(out)
}

/// Maximum of the Lukasiewicz walk over the whole excursion.
pub fn max_lukasiewicz(tree: &PlaneTree) -> i64 {
    let mut w = 0i64;
    let mut best = i64::MIN;
    for &k in &tree.out {
        w += i64::from(k) - 1;
        best = best.max(w);
    }
    best
}

/// Samples an unconditioned Galton-Watson tree in breadth-first order and
/// converts to depth-first. Fails once more than `cap` vertices exist.
pub fn sample_gw<R: Rng>(
    dist: &OffspringDistribution,
    cap: usize,
    rng: &mut R,
) -> Result<PlaneTree> {
    // breadth-first realization: outdegree of vertex i in BFS order
    let mut bfs_out: Vec<u32> = Vec::new();
    let mut pending: usize = 1;
    while pending > 0 {
        if bfs_out.len() + pending > cap {
            return Err(Error::CapExceeded { cap: cap as u64 });
        }
        let k = dist.sample(rng);
        let k = u32::try_from(k).map_err(|_| Error::CapExceeded { cap: cap as u64 })?;
        bfs_out.push(k);
        pending = pending - 1 + k as usize;
    }
    Ok(bfs_to_dfs(&bfs_out))
}

/// Reorders a breadth-first outdegree sequence into depth-first and builds
/// the tree. In BFS order the children of vertex v are the contiguous block
/// starting at 1 + sum of earlier outdegrees.
fn bfs_to_dfs(bfs_out: &[u32]) -> PlaneTree {
    let n = bfs_out.len();
    let mut child_start = vec![0usize; n + 1];
    for i in 0..n {
        child_start[i + 1] = child_start[i] + bfs_out[i] as usize;
    }
    // child block of BFS vertex i: 1 + child_start[i] .. 1 + child_start[i+1]
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        out.push(bfs_out[v]);
        let lo = 1 + child_start[v];
        let hi = 1 + child_start[v + 1];
        for c in (lo..hi).rev() {
            stack.push(c);
        }
    }
    debug_assert_eq!(out.len(), n);
    PlaneTree::from_outdegrees(out).expect("breadth-first realization is always an excursion")
}

/// Samples a Galton-Watson tree conditioned on having exactly `size`
/// vertices. Draws `size` offspring values, accepts when they sum to
/// size - 1, and rotates the accepted sequence to the unique cyclic shift
/// that forms an excursion (start just after the first minimum of the
/// partial sums).
pub fn sample_gw_conditioned<R: Rng>(
    dist: &OffspringDistribution,
    size: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<PlaneTree> {
    check_size_possible(dist, size)?;
    if size == 1 {
        return PlaneTree::from_outdegrees(vec![0]);
    }
    let target = (size - 1) as u64;
    let mut draws: Vec<u32> = Vec::with_capacity(size);
    for _ in 0..max_attempts {
        draws.clear();
        let mut sum = 0u64;
        let mut ok = true;
        for _ in 0..size {
            let k = dist.sample(rng);
            sum += k;
            if sum > target {
                ok = false;
                break;
            }
            draws.push(k as u32);
        }
        if !(ok && sum == target && draws.len() == size) {
            continue;
        }
        // first argmin of the partial sums of (k_i - 1)
        let mut w = 0i64;
        let mut best = i64::MAX;
        let mut split = 0usize;
        for (i, &k) in draws.iter().enumerate() {
            w += i64::from(k) - 1;
            if w < best {
                best = w;
                split = i + 1;
            }
        }
        let mut out = Vec::with_capacity(size);
        out.extend_from_slice(&draws[split % size..]);
        out.extend_from_slice(&draws[..split % size]);
        let tree = PlaneTree::from_outdegrees(out)
            .expect("rotation at the first minimum is an excursion");
        return Ok(tree);
    }
    Err(Error::AttemptsExhausted {
        attempts: max_attempts,
        rate: 1.0 / (max_attempts.max(1) as f64),
    })
}

/// A size is attainable iff the law has leaves, is not concentrated on 0,
/// and the span of the nonzero support divides size - 1.
fn check_size_possible(dist: &OffspringDistribution, size: usize) -> Result<()> {
    let bad = Err(Error::ImpossibleSize { size });
    if size == 0 {
        return bad;
    }
    if !dist.has_leaf() {
        return bad;
    }
    if size == 1 {
        return Ok(());
    }
    match dist.support_gcd() {
        // only leaves: no tree bigger than one vertex
        0 => bad,
        d => {
            if (size as u64 - 1) % d == 0 {
                Ok(())
            } else {
                bad
            }
        }
    }
}

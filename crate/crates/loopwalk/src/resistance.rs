//! Effective resistance between the root and distance shells, and small
//! separating sets that certify the resistance lower bound.
//!
//! For the resistance, a unit potential is placed at the root, zero on
//! {d >= n}, and the harmonic extension's total current out of the root is
//! inverted. For the lower bound, a set of at most two vertices at a common
//! distance D separating the root from {d >= n} witnesses R >= D/2: current
//! must cross every spine cycle between the root and the set through two
//! parallel arcs, the shorter of which realizes at least half its length in
//! resistance.

use crate::error::{Error, Result};
use crate::looptree::Looptree;
use crate::solver;
use crate::spine::{LoopspineBall, SpineCycle, VertexKind};
use crate::walk::farthest_first;
use std::collections::VecDeque;

/// Which construction produced a separating set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparatorCase {
    /// The first spine cycle carries a tall outgrowth; the root's own
    /// neighbors (at most two) cut it off from everything.
    RootNeighbors,
    /// A later cycle carries a tall outgrowth; its base cuts the spine there.
    SpecialVertex,
    /// No tall outgrowth and the next special vertex is close: the two
    /// vertices flanking that cycle at its passage distance cut it.
    CyclePair,
    /// No tall outgrowth and the spine advances slowly: all spine vertices
    /// at distance exactly floor(n/2) form the cut.
    LevelCut,
}

/// A set of vertices, all at `distance` from the root, whose removal
/// disconnects the root from every vertex at distance >= n.
#[derive(Clone, Debug)]
pub struct Separator {
    pub set: Vec<u32>,
    pub distance: u64,
    pub case: SeparatorCase,
}

/// Effective resistance between the root and the shell {d >= n}, with unit
/// conductance per adjacency slot. `dist` must hold distances from the root
/// and the graph must be complete on {d < n} with its boundary shell present.
pub fn effective_resistance(graph: &Looptree, dist: &[u64], n: u64) -> Result<f64> {
    let maxd = dist.iter().copied().max().unwrap_or(0);
    if maxd < n {
        return Err(Error::RadiusTooSmall { radius: maxd + 1, needed: n + 1 });
    }
    let len = graph.len();
    let root = graph.root();
    let mut interior = vec![false; len];
    let mut boundary = vec![0.0f64; len];
    boundary[root as usize] = 1.0;
    for v in 0..len {
        interior[v] = v as u32 != root && dist[v] < n;
    }
    let order = farthest_first(dist, &interior);
    let h = solver::solve_dirichlet(graph, &interior, &boundary, &vec![0.0; len], &order)?;
    debug_assert!(h.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
    let current: f64 = graph
        .neighbors(root)
        .iter()
        .map(|&u| 1.0 - h[u as usize])
        .sum();
    debug_assert!(current > 0.0);
    Ok(1.0 / current)
}

/// The certified lower bound distance/2 from the separating set: current
/// into {d >= n} crosses the chain of cycles leading to the set in series.
pub fn separator_lower_bound(ball: &LoopspineBall, n: u64) -> Result<f64> {
    Ok(find_separator(ball, n)?.distance as f64 / 2.0)
}

/// Effective resistance from the root of a sampled ball to {d >= n}. The
/// ball must hold one full shell beyond n.
pub fn ball_effective_resistance(ball: &LoopspineBall, n: u64) -> Result<f64> {
    if ball.radius < n + 1 {
        return Err(Error::RadiusTooSmall { radius: ball.radius, needed: n + 1 });
    }
    effective_resistance(&ball.graph, &ball.dist, n)
}

/// True when removing `set` leaves no vertex at distance >= n reachable
/// from the root.
pub fn verify_separation(ball: &LoopspineBall, set: &[u32], n: u64) -> bool {
    let g = &ball.graph;
    let len = g.len();
    let mut blocked = vec![false; len];
    for &v in set {
        blocked[v as usize] = true;
    }
    if blocked[g.root() as usize] {
        return true;
    }
    let mut seen = vec![false; len];
    let mut queue = VecDeque::new();
    seen[g.root() as usize] = true;
    queue.push_back(g.root());
    while let Some(v) = queue.pop_front() {
        if ball.dist[v as usize] >= n {
            return false;
        }
        for &u in g.neighbors(v) {
            let ui = u as usize;
            if !seen[ui] && !blocked[ui] {
                seen[ui] = true;
                queue.push_back(u);
            }
        }
    }
    true
}

/// Whether some outgrowth rooted on this cycle, at a vertex within distance
/// n/2, reaches relative height n/2. Every such mark is decidable inside a
/// ball of radius >= n + 1.
fn cycle_has_tall_outgrowth(ball: &LoopspineBall, cycle: &SpineCycle, n: u64) -> bool {
    cycle
        .left
        .iter()
        .chain(cycle.right.iter())
        .any(|&v| match ball.kind[v as usize] {
            VertexKind::Open { outgrowth } if 2 * ball.dist[v as usize] <= n => ball
                .outgrowth_marked(outgrowth, n)
                .expect("mark decidable within n/2 when radius exceeds n"),
            _ => false,
        })
}

/// Finds a separating set between the root and {d >= n}, together with its
/// common distance. The set has at most two vertices when n is even; the
/// effective resistance to the shell is then at least distance/2.
///
/// Requires n >= 2 and a ball of radius >= n + 1: marks within distance n/2
/// must be decidable and the shell {d >= n} must be present.
pub fn find_separator(ball: &LoopspineBall, n: u64) -> Result<Separator> {
    assert!(n >= 2, "separator level must be at least 2");
    if ball.radius < n + 1 {
        return Err(Error::RadiusTooSmall { radius: ball.radius, needed: n + 1 });
    }

    // first cycle whose farthest vertex reaches distance n/2
    let deep = |c: &SpineCycle| 2 * (c.base_dist + (c.x + 1) / 2) >= n;
    let last = ball
        .cycles
        .iter()
        .position(deep)
        .expect("spine reaches the ball radius, past n/2");

    // every cycle before `last` lies strictly inside distance n/2, so its
    // opens are all scanned; the first tall outgrowth wins
    let sep = 'found: {
        for (i, cycle) in ball.cycles[..=last].iter().enumerate() {
            if !cycle_has_tall_outgrowth(ball, cycle, n) {
                continue;
            }
            if i == 0 {
                let root = ball.graph.root();
                let mut set: Vec<u32> = ball.graph.neighbors(root).to_vec();
                set.sort_unstable();
                set.dedup();
                break 'found Separator {
                    set,
                    distance: 1,
                    case: SeparatorCase::RootNeighbors,
                };
            }
            break 'found Separator {
                set: vec![cycle.base],
                distance: cycle.base_dist,
                case: SeparatorCase::SpecialVertex,
            };
        }

        let cycle = &ball.cycles[last];
        let passage = cycle.u.min(cycle.x + 1 - cycle.u);
        let next_dist = cycle.base_dist + passage;
        if 2 * next_dist < n {
            // the two vertices at the passage distance flank both arcs
            let a = cycle.id_at_offset(cycle.u).expect("within the ball");
            let b = cycle
                .id_at_offset(cycle.x + 1 - cycle.u)
                .expect("within the ball");
            let set = if a == b { vec![a] } else { vec![a, b] };
            break 'found Separator {
                set,
                distance: next_dist,
                case: SeparatorCase::CyclePair,
            };
        }

        // all spine vertices at distance exactly floor(n/2); cycles past
        // `last` start at next_dist >= that level and never return to it
        let level = n / 2;
        let mut set = Vec::new();
        for cycle in &ball.cycles[..=last] {
            if cycle.base_dist >= level {
                continue;
            }
            let rel = level - cycle.base_dist;
            if 2 * rel > cycle.x + 1 {
                continue;
            }
            let near = cycle.id_at_offset(rel).expect("within the ball");
            set.push(near);
            let far_offset = cycle.x + 1 - rel;
            if far_offset != rel {
                set.push(cycle.id_at_offset(far_offset).expect("within the ball"));
            }
        }
        Separator {
            set,
            distance: level,
            case: SeparatorCase::LevelCut,
        }
    };

    debug_assert!(!sep.set.is_empty());
    debug_assert!(sep
        .set
        .iter()
        .all(|&v| ball.dist[v as usize] == sep.distance));
    debug_assert!(verify_separation(ball, &sep.set, n));
    Ok(sep)
}

//! Lazy generation of balls in the infinite random looptree.
//!
//! The infinite object is a one-ended chain of cycles: cycle i has length
//! X_i + 1 with X_i drawn from the size-biased offspring law, is glued to
//! the previous cycle at a special vertex, and passes the chain on through
//! a uniformly chosen position U_i. Every non-special cycle vertex is open
//! and carries an independent Galton-Watson looptree outgrowth rooted at it.
//!
//! Nothing at distance >= radius is ever materialized. A cycle whose far
//! side exceeds the budget is laid down as two arc runs starting at its
//! base; the missing middle only matters for vertices outside the ball.
//! Distances are assigned analytically (base distance plus the shorter way
//! around), which is exact because every cycle meets the root side in a
//! single cut vertex; the test suite re-derives them by BFS.

use crate::error::{Error, Result};
use crate::looptree::Looptree;
use crate::offspring::OffspringDistribution;
use rand::Rng;
use std::collections::VecDeque;

/// One cycle of the spine chain as drawn in phase one (no vertices yet).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainCycle {
    /// Cycle length minus one: the size-biased offspring draw.
    pub x: u64,
    /// Position of the next special vertex, uniform on 1..=x.
    pub u: u64,
    /// Distance from the root to this cycle's base vertex.
    pub base_dist: u64,
}

/// Draws spine cycles until the base distance leaves the expandable zone
/// (distance < radius - 1). Cheap: three words per cycle, no vertices.
pub fn sample_chain<R: Rng>(
    dist: &OffspringDistribution,
    radius: u64,
    rng: &mut R,
) -> Vec<ChainCycle> {
    let mut chain = Vec::new();
    let mut d = 0u64;
    while d + 1 < radius {
        let x = dist.sample_size_biased(rng);
        let u = rng.random_range(1..=x);
        chain.push(ChainCycle { x, u, base_dist: d });
        d += u.min(x + 1 - u);
    }
    chain
}

/// Number of spine vertices (special and open, no outgrowths) within
/// distance n of the root: the base plus, per cycle, the offsets whose
/// shorter arc fits the remaining budget. The chain must have been sampled
/// with radius at least n + 1 so every contributing cycle is present.
pub fn chain_volume(chain: &[ChainCycle], n: u64) -> u64 {
    1 + chain
        .iter()
        .filter(|c| c.base_dist < n)
        .map(|c| c.x.min(2 * (n - c.base_dist)))
        .sum::<u64>()
}

/// Counts ball vertices by distance without materializing the graph:
/// profile[d] is the number of vertices at distance exactly d < radius, so
/// prefix sums give the same volumes a sampled ball would report. Vertices
/// are visited in a different order than the ball builder uses, so the two
/// samplers agree in law but not draw for draw on a shared stream. Memory
/// stays O(radius + depth) however large the ball gets, which is what makes
/// big volume ensembles affordable.
pub fn sample_volume_profile<R: Rng>(
    dist: &OffspringDistribution,
    radius: u64,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if radius == 0 {
        return Err(Error::RadiusTooSmall {
            radius: 0,
            needed: 1,
        });
    }
    fn bump(profile: &mut [u64], count: &mut u64, cap: u64, d: u64) -> Result<()> {
        if *count >= cap {
            return Err(Error::CapExceeded { cap });
        }
        *count += 1;
        profile[d as usize] += 1;
        Ok(())
    }
    let chain = sample_chain(dist, radius, rng);
    let mut profile = vec![0u64; radius as usize];
    let mut count = 0u64;
    bump(&mut profile, &mut count, cap, 0)?;
    // (distance, remaining budget >= 1) of counted vertices still to expand
    let mut stack: Vec<(u64, u64)> = Vec::new();
    for c in &chain {
        // offsets with shorter arc rel are materialized iff base + rel
        // fits inside the ball, matching the builder's two-run pruning
        let s = radius - 1 - c.base_dist;
        let rel_u = c.u.min(c.x + 1 - c.u);
        for rel in 1..=s {
            let mult = if c.x >= 2 * rel {
                2
            } else if c.x + 1 == 2 * rel {
                1
            } else {
                break;
            };
            let d = c.base_dist + rel;
            for _ in 0..mult {
                bump(&mut profile, &mut count, cap, d)?;
            }
            // all offsets at this arc distance are open except the one
            // continuing the chain; opens on the rim (rel == s) stay closed
            let opens = mult - u64::from(rel == rel_u);
            if rel < s {
                for _ in 0..opens {
                    stack.push((d, s - rel));
                }
            }
        }
    }
    while let Some((d, b)) = stack.pop() {
        let k = dist.sample(rng);
        for rel in 1..=b {
            let mult = if k >= 2 * rel {
                2
            } else if k + 1 == 2 * rel {
                1
            } else {
                break;
            };
            for _ in 0..mult {
                bump(&mut profile, &mut count, cap, d + rel)?;
                if rel < b {
                    stack.push((d + rel, b - rel));
                }
            }
        }
    }
    Ok(profile)
}

/// What a materialized vertex is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// On the special path x_1, x_2, ... (closed: no outgrowth).
    Special,
    /// A non-special spine cycle vertex; roots the indexed outgrowth.
    Open { outgrowth: u32 },
    /// Inside the indexed outgrowth.
    OutgrowthPart { outgrowth: u32 },
}

/// Height bookkeeping for one outgrowth, maintained during expansion.
#[derive(Clone, Debug)]
pub struct OutgrowthRecord {
    /// The open spine vertex the outgrowth hangs at.
    pub vertex: u32,
    /// Distance of that vertex from the root.
    pub root_dist: u64,
    /// Lower bound on the outgrowth's looptree height: the realized
    /// maximum, pushed up to radius - root_dist when arcs were pruned.
    pub height_lb: u64,
    /// True when the whole outgrowth was materialized (no frontier vertex,
    /// no pruned arc), so height_lb is the exact height.
    pub exact: bool,
}

/// One materialized spine cycle with its vertex ids.
#[derive(Clone, Debug)]
pub struct SpineCycle {
    pub x: u64,
    pub u: u64,
    pub base_dist: u64,
    /// Id of the base vertex x_i.
    pub base: u32,
    /// Ids at offsets 1..=left.len(), ascending.
    pub left: Vec<u32>,
    /// Ids at offsets x - right.len() + 1 ..= x, ascending by offset.
    pub right: Vec<u32>,
    /// Id of the next special vertex (offset u) when materialized.
    pub next: Option<u32>,
}

impl SpineCycle {
    /// Vertex id at a cycle offset, if that offset was materialized.
    pub fn id_at_offset(&self, o: u64) -> Option<u32> {
        if o >= 1 && o <= self.left.len() as u64 {
            return Some(self.left[(o - 1) as usize]);
        }
        let first_right = self.x - self.right.len() as u64 + 1;
        if o >= first_right && o <= self.x {
            return Some(self.right[(o - first_right) as usize]);
        }
        None
    }
}

/// A ball of the infinite looptree: everything at distance < radius.
#[derive(Clone, Debug)]
pub struct LoopspineBall {
    pub radius: u64,
    pub graph: Looptree,
    /// Exact distance from the root, per vertex.
    pub dist: Vec<u64>,
    pub kind: Vec<VertexKind>,
    pub outgrowths: Vec<OutgrowthRecord>,
    pub cycles: Vec<SpineCycle>,
}

impl LoopspineBall {
    /// Number of vertices within distance n; requires n < radius.
    pub fn volume(&self, n: u64) -> u64 {
        debug_assert!(n < self.radius);
        self.dist.iter().filter(|&&d| d <= n).count() as u64
    }

    /// Whether outgrowth `og` has looptree height at least n/2, when that
    /// is decidable from the materialized part. Always decidable for roots
    /// with 2 * root_dist <= n provided radius >= n + 1.
    pub fn outgrowth_marked(&self, og: u32, n: u64) -> Option<bool> {
        let rec = &self.outgrowths[og as usize];
        if 2 * rec.height_lb >= n {
            Some(true)
        } else if rec.exact {
            Some(false)
        } else {
            None
        }
    }
}

struct Builder {
    radius: u64,
    cap: u64,
    graph: Looptree,
    dist: Vec<u64>,
    kind: Vec<VertexKind>,
    outgrowths: Vec<OutgrowthRecord>,
    /// Vertices awaiting an offspring draw, with their outgrowth index.
    queue: VecDeque<(u32, u32)>,
}

impl Builder {
    fn new(radius: u64, cap: u64) -> Self {
        Self {
            radius,
            cap,
            graph: Looptree::with_vertices(0, 0),
            dist: Vec::new(),
            kind: Vec::new(),
            outgrowths: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn materialize(&mut self, d: u64, kind: VertexKind) -> Result<u32> {
        if self.dist.len() as u64 >= self.cap {
            return Err(Error::CapExceeded { cap: self.cap });
        }
        let id = self.graph.add_vertex();
        self.dist.push(d);
        self.kind.push(kind);
        Ok(id)
    }

    /// Creates an open vertex together with its outgrowth record and, when
    /// it is expandable, queues it.
    fn materialize_open(&mut self, d: u64) -> Result<u32> {
        let og = self.outgrowths.len() as u32;
        let id = self.materialize(d, VertexKind::Open { outgrowth: og })?;
        let expandable = d + 1 < self.radius;
        self.outgrowths.push(OutgrowthRecord {
            vertex: id,
            root_dist: d,
            height_lb: 0,
            exact: expandable,
        });
        if expandable {
            self.queue.push_back((id, og));
        }
        Ok(id)
    }

    /// Materializes an outgrowth vertex, folding it into the height
    /// bookkeeping of its outgrowth and queueing it when expandable.
    fn materialize_part(&mut self, d: u64, og: u32) -> Result<u32> {
        let id = self.materialize(d, VertexKind::OutgrowthPart { outgrowth: og })?;
        let rec = &mut self.outgrowths[og as usize];
        rec.height_lb = rec.height_lb.max(d - rec.root_dist);
        if d + 1 < self.radius {
            self.queue.push_back((id, og));
        } else {
            // frontier vertex: its subtree is unexplored
            rec.exact = false;
        }
        Ok(id)
    }

    /// Lays one spine cycle at `base`, materializing the offsets whose
    /// shorter arc fits the budget as two runs walked away from the base.
    fn lay_spine_cycle(&mut self, base: u32, cc: &ChainCycle) -> Result<SpineCycle> {
        let s = self.radius - 1 - cc.base_dist;
        let whole = cc.x <= 2 * s;
        let left_len = if whole { cc.x } else { s };
        let mut left = Vec::with_capacity(left_len as usize);
        let mut right = Vec::new();
        let mut next = None;
        let mut prev = base;
        for o in 1..=left_len {
            let d = cc.base_dist + o.min(cc.x + 1 - o);
            let id = if o == cc.u {
                self.materialize(d, VertexKind::Special)?
            } else {
                self.materialize_open(d)?
            };
            if o == cc.u {
                next = Some(id);
            }
            self.graph.add_edge(prev, id);
            prev = id;
            left.push(id);
        }
        if whole {
            self.graph.add_edge(prev, base);
        } else {
            let mut prev = base;
            for o in (cc.x + 1 - s..=cc.x).rev() {
                let d = cc.base_dist + (cc.x + 1 - o);
                let id = if o == cc.u {
                    self.materialize(d, VertexKind::Special)?
                } else {
                    self.materialize_open(d)?
                };
                if o == cc.u {
                    next = Some(id);
                }
                self.graph.add_edge(prev, id);
                prev = id;
                right.push(id);
            }
            right.reverse();
        }
        Ok(SpineCycle {
            x: cc.x,
            u: cc.u,
            base_dist: cc.base_dist,
            base,
            left,
            right,
            next,
        })
    }

    /// Expands one queued vertex: draws its offspring count and lays the
    /// resulting outgrowth cycle within the budget.
    fn expand<R: Rng>(
        &mut self,
        v: u32,
        og: u32,
        dist: &OffspringDistribution,
        rng: &mut R,
    ) -> Result<()> {
        let d_v = self.dist[v as usize];
        debug_assert!(d_v + 1 < self.radius);
        let k = dist.sample(rng);
        if k == 0 {
            return Ok(());
        }
        let s = self.radius - 1 - d_v;
        let whole = k <= 2 * s;
        let left_len = if whole { k } else { s };
        let mut prev = v;
        for o in 1..=left_len {
            let d = d_v + o.min(k + 1 - o);
            let id = self.materialize_part(d, og)?;
            self.graph.add_edge(prev, id);
            prev = id;
        }
        if whole {
            self.graph.add_edge(prev, v);
        } else {
            let mut prev = v;
            for o in (k + 1 - s..=k).rev() {
                let d = d_v + (k + 1 - o);
                let id = self.materialize_part(d, og)?;
                self.graph.add_edge(prev, id);
                prev = id;
            }
            // the pruned middle starts at distance radius or beyond, so the
            // outgrowth reaches at least to the ball boundary
            let rec = &mut self.outgrowths[og as usize];
            rec.height_lb = rec.height_lb.max(self.radius - rec.root_dist);
            rec.exact = false;
        }
        Ok(())
    }
}

/// Samples the ball of the given radius around the root of the infinite
/// looptree, erroring out when more than `cap` vertices materialize.
pub fn sample_ball<R: Rng>(
    dist: &OffspringDistribution,
    radius: u64,
    cap: u64,
    rng: &mut R,
) -> Result<LoopspineBall> {
    if radius == 0 {
        return Err(Error::RadiusTooSmall {
            radius: 0,
            needed: 1,
        });
    }
    let chain = sample_chain(dist, radius, rng);
    let mut b = Builder::new(radius, cap);
    let root = b.materialize(0, VertexKind::Special)?;
    let mut cycles = Vec::with_capacity(chain.len());
    let mut cur = root;
    for cc in &chain {
        let rec = b.lay_spine_cycle(cur, cc)?;
        let next = rec.next;
        cycles.push(rec);
        match next {
            Some(id) => cur = id,
            // the next special vertex lies outside the ball; the chain
            // sampler stopped right after this cycle
            None => break,
        }
    }
    while let Some((v, og)) = b.queue.pop_front() {
        b.expand(v, og, dist, rng)?;
    }
    Ok(LoopspineBall {
        radius,
        graph: b.graph,
        dist: b.dist,
        kind: b.kind,
        outgrowths: b.outgrowths,
        cycles,
    })
}

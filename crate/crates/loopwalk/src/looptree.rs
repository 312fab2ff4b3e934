//! Rooted looptrees: the multigraphs obtained from plane trees by replacing
//! every vertex together with its children by a cycle (a double edge when
//! there is a single child). Every vertex lies on at most two cycles, so
//! degrees are at most four and adjacency fits in a fixed-size array.

use crate::tree::PlaneTree;
use arrayvec::ArrayVec;
use std::collections::VecDeque;

/// A rooted multigraph with maximum degree four. Parallel edges appear as
/// repeated entries in the adjacency lists, so walk kernels weight them
/// correctly for free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Looptree {
    root: u32,
    adj: Vec<ArrayVec<u32, 4>>,
}

impl Looptree {
    pub(crate) fn with_vertices(n: usize, root: u32) -> Self {
        // n = 0 starts an incremental build; the root is added first
        debug_assert!(n == 0 || (root as usize) < n);
        Self {
            root,
            adj: vec![ArrayVec::new(); n],
        }
    }

    pub(crate) fn add_vertex(&mut self) -> u32 {
        let id = self.adj.len() as u32;
        self.adj.push(ArrayVec::new());
        id
    }

    /// Adds one edge (one more parallel strand if it already exists).
    /// Panics if either endpoint would exceed degree four, which cannot
    /// happen for graphs produced by the loop transform.
    pub(crate) fn add_edge(&mut self, u: u32, v: u32) {
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Neighbors with multiplicity, in insertion order.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn edge_count(&self) -> u64 {
        let slots: u64 = self.adj.iter().map(|a| a.len() as u64).sum();
        debug_assert_eq!(slots % 2, 0);
        slots / 2
    }

    /// Graph distances from the root by breadth-first search.
    pub fn distances(&self) -> Vec<u64> {
        self.distances_from(self.root)
    }

    pub fn distances_from(&self, source: u32) -> Vec<u64> {
        let mut dist = vec![u64::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if dist[w as usize] == u64::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn height(&self) -> u64 {
        self.distances()
            .into_iter()
            .filter(|&d| d != u64::MAX)
            .max()
            .unwrap_or(0)
    }

    /// Induced subgraph on the vertices at distance strictly below `radius`
    /// from the root, relabeled in increasing order of old id. Matches the
    /// materialization rule of the lazy ball sampler.
    pub fn induced_ball(&self, radius: u64) -> Looptree {
        let dist = self.distances();
        let mut new_id = vec![u32::MAX; self.len()];
        let mut kept = 0u32;
        for v in 0..self.len() {
            if dist[v] < radius {
                new_id[v] = kept;
                kept += 1;
            }
        }
        let mut g = Looptree::with_vertices(kept as usize, new_id[self.root as usize]);
        for v in 0..self.len() {
            if new_id[v] == u32::MAX {
                continue;
            }
            for &w in self.neighbors(v as u32) {
                // each strand appears in both endpoint lists; add from the
                // smaller id so multiplicity carries over exactly once
                if new_id[w as usize] != u32::MAX && w as usize > v {
                    g.add_edge(new_id[v], new_id[w as usize]);
                }
            }
        }
        g
    }
}

/// The loop transform: each vertex of outdegree k, together with its
/// children in plane order, becomes a (k+1)-cycle sharing the parent
/// vertex. Vertex ids are inherited from the tree.
pub fn loop_transform(tree: &PlaneTree) -> Looptree {
    let mut g = Looptree::with_vertices(tree.len(), 0);
    for v in 0..tree.len() as u32 {
        let mut prev = v;
        let mut any = false;
        for c in tree.children(v) {
            g.add_edge(prev, c);
            prev = c;
            any = true;
        }
        if any {
            g.add_edge(prev, v);
        }
    }
    g
}

/// Root distances in the loop transform, computed without building the
/// graph: every cycle meets the root side in the single cut vertex at its
/// parent, so the distance to a child is the parent's distance plus the
/// shorter way around the parent's cycle.
pub fn loop_distances(tree: &PlaneTree) -> Vec<u64> {
    let mut dist = vec![0u64; tree.len()];
    for v in 0..tree.len() as u32 {
        let k = u64::from(tree.out()[v as usize]);
        for (i, c) in tree.children(v).enumerate() {
            let o = i as u64 + 1;
            dist[c as usize] = dist[v as usize] + o.min(k + 1 - o);
        }
    }
    dist
}

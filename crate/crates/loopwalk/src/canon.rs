//! Canonical string forms for rooted cacti, the shape every looptree and
//! every induced ball of one takes. Two graphs receive equal strings
//! exactly when some root-preserving multigraph isomorphism relates them.

use crate::looptree::Looptree;

enum Block {
    /// An edge on no cycle, held by its deep endpoint.
    Bridge(u32),
    /// Cycle vertices below the top, in one traversal order. A parallel
    /// edge is the path of length one.
    Cycle(Vec<u32>),
}

/// Canonical form of a rooted cactus.
///
/// Every block (maximal two-connected piece) is a bridge or a cycle, and
/// hangs below its vertex nearest the root. A vertex's form is the sorted
/// list of its block forms; a cycle reads its members in whichever of its
/// two directions compares smaller. Equal strings are therefore exactly
/// root-preserving isomorphism, by induction on block depth.
///
/// Panics in debug builds if some edge lies on two cycles, which no
/// looptree or induced subgraph of one can produce.
pub fn canonical_form(graph: &Looptree) -> String {
    let n = graph.len();
    if n == 0 {
        return String::new();
    }
    // one id per strand, created from its smaller endpoint
    let mut inc: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    let mut m = 0u32;
    for v in 0..n as u32 {
        for &w in graph.neighbors(v) {
            if w > v {
                inc[v as usize].push((m, w));
                inc[w as usize].push((m, v));
                m += 1;
            }
        }
    }

    let root = graph.root();
    let mut visited = vec![false; n];
    let mut parent = vec![u32::MAX; n];
    let mut parent_edge = vec![u32::MAX; n];
    let mut depth = vec![0u32; n];
    let mut tree_edge = vec![false; m as usize];
    let mut in_cycle = vec![false; m as usize];
    let mut preorder = Vec::with_capacity(n);
    let mut attached: Vec<Vec<Block>> = (0..n).map(|_| Vec::new()).collect();

    visited[root as usize] = true;
    preorder.push(root);
    let mut stack: Vec<(u32, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let v = top.0;
        let Some(&(e, w)) = inc[v as usize].get(top.1) else {
            stack.pop();
            continue;
        };
        top.1 += 1;
        if tree_edge[e as usize] {
            continue;
        }
        if !visited[w as usize] {
            visited[w as usize] = true;
            parent[w as usize] = v;
            parent_edge[w as usize] = e;
            depth[w as usize] = depth[v as usize] + 1;
            tree_edge[e as usize] = true;
            preorder.push(w);
            stack.push((w, 0));
        } else if depth[v as usize] > depth[w as usize] {
            // the deep end of a non-tree edge closes one cycle: the tree
            // path down from w, then this edge back up
            let mut chain = vec![v];
            let mut cur = v;
            while parent[cur as usize] != w {
                cur = parent[cur as usize];
                chain.push(cur);
            }
            for &x in &chain {
                let pe = parent_edge[x as usize] as usize;
                debug_assert!(!in_cycle[pe], "edge on two cycles: not a cactus");
                in_cycle[pe] = true;
            }
            chain.reverse();
            attached[w as usize].push(Block::Cycle(chain));
        }
    }
    debug_assert_eq!(preorder.len(), n, "graph is connected");

    for v in 0..n as u32 {
        if v != root && !in_cycle[parent_edge[v as usize] as usize] {
            attached[parent[v as usize] as usize].push(Block::Bridge(v));
        }
    }

    // children precede parents in reverse preorder
    let mut form: Vec<String> = vec![String::new(); n];
    for &v in preorder.iter().rev() {
        let mut parts: Vec<String> = attached[v as usize]
            .iter()
            .map(|block| match block {
                Block::Bridge(w) => format!("b{}", form[*w as usize]),
                Block::Cycle(path) => {
                    let read = |iter: &mut dyn Iterator<Item = &u32>| {
                        iter.map(|&x| form[x as usize].as_str())
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    let fwd = read(&mut path.iter());
                    let rev = read(&mut path.iter().rev());
                    format!("c{}({})", path.len() + 1, fwd.min(rev))
                }
            })
            .collect();
        parts.sort_unstable();
        form[v as usize] = format!("({})", parts.concat());
    }
    std::mem::take(&mut form[root as usize])
}

//! Minimum spanning tree via Prim's algorithm.

use crate::error::{Error, Result};
use crate::structure::DistanceMatrix;

/// Spanning tree as an edge list in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    /// `(label_a, label_b, weight)` per edge, M−1 edges total.
    pub edges: Vec<(String, String, f64)>,
    pub total_weight: f64,
}

/// Prim's algorithm over a dense distance matrix, growing from index 0.
/// Frontier ties break toward the lowest node index. Non-finite
/// distances are treated as missing edges; if the graph is disconnected
/// there is no spanning tree.
pub fn mst_prim(d: &DistanceMatrix) -> Result<SpanningTree> {
    let n = d.dim();
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 nodes, got {n}")));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    in_tree[0] = true;
    for j in 1..n {
        let w = d.get(0, j);
        if w.is_finite() {
            best[j] = w;
            parent[j] = 0;
        }
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    for _ in 1..n {
        // lowest (weight, index) among nodes outside the tree
        let mut pick = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && best[j].is_finite() && (pick == usize::MAX || best[j] < best[pick]) {
                pick = j;
            }
        }
        if pick == usize::MAX {
            return Err(Error::NoSpanningTree);
        }
        in_tree[pick] = true;
        total += best[pick];
        edges.push((
            d.labels()[parent[pick]].clone(),
            d.labels()[pick].clone(),
            best[pick],
        ));
        for j in 0..n {
            if !in_tree[j] {
                let w = d.get(pick, j);
                if w.is_finite() && w < best[j] {
                    best[j] = w;
                    parent[j] = pick;
                }
            }
        }
    }
    Ok(SpanningTree {
        edges,
        total_weight: total,
    })
}

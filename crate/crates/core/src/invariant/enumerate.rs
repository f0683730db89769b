use std::collections::BTreeSet;

use super::graph::{GraphFlavor, Slot, TraceGraph};
use crate::error::{Error, Result};

/// Connected two-vertex graphs: r edges between the vertices, (p − r)/2 loops on each.
///
/// Real flavor yields one graph per r ∈ {p, p−2, …}. Parity flavor needs even p;
/// loops sit on positions (2t−1, 2t) and the r joining edges follow the cyclic
/// shift t ↦ t+1 on the remaining block.
pub fn enumerate_rank2(order: usize, flavor: GraphFlavor) -> Vec<TraceGraph> {
    if order == 0 || (flavor == GraphFlavor::Parity && !order.is_multiple_of(2)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut r = order;
    while r >= 1 {
        let loops = (order - r) / 2;
        let mut edges = Vec::with_capacity(loops * 2 + r);
        for v in 0..2 {
            for t in 0..loops {
                edges.push((Slot::new(v, 2 * t), Slot::new(v, 2 * t + 1)));
            }
        }
        let base = 2 * loops;
        for k in 0..r {
            let partner = match flavor {
                GraphFlavor::Real => k,
                GraphFlavor::Parity => (k + 1) % r,
            };
            edges.push((Slot::new(0, base + k), Slot::new(1, base + partner)));
        }
        out.push(TraceGraph::unchecked(order, 2, flavor, edges));
        if r < 2 {
            break;
        }
        r -= 2;
    }
    out
}

/// Real-flavor graph with the given multiplicity matrix; loops take the lowest positions.
pub fn from_adjacency(order: usize, adj: &[Vec<usize>]) -> Result<TraceGraph> {
    let n = adj.len();
    let mut next = vec![0usize; n];
    let mut take = |v: usize| {
        let s = Slot::new(v, next[v]);
        next[v] += 1;
        s
    };
    let mut edges = Vec::new();
    for v in 0..n {
        for _ in 0..adj[v][v] {
            let a = take(v);
            let b = take(v);
            edges.push((a, b));
        }
    }
    for u in 0..n {
        for w in u + 1..n {
            for _ in 0..adj[u][w] {
                let a = take(u);
                let b = take(w);
                edges.push((a, b));
            }
        }
    }
    TraceGraph::new(order, n, GraphFlavor::Real, edges)
}

/// Every p-regular multigraph (loops allowed, possibly disconnected) with at
/// most `max_edges` edges, one per isomorphism class, by increasing vertex count.
pub fn enumerate_multigraphs(order: usize, max_edges: usize) -> Result<Vec<TraceGraph>> {
    if order == 0 {
        return Err(Error::InvalidGraph("order must be positive".into()));
    }
    let mut out = Vec::new();
    let mut n = 1;
    while n * order <= 2 * max_edges {
        if (n * order).is_multiple_of(2) {
            match order {
                1 => out.push(matching_graph(n)?),
                2 => {
                    for parts in partitions(n, n) {
                        out.push(cycles_graph(&parts)?);
                    }
                }
                _ => out.extend(generic(order, n)?),
            }
        }
        n += 1;
    }
    Ok(out)
}

fn matching_graph(n: usize) -> Result<TraceGraph> {
    let edges = (0..n / 2).map(|k| (Slot::new(2 * k, 0), Slot::new(2 * k + 1, 0))).collect();
    TraceGraph::new(1, n, GraphFlavor::Real, edges)
}

/// Disjoint union of cycles; a cycle of length 1 is a loop, of length 2 a double edge.
fn cycles_graph(lengths: &[usize]) -> Result<TraceGraph> {
    let mut edges = Vec::new();
    let mut start = 0;
    for &k in lengths {
        for i in 0..k {
            edges.push((Slot::new(start + i, 1), Slot::new(start + (i + 1) % k, 0)));
        }
        start += k;
    }
    TraceGraph::new(2, start, GraphFlavor::Real, edges)
}

/// Partitions of `n` into parts ≤ `max`, parts non-increasing.
fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn generic(order: usize, n: usize) -> Result<Vec<TraceGraph>> {
    let mut adj = vec![vec![0usize; n]; n];
    let mut rem = vec![order; n];
    let mut found = Vec::new();
    fill(0, 0, &mut adj, &mut rem, &mut found);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in found {
        let g = from_adjacency(order, &a)?;
        if seen.insert(g.multigraph_key()) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Assigns loops at (v, v) and multiplicities (v, w) for w > v in row-major order.
fn fill(v: usize, w: usize, adj: &mut Vec<Vec<usize>>, rem: &mut Vec<usize>, found: &mut Vec<Vec<Vec<usize>>>) {
    let n = adj.len();
    if v == n {
        found.push(adj.clone());
        return;
    }
    if w == n {
        if rem[v] == 0 {
            fill(v + 1, v + 1, adj, rem, found);
        }
        return;
    }
    if w == v {
        for l in 0..=rem[v] / 2 {
            adj[v][v] = l;
            rem[v] -= 2 * l;
            fill(v, w + 1, adj, rem, found);
            rem[v] += 2 * l;
        }
        adj[v][v] = 0;
        return;
    }
    for m in 0..=rem[v].min(rem[w]) {
        adj[v][w] = m;
        adj[w][v] = m;
        rem[v] -= m;
        rem[w] -= m;
        fill(v, w + 1, adj, rem, found);
        rem[v] += m;
        rem[w] += m;
    }
    adj[v][w] = 0;
    adj[w][v] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank2_counts() {
        assert_eq!(enumerate_rank2(1, GraphFlavor::Real).len(), 1);
        assert_eq!(enumerate_rank2(2, GraphFlavor::Real).len(), 1);
        let g5 = enumerate_rank2(5, GraphFlavor::Real);
        assert_eq!(g5.len(), 3);
        let r3 = &g5[1];
        assert_eq!(r3.adjacency(), vec![vec![1, 3], vec![3, 1]]);
        assert!(enumerate_rank2(3, GraphFlavor::Parity).is_empty());
        let g6 = enumerate_rank2(6, GraphFlavor::Parity);
        assert_eq!(g6.len(), 3);
        for g in g6.iter().chain(&g5) {
            let v = g.validate();
            assert!(v.is_ok() && v.connected);
        }
        let keys: BTreeSet<_> = g5.iter().map(|g| g.multigraph_key()).collect();
        assert_eq!(keys.len(), g5.len());
    }

    #[test]
    fn multigraph_counts() {
        let counts: Vec<usize> = (1..=4).map(|p| enumerate_multigraphs(p, 4).unwrap().len()).collect();
        // p=1: n=2,4,6,8; p=2: partitions of 1..4; p=3: n=2 (2 graphs); p=4: n=1 (1), n=2 (3)
        assert_eq!(counts, vec![4, 1 + 2 + 3 + 5, 2, 4]);
        for p in 1..=8 {
            for g in enumerate_multigraphs(p, 8).unwrap() {
                assert!(g.validate().is_ok());
                assert!(g.num_edges() <= 8);
            }
        }
    }

    #[test]
    fn cubic_four_vertex_classes() {
        let gs = enumerate_multigraphs(3, 6).unwrap();
        let four: Vec<_> = gs.iter().filter(|g| g.vertices() == 4).collect();
        let keys: BTreeSet<_> = four.iter().map(|g| g.multigraph_key()).collect();
        assert_eq!(keys.len(), four.len());
        assert!(four.iter().any(|g| g.adjacency().iter().all(|r| r.iter().filter(|&&m| m == 1).count() == 3)));
    }
}

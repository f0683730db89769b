use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-edge at `position` (0-based) of `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub vertex: usize,
    pub position: usize,
}

impl Slot {
    pub fn new(vertex: usize, position: usize) -> Self {
        Self { vertex, position }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFlavor {
    Real,
    /// Every edge joins an odd position to an even one.
    Parity,
}

impl GraphFlavor {
    pub fn name(self) -> &'static str {
        match self {
            GraphFlavor::Real => "real",
            GraphFlavor::Parity => "parity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyGraph,
    SlotOutOfRange(Slot),
    SlotReuse(Slot),
    MissingSlot(Slot),
    Parity(Slot, Slot),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |s: &Slot| format!("[{},{}]", s.vertex + 1, s.position + 1);
        match self {
            Violation::EmptyGraph => write!(f, "empty graph"),
            Violation::SlotOutOfRange(a) => write!(f, "slot out of range {}", s(a)),
            Violation::SlotReuse(a) => write!(f, "slot reuse {}", s(a)),
            Violation::MissingSlot(a) => write!(f, "missing slot {}", s(a)),
            Violation::Parity(a, b) => write!(f, "parity {} - {}", s(a), s(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub connected: bool,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// p-regular multigraph given as a perfect matching on the n·p vertex slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceGraph {
    order: usize,
    vertices: usize,
    flavor: GraphFlavor,
    edges: Vec<(Slot, Slot)>,
}

impl TraceGraph {
    /// Builds a graph and rejects it if [`TraceGraph::validate`] reports violations.
    pub fn new(order: usize, vertices: usize, flavor: GraphFlavor, edges: Vec<(Slot, Slot)>) -> Result<Self> {
        let g = Self::unchecked(order, vertices, flavor, edges);
        let v = g.validate();
        if v.is_ok() {
            Ok(g)
        } else {
            let list: Vec<String> = v.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidGraph(list.join("; ")))
        }
    }

    pub fn unchecked(order: usize, vertices: usize, flavor: GraphFlavor, edges: Vec<(Slot, Slot)>) -> Self {
        Self { order, vertices, flavor, edges }
    }

    /// Graph from the edge labels around each vertex; every label must occur twice.
    pub fn from_vertex_labels(order: usize, flavor: GraphFlavor, labels: &[Vec<usize>]) -> Result<Self> {
        let mut ends: BTreeMap<usize, Vec<Slot>> = BTreeMap::new();
        for (v, row) in labels.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGraph(format!("vertex {v} has {} half-edges, expected {order}", row.len())));
            }
            for (k, &e) in row.iter().enumerate() {
                ends.entry(e).or_default().push(Slot::new(v, k));
            }
        }
        let mut edges = Vec::new();
        for (label, slots) in ends {
            if slots.len() != 2 {
                return Err(Error::InvalidGraph(format!("edge label {label} used {} times", slots.len())));
            }
            edges.push((slots[0], slots[1]));
        }
        Self::new(order, labels.len(), flavor, edges)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn flavor(&self) -> GraphFlavor {
        self.flavor
    }

    pub fn edges(&self) -> &[(Slot, Slot)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();
        if self.vertices == 0 || self.order == 0 {
            violations.push(Violation::EmptyGraph);
        }
        let mut seen = vec![false; self.vertices * self.order];
        for &(a, b) in &self.edges {
            for s in [a, b] {
                if s.vertex >= self.vertices || s.position >= self.order {
                    violations.push(Violation::SlotOutOfRange(s));
                    continue;
                }
                let k = s.vertex * self.order + s.position;
                if seen[k] {
                    violations.push(Violation::SlotReuse(s));
                }
                seen[k] = true;
            }
            if self.flavor == GraphFlavor::Parity && a.position % 2 == b.position % 2 {
                violations.push(Violation::Parity(a, b));
            }
        }
        for (k, &hit) in seen.iter().enumerate() {
            if !hit {
                violations.push(Violation::MissingSlot(Slot::new(k / self.order, k % self.order)));
            }
        }
        Validation { violations, connected: self.is_connected() }
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for &(a, b) in &self.edges {
            if a.vertex < self.vertices && b.vertex < self.vertices {
                let (x, y) = (find(&mut parent, a.vertex), find(&mut parent, b.vertex));
                parent[x] = y;
            }
        }
        let root = find(&mut parent, 0);
        (1..self.vertices).all(|v| find(&mut parent, v) == root)
    }

    /// Edge id incident to each slot, indexed by vertex then position.
    pub fn slot_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![usize::MAX; self.order]; self.vertices];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            out[a.vertex][a.position] = e;
            out[b.vertex][b.position] = e;
        }
        out
    }

    /// Symmetric multiplicity matrix; the diagonal counts self-loops.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0; self.vertices]; self.vertices];
        for &(a, b) in &self.edges {
            if a.vertex == b.vertex {
                m[a.vertex][a.vertex] += 1;
            } else {
                m[a.vertex][b.vertex] += 1;
                m[b.vertex][a.vertex] += 1;
            }
        }
        m
    }

    /// Isomorphism-invariant key of the underlying multigraph (positions forgotten):
    /// sorted degree signature plus the lexicographically least relabeled adjacency.
    pub fn multigraph_key(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let n = self.vertices;
        let mut sig: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut row = adj[v].clone();
                row.sort_unstable();
                (adj[v][v], row)
            })
            .collect();
        sig.sort();
        let mut best: Option<Vec<usize>> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let mut key = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                for j in i..n {
                    key.push(adj[p[i]][p[j]]);
                }
            }
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        });
        let mut out: Vec<usize> = sig.iter().flat_map(|(l, r)| std::iter::once(*l).chain(r.iter().copied())).collect();
        out.push(usize::MAX);
        out.extend(best.unwrap_or_default());
        out
    }
}

fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Melon pairing convention between the two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MelonStyle {
    /// Position t to position t.
    Real,
    /// Position t of the first vertex to position t+1 of the second, cyclically.
    Hermitian,
    /// Positions 2t and 2t−1 swapped between the vertices.
    SelfDual,
}

pub fn melon_graph(order: usize, style: MelonStyle) -> Result<TraceGraph> {
    if order == 0 {
        return Err(Error::InvalidGraph("melon needs p ≥ 1".into()));
    }
    if style != MelonStyle::Real && !order.is_multiple_of(2) {
        return Err(Error::InvalidGraph(format!("parity melon needs even p, got {order}")));
    }
    let partner = |t: usize| match style {
        MelonStyle::Real => t,
        MelonStyle::Hermitian => (t + 1) % order,
        MelonStyle::SelfDual => t ^ 1,
    };
    let flavor = if style == MelonStyle::Real { GraphFlavor::Real } else { GraphFlavor::Parity };
    let edges = (0..order).map(|t| (Slot::new(0, t), Slot::new(1, partner(t)))).collect();
    TraceGraph::new(order, 2, flavor, edges)
}

/// One vertex with loops on positions (1,2), (3,4), …; parity-legal.
pub fn bouquet_graph(order: usize) -> Result<TraceGraph> {
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidGraph(format!("bouquet needs even p, got {order}")));
    }
    let edges = (0..order / 2).map(|t| (Slot::new(0, 2 * t), Slot::new(0, 2 * t + 1))).collect();
    TraceGraph::new(order, 1, GraphFlavor::Parity, edges)
}

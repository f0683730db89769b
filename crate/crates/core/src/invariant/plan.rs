use std::borrow::Cow;

use num_complex::Complex64;

use super::graph::{GraphFlavor, TraceGraph};
use crate::error::{Error, Result};
use crate::tensor::{CanonicalTensor, DenseTensor};

/// Largest intermediate a plan may allocate.
pub const MAX_INTERMEDIATE: u128 = 1 << 24;

/// Tolerance on the imaginary part of invariants reported as real.
pub const REAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStrategy {
    /// Contract the pair sharing most edges; ties by smaller result, then index order.
    Greedy,
    /// Dynamic programming over vertex subsets.
    Optimal,
    /// Optimal for at most 6 vertices, greedy beyond.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    left: usize,
    right: usize,
    labels: Vec<usize>,
}

/// Pairwise contraction order for one graph at one dimension.
///
/// Nodes 0..n are the vertices after their self-loops are traced; step k
/// creates node n + k.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    order: usize,
    dim: usize,
    slot_labels: Vec<Vec<usize>>,
    node_labels: Vec<Vec<usize>>,
    steps: Vec<Step>,
    cost: f64,
    max_entries: u128,
}

fn entries(dim: usize, rank: usize) -> u128 {
    (dim as u128).checked_pow(rank as u32).unwrap_or(u128::MAX)
}

fn merge(a: &[usize], b: &[usize]) -> (Vec<usize>, usize) {
    let shared = a.iter().filter(|l| b.contains(l)).count();
    let mut out: Vec<usize> = a.iter().filter(|l| !b.contains(l)).copied().collect();
    out.extend(b.iter().filter(|l| !a.contains(l)));
    (out, shared)
}

/// Work of a pairwise contraction: one multiply-add per assignment of every
/// label touching either side.
fn step_cost(dim: usize, a: &[usize], b: &[usize]) -> f64 {
    let (out, shared) = merge(a, b);
    (dim as f64).powi((out.len() + shared) as i32)
}

impl ContractionPlan {
    pub fn new(graph: &TraceGraph, dim: usize, strategy: PlanStrategy) -> Result<Self> {
        let v = graph.validate();
        if !v.is_ok() {
            let list: Vec<String> = v.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidGraph(list.join("; ")));
        }
        let slot_labels = graph.slot_edges();
        let node_labels: Vec<Vec<usize>> = slot_labels
            .iter()
            .map(|row| row.iter().filter(|l| row.iter().filter(|m| m == l).count() == 1).copied().collect())
            .collect();
        let n = node_labels.len();
        let use_optimal = match strategy {
            PlanStrategy::Greedy => false,
            PlanStrategy::Optimal => true,
            PlanStrategy::Auto => n <= 6,
        };
        let steps = if n <= 1 {
            Vec::new()
        } else if use_optimal {
            optimal_steps(dim, &node_labels)
        } else {
            greedy_steps(&node_labels)
        };
        let mut labels = node_labels.clone();
        let mut cost = 0.0;
        let mut max_entries = node_labels.iter().map(|l| entries(dim, l.len())).max().unwrap_or(1);
        for s in &steps {
            cost += step_cost(dim, &labels[s.left], &labels[s.right]);
            max_entries = max_entries.max(entries(dim, s.labels.len()));
            labels.push(s.labels.clone());
        }
        if max_entries > MAX_INTERMEDIATE {
            return Err(Error::PlanTooLarge { entries: max_entries });
        }
        Ok(Self { order: graph.order(), dim, slot_labels, node_labels, steps, cost, max_entries })
    }

    /// Estimated multiply-adds of the pairwise contractions.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn max_intermediate(&self) -> u128 {
        self.max_entries
    }

    /// (left, right) node pairs in execution order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.steps.iter().map(|s| (s.left, s.right)).collect()
    }

    pub fn execute(&self, t: &DenseTensor) -> Result<Complex64> {
        if t.order() != self.order {
            return Err(Error::OrderMismatch { expected: self.order, got: t.order() });
        }
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.dim() });
        }
        let num_labels = self.slot_labels.iter().flatten().max().map_or(0, |m| m + 1);
        let mut nodes: Vec<Option<Cow<'_, [Complex64]>>> = Vec::new();
        for (row, out) in self.slot_labels.iter().zip(&self.node_labels) {
            if row.len() == out.len() {
                nodes.push(Some(Cow::Borrowed(t.data())));
            } else {
                let loops: Vec<usize> = dedup(row.iter().filter(|l| !out.contains(l)).copied());
                let data = kernel(self.dim, num_labels, &[(row, t.data())], out, &loops);
                nodes.push(Some(Cow::Owned(data)));
            }
        }
        let mut labels = self.node_labels.clone();
        for s in &self.steps {
            let a = nodes[s.left].take().expect("node consumed twice");
            let b = nodes[s.right].take().expect("node consumed twice");
            let shared: Vec<usize> = labels[s.left].iter().filter(|l| labels[s.right].contains(l)).copied().collect();
            let data =
                kernel(self.dim, num_labels, &[(&labels[s.left], &a), (&labels[s.right], &b)], &s.labels, &shared);
            nodes.push(Some(Cow::Owned(data)));
            labels.push(s.labels.clone());
        }
        let mut total = Complex64::new(1.0, 0.0);
        for node in nodes.into_iter().flatten() {
            total *= node[0];
        }
        Ok(total)
    }
}

fn dedup(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = Vec::new();
    for x in it {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

/// out[out_labels] = Σ_{sum_labels} ∏ inputs, where each input is a row-major
/// tensor whose legs carry the given labels (a repeated label is a diagonal).
fn kernel(
    dim: usize,
    num_labels: usize,
    inputs: &[(&[usize], &[Complex64])],
    out_labels: &[usize],
    sum_labels: &[usize],
) -> Vec<Complex64> {
    let strides: Vec<Vec<usize>> = inputs
        .iter()
        .map(|(legs, _)| {
            let mut s = vec![0usize; num_labels];
            let mut stride = 1;
            for &l in legs.iter().rev() {
                s[l] += stride;
                stride *= dim;
            }
            s
        })
        .collect();
    let order: Vec<usize> = out_labels.iter().chain(sum_labels).copied().collect();
    let out_len = dim.pow(out_labels.len() as u32);
    let inner = dim.pow(sum_labels.len() as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    let mut digits = vec![0usize; order.len()];
    let mut offsets = vec![0usize; inputs.len()];
    for slot in out.iter_mut() {
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..inner {
            let mut prod = Complex64::new(1.0, 0.0);
            for (k, (_, data)) in inputs.iter().enumerate() {
                prod *= data[offsets[k]];
            }
            acc += prod;
            advance(&mut digits, &order, dim, &strides, &mut offsets);
        }
        *slot = acc;
    }
    out
}

fn advance(digits: &mut [usize], order: &[usize], dim: usize, strides: &[Vec<usize>], offsets: &mut [usize]) {
    for k in (0..digits.len()).rev() {
        let l = order[k];
        digits[k] += 1;
        if digits[k] < dim {
            for (o, s) in offsets.iter_mut().zip(strides) {
                *o += s[l];
            }
            return;
        }
        digits[k] = 0;
        for (o, s) in offsets.iter_mut().zip(strides) {
            *o -= (dim - 1) * s[l];
        }
    }
}

fn greedy_steps(leaves: &[Vec<usize>]) -> Vec<Step> {
    let mut labels: Vec<Vec<usize>> = leaves.to_vec();
    let mut active: Vec<usize> = (0..leaves.len()).collect();
    let mut steps = Vec::new();
    while active.len() > 1 {
        let mut best: Option<(usize, usize, usize, usize)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let (out, shared) = merge(&labels[i], &labels[j]);
                let better = match best {
                    None => true,
                    Some((bs, br, _, _)) => shared > bs || (shared == bs && out.len() < br),
                };
                if better {
                    best = Some((shared, out.len(), i, j));
                }
            }
        }
        let (_, _, i, j) = best.expect("at least two active nodes");
        let (out, _) = merge(&labels[i], &labels[j]);
        steps.push(Step { left: i, right: j, labels: out.clone() });
        labels.push(out);
        active.retain(|&k| k != i && k != j);
        active.push(labels.len() - 1);
    }
    steps
}

fn optimal_steps(dim: usize, leaves: &[Vec<usize>]) -> Vec<Step> {
    let n = leaves.len();
    let full = (1usize << n) - 1;
    let ext = |s: usize| -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (v, ls) in leaves.iter().enumerate() {
            if s & (1 << v) == 0 {
                continue;
            }
            for &l in ls {
                let inside =
                    leaves.iter().enumerate().filter(|&(w, lw)| w != v && s & (1 << w) != 0 && lw.contains(&l)).count();
                if inside == 0 {
                    out.push(l);
                }
            }
        }
        out
    };
    let exts: Vec<Vec<usize>> = (0..=full).map(ext).collect();
    let mut cost = vec![f64::INFINITY; full + 1];
    let mut split = vec![0usize; full + 1];
    for s in 1..=full {
        if s.count_ones() == 1 {
            cost[s] = 0.0;
            continue;
        }
        let low = s & s.wrapping_neg();
        let mut a = (s - 1) & s;
        while a > 0 {
            if a & low != 0 {
                let b = s & !a;
                let c = cost[a] + cost[b] + step_cost(dim, &exts[a], &exts[b]);
                if c < cost[s] {
                    cost[s] = c;
                    split[s] = a;
                }
            }
            a = (a - 1) & s;
        }
    }
    let mut steps = Vec::new();
    let mut node_of = vec![usize::MAX; full + 1];
    for v in 0..n {
        node_of[1 << v] = v;
    }
    emit(full, &split, leaves, &mut node_of, &mut steps, n);
    steps
}

fn emit(
    s: usize,
    split: &[usize],
    leaves: &[Vec<usize>],
    node_of: &mut [usize],
    steps: &mut Vec<Step>,
    n: usize,
) -> Vec<usize> {
    if s.count_ones() == 1 {
        return leaves[s.trailing_zeros() as usize].clone();
    }
    let a = split[s];
    let b = s & !a;
    let la = emit(a, split, leaves, node_of, steps, n);
    let lb = emit(b, split, leaves, node_of, steps, n);
    let (out, _) = merge(&la, &lb);
    steps.push(Step { left: node_of[a], right: node_of[b], labels: out.clone() });
    node_of[s] = n + steps.len() - 1;
    out
}

/// Brute-force sum over all edge assignments.
pub fn evaluate_direct(graph: &TraceGraph, t: &DenseTensor) -> Result<Complex64> {
    check_shape(graph, t)?;
    let slot_labels = graph.slot_edges();
    let all: Vec<usize> = (0..graph.num_edges()).collect();
    let inputs: Vec<(&[usize], &[Complex64])> = slot_labels.iter().map(|r| (r.as_slice(), t.data())).collect();
    Ok(kernel(t.dim(), graph.num_edges(), &inputs, &[], &all)[0])
}

fn check_shape(graph: &TraceGraph, t: &DenseTensor) -> Result<()> {
    let v = graph.validate();
    if !v.is_ok() {
        let list: Vec<String> = v.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidGraph(list.join("; ")));
    }
    if t.order() != graph.order() {
        return Err(Error::OrderMismatch { expected: graph.order(), got: t.order() });
    }
    Ok(())
}

/// 𝔪_G(t) via an automatic plan, falling back to direct summation when the
/// plan would exceed [`MAX_INTERMEDIATE`].
pub fn evaluate(graph: &TraceGraph, t: &DenseTensor) -> Result<Complex64> {
    check_shape(graph, t)?;
    match ContractionPlan::new(graph, t.dim(), PlanStrategy::Auto) {
        Ok(plan) => plan.execute(t),
        Err(Error::PlanTooLarge { .. }) => evaluate_direct(graph, t),
        Err(e) => Err(e),
    }
}

/// Evaluates on a class-tagged tensor; complex classes need a parity graph.
pub fn evaluate_tensor(graph: &TraceGraph, t: &CanonicalTensor) -> Result<Complex64> {
    if !t.class().is_real() && graph.flavor() != GraphFlavor::Parity {
        return Err(Error::FlavorMismatch(format!("{} tensors need a parity graph", t.class().name())));
    }
    if t.order() != graph.order() {
        return Err(Error::OrderMismatch { expected: graph.order(), got: t.order() });
    }
    evaluate(graph, &t.densify())
}

/// Real value of an invariant, rejecting an imaginary part above [`REAL_TOLERANCE`].
pub fn evaluate_real(graph: &TraceGraph, t: &CanonicalTensor) -> Result<f64> {
    let z = evaluate_tensor(graph, t)?;
    if z.im.abs() > REAL_TOLERANCE {
        return Err(Error::NotReal { imag: z.im });
    }
    Ok(z.re)
}

/// Σ_{i₁…i_{p/2}} t(i₁,i₁,…,i_{p/2},i_{p/2}) over the dense form; 0 for odd p.
pub fn paired_trace(t: &CanonicalTensor) -> f64 {
    let p = t.order();
    if !p.is_multiple_of(2) {
        return 0.0;
    }
    let n = t.dense_dim();
    let mut idx = vec![0usize; p];
    let mut total = Complex64::new(0.0, 0.0);
    for half in crate::tensor::Positions::new(p / 2, n) {
        for (s, &i) in half.iter().enumerate() {
            idx[2 * s] = i;
            idx[2 * s + 1] = i;
        }
        total += t.entry(&idx);
    }
    total.re
}

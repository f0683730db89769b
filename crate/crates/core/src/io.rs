//! JSON interchange formats. Indices and graph positions are 1-based on disk.
//!
//! Floats are written with the shortest representation that parses back to the
//! same `f64`, so every format round-trips bit-exactly.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Flavor, GroupElement};
use crate::invariant::{GraphFlavor, Slot, TraceGraph};
use crate::tensor::quaternion::{eps_code, eps_digits};
use crate::tensor::{has_repeat, CanonicalTensor, ComponentKind, SymmetryClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub idx: Vec<usize>,
    pub re: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub class: SymmetryClass,
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<TensorEntry>,
}

impl TensorFile {
    /// Nonzero canonical entries in storage order (ε code, then class rank).
    pub fn from_tensor(t: &CanonicalTensor) -> Self {
        let classes = t.shape().classes();
        let mut entries = Vec::new();
        let one_based = |idx: &[usize]| idx.iter().map(|i| i + 1).collect::<Vec<_>>();
        match t.class() {
            SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => {
                for (r, idx) in classes.iter().enumerate() {
                    let v = t.component(0)[r];
                    if v != 0.0 {
                        entries.push(TensorEntry { idx: one_based(idx), re: v, im: None, eps: None });
                    }
                }
            }
            SymmetryClass::Hermitian => {
                for (r, idx) in classes.iter().enumerate() {
                    let (re, im) = (t.component(0)[r], t.component(1)[r]);
                    if re != 0.0 || im != 0.0 {
                        entries.push(TensorEntry { idx: one_based(idx), re, im: Some(im), eps: None });
                    }
                }
            }
            SymmetryClass::SelfDual => {
                for code in 0..t.num_components() {
                    let digits = eps_digits(code, t.order());
                    for (r, idx) in classes.iter().enumerate() {
                        let v = t.component(code)[r];
                        if v != 0.0 {
                            entries.push(TensorEntry {
                                idx: one_based(idx),
                                re: v,
                                im: None,
                                eps: Some(digits.clone()),
                            });
                        }
                    }
                }
            }
        }
        Self { class: t.class(), p: t.order(), n: t.dim(), entries }
    }

    pub fn to_tensor(&self) -> Result<CanonicalTensor> {
        let t = CanonicalTensor::zeros(self.class, self.p, self.n)?;
        let mut components: Vec<Vec<f64>> = (0..t.num_components()).map(|c| t.component(c).to_vec()).collect();
        let mut seen = vec![vec![false; components[0].len()]; components.len()];
        for (k, e) in self.entries.iter().enumerate() {
            let at = |msg: String| Error::Format(format!("entry {}: {msg}", k + 1));
            if e.idx.len() != self.p {
                return Err(at(format!("idx has {} indices, expected {}", e.idx.len(), self.p)));
            }
            if let Some(&bad) = e.idx.iter().find(|&&i| i == 0 || i > self.n) {
                return Err(at(format!("index {bad} outside 1..={}", self.n)));
            }
            if e.idx.windows(2).any(|w| w[0] > w[1]) {
                return Err(at(format!("idx {:?} is not sorted", e.idx)));
            }
            let idx: Vec<usize> = e.idx.iter().map(|i| i - 1).collect();
            let rank = t.shape().rank(&idx);
            let mut put = |c: usize, v: f64| -> Result<()> {
                if seen[c][rank] {
                    return Err(at(format!("duplicate entry for idx {:?}", e.idx)));
                }
                if t.component_kind(c) == ComponentKind::Antisymmetric && has_repeat(&idx) && v != 0.0 {
                    return Err(at(format!("antisymmetric part must vanish at repeated idx {:?}", e.idx)));
                }
                seen[c][rank] = true;
                components[c][rank] = v;
                Ok(())
            };
            match self.class {
                SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => {
                    if e.im.is_some_and(|im| im != 0.0) {
                        return Err(at(format!("{} tensors are real", self.class.name())));
                    }
                    if e.eps.is_some() {
                        return Err(at("eps is only valid for selfdual tensors".into()));
                    }
                    put(0, e.re)?;
                }
                SymmetryClass::Hermitian => {
                    if e.eps.is_some() {
                        return Err(at("eps is only valid for selfdual tensors".into()));
                    }
                    put(0, e.re)?;
                    put(1, e.im.unwrap_or(0.0))?;
                }
                SymmetryClass::SelfDual => {
                    if e.im.is_some_and(|im| im != 0.0) {
                        return Err(at("selfdual components are real".into()));
                    }
                    let digits = e.eps.as_ref().ok_or_else(|| at("selfdual entry needs eps".into()))?;
                    if digits.len() != self.p / 2 || digits.iter().any(|&d| d > 3) {
                        return Err(at(format!("eps must hold {} values in 0..=3", self.p / 2)));
                    }
                    put(eps_code(digits), e.re)?;
                }
            }
        }
        CanonicalTensor::from_components(self.class, self.p, self.n, components)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub flavor: Flavor,
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_element(g: &GroupElement) -> Self {
        let m = g.matrix();
        let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { flavor: g.flavor(), n: g.dim(), rows }
    }

    /// Rebuilds the element and checks group membership.
    pub fn to_element(&self) -> Result<GroupElement> {
        let m = self.flavor.matrix_dim(self.n);
        if self.rows.len() != m || self.rows.iter().any(|r| r.len() != m) {
            return Err(Error::Format(format!("{} matrix for N={} must be {m}×{m}", self.flavor.name(), self.n)));
        }
        let matrix = DMatrix::from_fn(m, m, |i, j| Complex64::new(self.rows[i][j][0], self.rows[i][j][1]));
        GroupElement::new(self.flavor, self.n, matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub p: usize,
    pub n: usize,
    pub flavor: GraphFlavor,
    pub edges: Vec<[[usize; 2]; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &TraceGraph) -> Self {
        let slot = |s: &Slot| [s.vertex + 1, s.position + 1];
        Self {
            p: g.order(),
            n: g.vertices(),
            flavor: g.flavor(),
            edges: g.edges().iter().map(|(a, b)| [slot(a), slot(b)]).collect(),
        }
    }

    /// Rebuilds and validates the graph.
    pub fn to_graph(&self) -> Result<TraceGraph> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            let mut slots = [Slot::new(0, 0); 2];
            for (s, &[v, pos]) in slots.iter_mut().zip(e) {
                if v == 0 || pos == 0 {
                    return Err(Error::Format(format!("edge {}: positions are 1-based", k + 1)));
                }
                *s = Slot::new(v - 1, pos - 1);
            }
            edges.push((slots[0], slots[1]));
        }
        TraceGraph::new(self.p, self.n, self.flavor, edges)
    }
}

pub fn tensor_to_string(t: &CanonicalTensor) -> Result<String> {
    Ok(serde_json::to_string(&TensorFile::from_tensor(t))?)
}

pub fn tensor_from_str(s: &str) -> Result<CanonicalTensor> {
    serde_json::from_str::<TensorFile>(s)?.to_tensor()
}

pub fn matrix_to_string(g: &GroupElement) -> Result<String> {
    Ok(serde_json::to_string(&MatrixFile::from_element(g))?)
}

pub fn matrix_from_str(s: &str) -> Result<GroupElement> {
    serde_json::from_str::<MatrixFile>(s)?.to_element()
}

pub fn graph_to_string(g: &TraceGraph) -> Result<String> {
    Ok(serde_json::to_string(&GraphFile::from_graph(g))?)
}

pub fn graph_from_str(s: &str) -> Result<TraceGraph> {
    serde_json::from_str::<GraphFile>(s)?.to_graph()
}

/// One tensor per line.
pub fn write_tensors_ndjson<'a, W: Write>(
    out: &mut W,
    tensors: impl IntoIterator<Item = &'a CanonicalTensor>,
) -> std::io::Result<()> {
    for t in tensors {
        serde_json::to_writer(&mut *out, &TensorFile::from_tensor(t))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads newline-delimited tensors, skipping blank lines.
pub fn read_tensors_ndjson<R: BufRead>(input: R) -> Result<Vec<CanonicalTensor>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(format!("line {}: {e}", k + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(tensor_from_str(&line).map_err(|e| Error::Format(format!("line {}: {e}", k + 1)))?);
    }
    Ok(out)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn read_tensor(path: &Path) -> Result<CanonicalTensor> {
    tensor_from_str(&read_to_string(path)?).map_err(|e| with_path(path, e))
}

pub fn read_matrix(path: &Path) -> Result<GroupElement> {
    matrix_from_str(&read_to_string(path)?).map_err(|e| with_path(path, e))
}

pub fn read_graph(path: &Path) -> Result<TraceGraph> {
    graph_from_str(&read_to_string(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

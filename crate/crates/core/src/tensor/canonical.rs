use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::DenseTensor;
use super::index::{gamma, has_repeat, is_paired, sort_sign, Positions, TensorShape};
use super::quaternion::{basis_product_entry, eps_digits, in_parity_set, num_eps};
use crate::error::{Error, IndexTuple, Result};

/// Absolute tolerance used by [`CanonicalTensor::canonicalize`].
pub const CLASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    #[serde(rename = "sym")]
    Symmetric,
    #[serde(rename = "antisym")]
    Antisymmetric,
    #[serde(rename = "herm")]
    Hermitian,
    #[serde(rename = "selfdual")]
    SelfDual,
}

impl SymmetryClass {
    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Symmetric => "sym",
            SymmetryClass::Antisymmetric => "antisym",
            SymmetryClass::Hermitian => "herm",
            SymmetryClass::SelfDual => "selfdual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sym" => Some(Self::Symmetric),
            "antisym" => Some(Self::Antisymmetric),
            "herm" => Some(Self::Hermitian),
            "selfdual" => Some(Self::SelfDual),
            _ => None,
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Self::Symmetric | Self::Antisymmetric)
    }

    /// Dimension of the dense form for a tensor of quaternionic/complex dimension `dim`.
    pub fn dense_dim(self, dim: usize) -> usize {
        match self {
            Self::SelfDual => 2 * dim,
            _ => dim,
        }
    }

    pub fn check_order(self, order: usize) -> Result<()> {
        match self {
            Self::Hermitian if !order.is_multiple_of(2) => {
                Err(Error::InvalidShape(format!("hermitian tensors need even order, got {order}")))
            }
            Self::SelfDual if order % 4 != 2 => {
                Err(Error::InvalidShape(format!("self-dual tensors need order ≡ 2 (mod 4), got {order}")))
            }
            _ => Ok(()),
        }
    }

    fn num_components(self, order: usize) -> usize {
        match self {
            Self::Symmetric | Self::Antisymmetric => 1,
            Self::Hermitian => 2,
            Self::SelfDual => num_eps(order),
        }
    }

    fn component_kind(self, order: usize, component: usize) -> ComponentKind {
        match self {
            Self::Symmetric => ComponentKind::Symmetric,
            Self::Antisymmetric => ComponentKind::Antisymmetric,
            Self::Hermitian if component == 0 => ComponentKind::Symmetric,
            Self::Hermitian => ComponentKind::Antisymmetric,
            Self::SelfDual => {
                if in_parity_set(&eps_digits(component, order)) {
                    ComponentKind::Symmetric
                } else {
                    ComponentKind::Antisymmetric
                }
            }
        }
    }
}

/// Symmetry of one real component of the canonical payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Symmetric,
    Antisymmetric,
}

/// A structurally free real coordinate of a canonical tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeCoordinate {
    /// 0 for real classes; 0/1 for H⁰/H¹; the ε code for self-dual.
    pub component: usize,
    /// Rank of the canonical multi-index.
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalizeOptions {
    pub tolerance: f64,
    /// Average over each class instead of rejecting asymmetric input.
    pub project: bool,
}

impl Default for CanonicalizeOptions {
    fn default() -> Self {
        Self { tolerance: CLASS_TOLERANCE, project: false }
    }
}

/// Cubic tensor stored once per canonical multi-index.
///
/// Each class carries one or more real components indexed by canonical rank:
/// symmetric and antisymmetric tensors have one, hermitian tensors store
/// (H⁰, H¹), self-dual tensors store Q^(ε) for every ε ∈ {0,1,2,3}^{p/2}.
/// Antisymmetric components hold the entry at the sorted tuple and are zero
/// on every class with a repeated index.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTensor {
    shape: TensorShape,
    class: SymmetryClass,
    components: Vec<Vec<f64>>,
}

impl CanonicalTensor {
    pub fn zeros(class: SymmetryClass, order: usize, dim: usize) -> Result<Self> {
        class.check_order(order)?;
        let shape = TensorShape::new(order, dim)?;
        let k = shape.num_classes();
        Ok(Self { components: vec![vec![0.0; k]; class.num_components(order)], shape, class })
    }

    pub fn from_components(class: SymmetryClass, order: usize, dim: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        let mut t = Self::zeros(class, order, dim)?;
        if components.len() != t.components.len() {
            return Err(Error::DimensionMismatch { expected: t.components.len(), got: components.len() });
        }
        let classes = t.shape.classes();
        for (c, values) in components.iter().enumerate() {
            if values.len() != classes.len() {
                return Err(Error::DimensionMismatch { expected: classes.len(), got: values.len() });
            }
            if t.component_kind(c) == ComponentKind::Antisymmetric {
                for (r, idx) in classes.iter().enumerate() {
                    if has_repeat(idx) && values[r] != 0.0 {
                        return Err(Error::ClassViolation {
                            class: "antisymmetric",
                            first: IndexTuple(idx.clone()),
                            second: IndexTuple(idx.clone()),
                            detail: format!("nonzero value {} on a repeated index", values[r]),
                        });
                    }
                }
            }
        }
        t.components = components;
        Ok(t)
    }

    /// Real symmetric tensor from one value per canonical class.
    pub fn symmetric(order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        Self::from_components(SymmetryClass::Symmetric, order, dim, vec![values])
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn dense_dim(&self) -> usize {
        self.class.dense_dim(self.dim())
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn component_kind(&self, c: usize) -> ComponentKind {
        self.class.component_kind(self.order(), c)
    }

    /// Value of component `c` at an arbitrary (not necessarily sorted) tuple.
    pub fn component_value(&self, c: usize, indices: &[usize]) -> f64 {
        let v = self.components[c][self.shape.class_of(indices)];
        match self.component_kind(c) {
            ComponentKind::Symmetric => v,
            ComponentKind::Antisymmetric => sort_sign(indices) * v,
        }
    }

    /// Sets component `c` so that its entry at `indices` (any order) is `value`.
    pub fn set_component(&mut self, c: usize, indices: &[usize], value: f64) -> Result<()> {
        if indices.len() != self.order() {
            return Err(Error::OrderMismatch { expected: self.order(), got: indices.len() });
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::IndexOutOfRange { index: bad, dim: self.dim() });
        }
        let rank = self.shape.class_of(indices);
        match self.component_kind(c) {
            ComponentKind::Symmetric => self.components[c][rank] = value,
            ComponentKind::Antisymmetric => {
                let sign = sort_sign(indices);
                if sign == 0.0 {
                    if value != 0.0 {
                        return Err(Error::ClassViolation {
                            class: "antisymmetric",
                            first: IndexTuple(indices.to_vec()),
                            second: IndexTuple(indices.to_vec()),
                            detail: "repeated index must hold zero".into(),
                        });
                    }
                } else {
                    self.components[c][rank] = sign * value;
                }
            }
        }
        Ok(())
    }

    /// Coordinates not forced to zero by the symmetry class, in storage order.
    pub fn free_coordinates(&self) -> Vec<FreeCoordinate> {
        let classes = self.shape.classes();
        let mut out = Vec::new();
        for c in 0..self.components.len() {
            let anti = self.component_kind(c) == ComponentKind::Antisymmetric;
            for (r, idx) in classes.iter().enumerate() {
                if !(anti && has_repeat(idx)) {
                    out.push(FreeCoordinate { component: c, class: r });
                }
            }
        }
        out
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.free_coordinates().into_iter().map(|fc| self.components[fc.component][fc.class]).collect()
    }

    pub fn from_free_values(class: SymmetryClass, order: usize, dim: usize, values: &[f64]) -> Result<Self> {
        let mut t = Self::zeros(class, order, dim)?;
        let coords = t.free_coordinates();
        if coords.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: coords.len(), got: values.len() });
        }
        for (fc, &v) in coords.iter().zip(values) {
            t.components[fc.component][fc.class] = v;
        }
        Ok(t)
    }

    /// Entry of the dense form (dimension 2N for self-dual tensors).
    pub fn entry(&self, indices: &[usize]) -> Complex64 {
        match self.class {
            SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => {
                Complex64::new(self.component_value(0, indices), 0.0)
            }
            SymmetryClass::Hermitian => {
                Complex64::new(self.component_value(0, indices), self.component_value(1, indices))
            }
            SymmetryClass::SelfDual => self.self_dual_entry(indices),
        }
    }

    fn self_dual_entry(&self, dense_index: &[usize]) -> Complex64 {
        let p = self.order();
        let block: Vec<usize> = dense_index.iter().map(|&d| d / 2).collect();
        let iota: Vec<usize> = dense_index.iter().map(|&d| d % 2).collect();
        let rank = self.shape.class_of(&block);
        let sign = sort_sign(&block);
        let half = p / 2;
        // only e₀, e₁ are nonzero on the diagonal of a 2×2 factor, e₂, e₃ off it
        let mut total = Complex64::new(0.0, 0.0);
        for pick in 0..(1usize << half) {
            let digits: Vec<u8> = (0..half)
                .map(|s| {
                    let bit = ((pick >> (half - 1 - s)) & 1) as u8;
                    if iota[2 * s] == iota[2 * s + 1] {
                        bit
                    } else {
                        2 + bit
                    }
                })
                .collect();
            let code = super::quaternion::eps_code(&digits);
            let v = self.components[code][rank];
            if v == 0.0 {
                continue;
            }
            let v = match self.component_kind(code) {
                ComponentKind::Symmetric => v,
                ComponentKind::Antisymmetric => sign * v,
            };
            total += basis_product_entry(&digits, &iota) * v;
        }
        total
    }

    /// Σ over all dense positions of |entry|², computed from the canonical payload.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let classes = self.shape.classes();
        let gammas: Vec<f64> = classes.iter().map(|c| gamma(c) as f64).collect();
        let sum: f64 =
            self.components.iter().map(|comp| comp.iter().zip(&gammas).map(|(v, g)| g * v * v).sum::<f64>()).sum();
        match self.class {
            // each ⊗ₛ e_{εₛ} has squared norm 2^{p/2}
            SymmetryClass::SelfDual => sum * (1u64 << (self.order() / 2)) as f64,
            _ => sum,
        }
    }

    pub fn densify(&self) -> DenseTensor {
        let n = self.dense_dim();
        DenseTensor::from_fn(self.order(), n, |pos| self.entry(pos))
    }

    /// Canonical form of `dense` in `class`, rejecting inputs that violate the
    /// class symmetry by more than the absolute tolerance [`CLASS_TOLERANCE`].
    pub fn canonicalize(dense: &DenseTensor, class: SymmetryClass) -> Result<Self> {
        Self::canonicalize_with(dense, class, CanonicalizeOptions::default())
    }

    pub fn canonicalize_with(dense: &DenseTensor, class: SymmetryClass, opts: CanonicalizeOptions) -> Result<Self> {
        let order = dense.order();
        class.check_order(order)?;
        match class {
            SymmetryClass::SelfDual => canonicalize_self_dual(dense, opts),
            _ => {
                let mut out = Self::zeros(class, order, dense.dim())?;
                let parts: Vec<Box<dyn Fn(Complex64) -> f64>> = match class {
                    SymmetryClass::Hermitian => vec![Box::new(|z| z.re), Box::new(|z| z.im)],
                    _ => vec![Box::new(|z| z.re)],
                };
                if class.is_real() && !opts.project {
                    if let Some(pos) = dense.positions().find(|p| dense.get(p).im.abs() > opts.tolerance) {
                        return Err(Error::ClassViolation {
                            class: class_label(class),
                            first: IndexTuple(pos.clone()),
                            second: IndexTuple(pos.clone()),
                            detail: format!("imaginary part {}", dense.get(&pos).im),
                        });
                    }
                }
                for (c, part) in parts.iter().enumerate() {
                    let kind = out.component_kind(c);
                    let values = fold_component(order, dense.dim(), kind, opts, class, |pos| part(dense.get(pos)))?;
                    out.components[c] = values;
                }
                Ok(out)
            }
        }
    }

    /// Largest absolute difference between payloads of equal class and shape.
    pub fn max_abs_diff(&self, other: &CanonicalTensor) -> f64 {
        assert_eq!(self.class, other.class);
        assert_eq!(self.shape, other.shape);
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Applies `f` to every stored value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CanonicalTensor {
        let mut out = self.clone();
        for comp in out.components.iter_mut() {
            for v in comp.iter_mut() {
                *v = f(*v);
            }
        }
        out
    }

    /// Adds `scale · other` in place, component by component.
    pub fn add_scaled(&mut self, scale: f64, other: &CanonicalTensor) -> Result<()> {
        if self.class != other.class || self.shape != other.shape {
            return Err(Error::FlavorMismatch(format!(
                "cannot add {} tensor to {} tensor",
                other.class.name(),
                self.class.name()
            )));
        }
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        Ok(())
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.components[c]
    }
}

fn class_label(class: SymmetryClass) -> &'static str {
    match class {
        SymmetryClass::Symmetric => "symmetric",
        SymmetryClass::Antisymmetric => "antisymmetric",
        SymmetryClass::Hermitian => "hermitian",
        SymmetryClass::SelfDual => "self-dual",
    }
}

/// Reads one real component from positions via `value_at`, checking (or
/// projecting onto) its symmetry.
fn fold_component(
    order: usize,
    dim: usize,
    kind: ComponentKind,
    opts: CanonicalizeOptions,
    class: SymmetryClass,
    value_at: impl Fn(&[usize]) -> f64,
) -> Result<Vec<f64>> {
    let shape = TensorShape::new(order, dim)?;
    let classes = shape.classes();
    let mut values: Vec<f64> = match kind {
        ComponentKind::Symmetric => classes.iter().map(|c| value_at(c)).collect(),
        ComponentKind::Antisymmetric => classes.iter().map(|c| if has_repeat(c) { 0.0 } else { value_at(c) }).collect(),
    };
    if opts.project {
        let mut sums = vec![0.0; classes.len()];
        for pos in Positions::new(order, dim) {
            let r = shape.class_of(&pos);
            let s = match kind {
                ComponentKind::Symmetric => 1.0,
                ComponentKind::Antisymmetric => sort_sign(&pos),
            };
            sums[r] += s * value_at(&pos);
        }
        for (r, c) in classes.iter().enumerate() {
            values[r] = match kind {
                ComponentKind::Antisymmetric if has_repeat(c) => 0.0,
                _ => sums[r] / gamma(c) as f64,
            };
        }
        return Ok(values);
    }
    for pos in Positions::new(order, dim) {
        let r = shape.class_of(&pos);
        let expected = match kind {
            ComponentKind::Symmetric => values[r],
            ComponentKind::Antisymmetric => sort_sign(&pos) * values[r],
        };
        let got = value_at(&pos);
        if (got - expected).abs() > opts.tolerance {
            return Err(Error::ClassViolation {
                class: class_label(class),
                first: IndexTuple(pos.clone()),
                second: IndexTuple(classes[r].clone()),
                detail: format!(
                    "{} component {got} vs expected {expected}",
                    if kind == ComponentKind::Symmetric { "symmetric" } else { "antisymmetric" }
                ),
            });
        }
    }
    Ok(values)
}

fn canonicalize_self_dual(dense: &DenseTensor, opts: CanonicalizeOptions) -> Result<CanonicalTensor> {
    let order = dense.order();
    if !dense.dim().is_multiple_of(2) {
        return Err(Error::InvalidShape(format!("self-dual dense dimension must be even, got {}", dense.dim())));
    }
    let n = dense.dim() / 2;
    let block_entries = n.pow(order as u32);
    let neps = num_eps(order);
    let scale = 1.0 / (1u64 << (order / 2)) as f64;
    // Q^(ε)_b = 2^{-p/2} Σ_ι conj(⊗e_ε)_ι · H_(b,ι)
    let mut q = vec![vec![Complex64::new(0.0, 0.0); block_entries]; neps];
    let digits: Vec<Vec<u8>> = (0..neps).map(|e| eps_digits(e, order)).collect();
    let mut block = vec![0usize; order];
    let mut iota = vec![0usize; order];
    for pos in dense.positions() {
        let h = dense.get(&pos);
        if h == Complex64::new(0.0, 0.0) {
            continue;
        }
        for k in 0..order {
            block[k] = pos[k] / 2;
            iota[k] = pos[k] % 2;
        }
        let b = block.iter().fold(0, |acc, &i| acc * n + i);
        for (e, d) in digits.iter().enumerate() {
            let w = basis_product_entry(d, &iota);
            if w != Complex64::new(0.0, 0.0) {
                q[e][b] += w.conj() * h * scale;
            }
        }
    }
    let mut out = CanonicalTensor::zeros(SymmetryClass::SelfDual, order, n)?;
    for e in 0..neps {
        if !opts.project {
            if let Some(b) = (0..block_entries).find(|&b| q[e][b].im.abs() > opts.tolerance) {
                let idx = unflatten(b, order, n);
                return Err(Error::ClassViolation {
                    class: "self-dual",
                    first: IndexTuple(idx.clone()),
                    second: IndexTuple(idx),
                    detail: format!("component ε={:?} has imaginary part {}", digits[e], q[e][b].im),
                });
            }
        }
        let kind = out.component_kind(e);
        let comp = &q[e];
        let values = fold_component(order, n, kind, opts, SymmetryClass::SelfDual, |pos| {
            comp[pos.iter().fold(0, |acc, &i| acc * n + i)].re
        })
        .map_err(|err| match err {
            Error::ClassViolation { class, first, second, detail } => {
                Error::ClassViolation { class, first, second, detail: format!("ε={:?}: {detail}", digits[e]) }
            }
            other => other,
        })?;
        out.components[e] = values;
    }
    Ok(out)
}

fn unflatten(mut flat: usize, order: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for k in (0..order).rev() {
        idx[k] = flat % dim;
        flat /= dim;
    }
    idx
}

/// Symmetric tensor identity: 1/Γ on paired multi-indices, zero for odd order.
pub fn identity_tensor(order: usize, dim: usize) -> Result<CanonicalTensor> {
    let mut t = CanonicalTensor::zeros(SymmetryClass::Symmetric, order, dim)?;
    if order.is_multiple_of(2) {
        let classes = t.shape().classes();
        let comp = t.component_mut(0);
        for (r, c) in classes.iter().enumerate() {
            if is_paired(c) {
                comp[r] = 1.0 / gamma(c) as f64;
            }
        }
    }
    Ok(t)
}

/// Isometry S^p(N) → R^K sending the class value v_m to √Γ(m)·v_m.
pub fn flatten_isometry(t: &CanonicalTensor) -> Result<Vec<f64>> {
    if t.class() != SymmetryClass::Symmetric {
        return Err(Error::FlavorMismatch(format!(
            "flatten_isometry needs a real symmetric tensor, got {}",
            t.class().name()
        )));
    }
    Ok(t.shape().classes().iter().zip(t.component(0)).map(|(c, v)| (gamma(c) as f64).sqrt() * v).collect())
}

/// Inverse of [`flatten_isometry`].
pub fn unflatten_isometry(order: usize, dim: usize, coords: &[f64]) -> Result<CanonicalTensor> {
    let shape = TensorShape::new(order, dim)?;
    let classes = shape.classes();
    if coords.len() != classes.len() {
        return Err(Error::DimensionMismatch { expected: classes.len(), got: coords.len() });
    }
    let values = classes.iter().zip(coords).map(|(c, x)| x / (gamma(c) as f64).sqrt()).collect();
    CanonicalTensor::symmetric(order, dim, values)
}

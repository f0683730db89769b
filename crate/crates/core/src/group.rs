//! Haar sampling on O(N), U(N), USp(2N) and the multilinear similarity actions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{CanonicalTensor, CanonicalizeOptions, DenseTensor, SymmetryClass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Orthogonal,
    Unitary,
    Symplectic,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Orthogonal => "orthogonal",
            Flavor::Unitary => "unitary",
            Flavor::Symplectic => "symplectic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "orthogonal" => Some(Flavor::Orthogonal),
            "unitary" => Some(Flavor::Unitary),
            "symplectic" => Some(Flavor::Symplectic),
            _ => None,
        }
    }

    /// Size of the matrix representing an element acting on dimension `n`.
    pub fn matrix_dim(self, n: usize) -> usize {
        match self {
            Flavor::Symplectic => 2 * n,
            _ => n,
        }
    }

    pub fn accepts(self, class: SymmetryClass) -> bool {
        matches!(
            (self, class),
            (Flavor::Orthogonal, SymmetryClass::Symmetric)
                | (Flavor::Orthogonal, SymmetryClass::Antisymmetric)
                | (Flavor::Unitary, SymmetryClass::Hermitian)
                | (Flavor::Symplectic, SymmetryClass::SelfDual)
        )
    }

    pub fn for_class(class: SymmetryClass) -> Self {
        match class {
            SymmetryClass::Symmetric | SymmetryClass::Antisymmetric => Flavor::Orthogonal,
            SymmetryClass::Hermitian => Flavor::Unitary,
            SymmetryClass::SelfDual => Flavor::Symplectic,
        }
    }
}

/// Canonical symplectic form J = diag(e₂, …, e₂) in interleaved ordering 2n+ι.
pub fn symplectic_form(n: usize) -> DMatrix<Complex64> {
    let mut j = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for b in 0..n {
        j[(2 * b, 2 * b + 1)] = -ONE;
        j[(2 * b + 1, 2 * b)] = ONE;
    }
    j
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    flavor: Flavor,
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl GroupElement {
    /// Wraps `matrix` after checking group membership.
    pub fn new(flavor: Flavor, dim: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let g = Self { flavor, dim, matrix };
        g.check()?;
        Ok(g)
    }

    pub fn identity(flavor: Flavor, dim: usize) -> Self {
        let m = flavor.matrix_dim(dim);
        Self { flavor, dim, matrix: DMatrix::identity(m, m) }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn check(&self) -> Result<()> {
        let m = self.flavor.matrix_dim(self.dim);
        if self.matrix.nrows() != m || self.matrix.ncols() != m {
            return Err(Error::NotInGroup(format!(
                "{} element for N={} must be {m}×{m}, got {}×{}",
                self.flavor.name(),
                self.dim,
                self.matrix.nrows(),
                self.matrix.ncols()
            )));
        }
        let id = DMatrix::<Complex64>::identity(m, m);
        match self.flavor {
            Flavor::Orthogonal => {
                let imag = self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                if imag > 1e-12 {
                    return Err(Error::NotInGroup(format!("orthogonal matrix has imaginary part {imag:e}")));
                }
                let err = max_abs(&(self.matrix.transpose() * &self.matrix - id));
                if err > 1e-12 {
                    return Err(Error::NotInGroup(format!("‖UᵀU − I‖ = {err:e}")));
                }
            }
            Flavor::Unitary => {
                let err = max_abs(&(self.matrix.adjoint() * &self.matrix - id));
                if err > 1e-12 {
                    return Err(Error::NotInGroup(format!("‖U*U − I‖ = {err:e}")));
                }
            }
            Flavor::Symplectic => {
                let j = symplectic_form(self.dim);
                let err = max_abs(&(self.matrix.transpose() * &j * &self.matrix - &j));
                if err > 1e-10 {
                    return Err(Error::NotInGroup(format!("‖UᵀJU − J‖ = {err:e}")));
                }
                let err = max_abs(&(self.matrix.adjoint() * &self.matrix - id));
                if err > 1e-10 {
                    return Err(Error::NotInGroup(format!("‖U*U − I‖ = {err:e}")));
                }
            }
        }
        Ok(())
    }

    /// Matrix product self·other, so that act(other, act(self, t)) = act(self·other, t).
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.flavor != other.flavor || self.dim != other.dim {
            return Err(Error::FlavorMismatch(format!(
                "cannot compose {} N={} with {} N={}",
                self.flavor.name(),
                self.dim,
                other.flavor.name(),
                other.dim
            )));
        }
        Ok(GroupElement { flavor: self.flavor, dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    /// Matrix applied on leg `leg` (0-based): U on legs 1, 3, … and Ū resp. −JUJ on legs 2, 4, ….
    pub fn leg_matrix(&self, leg: usize) -> DMatrix<Complex64> {
        if leg.is_multiple_of(2) {
            return self.matrix.clone();
        }
        match self.flavor {
            Flavor::Orthogonal => self.matrix.clone(),
            Flavor::Unitary => self.matrix.map(|z| z.conj()),
            Flavor::Symplectic => {
                let j = symplectic_form(self.dim);
                -(&j * &self.matrix * &j)
            }
        }
    }

    /// (U·H)_i = Σ_j H_j ∏_t M_t[j_t, i_t] for any dense tensor of matching dimension.
    pub fn act_dense(&self, d: &DenseTensor) -> Result<DenseTensor> {
        let m = self.flavor.matrix_dim(self.dim);
        if d.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, got: d.dim() });
        }
        let odd = row_major(&self.matrix);
        let even = if d.order() > 1 { row_major(&self.leg_matrix(1)) } else { Vec::new() };
        let mut out = d.clone();
        for leg in 0..d.order() {
            let mat = if leg % 2 == 0 { &odd } else { &even };
            out = out.contract_leg(leg, mat, m);
        }
        Ok(out)
    }

    /// Acts on a canonical tensor and re-canonicalizes, reporting a class
    /// violation if the result leaves the class.
    pub fn act(&self, t: &CanonicalTensor) -> Result<CanonicalTensor> {
        if !self.flavor.accepts(t.class()) {
            return Err(Error::FlavorMismatch(format!(
                "{} action does not apply to {} tensors",
                self.flavor.name(),
                t.class().name()
            )));
        }
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: t.dim() });
        }
        let out = self.act_dense(&t.densify())?;
        let tolerance = 1e-10 * (1.0 + out.max_abs());
        CanonicalTensor::canonicalize_with(&out, t.class(), CanonicalizeOptions { tolerance, project: false })
    }
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed element: QR of a real, complex or quaternionic Ginibre
/// matrix with the diagonal of R made positive.
pub fn haar_sample<R: Rng + ?Sized>(flavor: Flavor, n: usize, rng: &mut R) -> GroupElement {
    let m = flavor.matrix_dim(n);
    let g = match flavor {
        Flavor::Orthogonal => DMatrix::from_fn(m, m, |_, _| Complex64::new(gaussian(rng), 0.0)),
        Flavor::Unitary => DMatrix::from_fn(m, m, |_, _| {
            let re = gaussian(rng);
            Complex64::new(re, gaussian(rng))
        }),
        Flavor::Symplectic => {
            let mut g = DMatrix::from_element(m, m, ZERO);
            for a in 0..n {
                for b in 0..n {
                    let z = Complex64::new(gaussian(rng), gaussian(rng));
                    let w = Complex64::new(gaussian(rng), gaussian(rng));
                    g[(2 * a, 2 * b)] = z;
                    g[(2 * a, 2 * b + 1)] = -w;
                    g[(2 * a + 1, 2 * b)] = w.conj();
                    g[(2 * a + 1, 2 * b + 1)] = z.conj();
                }
            }
            g
        }
    };
    let (mut q, r) = g.qr().unpack();
    for k in 0..m {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    if flavor == Flavor::Orthogonal {
        q.iter_mut().for_each(|z| z.im = 0.0);
    }
    GroupElement { flavor, dim: n, matrix: q }
}

/// Rotation U_θ in coordinates 1, 2 (for USp: 𝟏 cos θ − e₂ sin θ in block 1).
pub fn givens(theta: f64, n: usize, flavor: Flavor) -> GroupElement {
    let m = flavor.matrix_dim(n);
    let mut u = DMatrix::identity(m, m);
    if m >= 2 {
        let (s, c) = theta.sin_cos();
        u[(0, 0)] = Complex64::new(c, 0.0);
        u[(0, 1)] = Complex64::new(s, 0.0);
        u[(1, 0)] = Complex64::new(-s, 0.0);
        u[(1, 1)] = Complex64::new(c, 0.0);
    }
    GroupElement { flavor, dim: n, matrix: u }
}

/// A = (∂U_θᵀ/∂θ) U_θ: A₁₂ = −1, A₂₁ = 1, zero elsewhere.
pub fn generator_a(n: usize, flavor: Flavor) -> DMatrix<Complex64> {
    let m = flavor.matrix_dim(n);
    let mut a = DMatrix::from_element(m, m, ZERO);
    if m >= 2 {
        a[(0, 1)] = -ONE;
        a[(1, 0)] = ONE;
    }
    a
}

/// Σ_r A ⋆_r H: entrywise Σ_r Σ_k A[i_r, k] H[…, k, …], computed on canonical storage.
pub fn theta_derivative(t: &CanonicalTensor) -> Result<CanonicalTensor> {
    if t.class() != SymmetryClass::Symmetric {
        return Err(Error::FlavorMismatch(format!(
            "theta_derivative needs a real symmetric tensor, got {}",
            t.class().name()
        )));
    }
    let shape = t.shape().clone();
    let mut values = vec![0.0; shape.num_classes()];
    if t.dim() >= 2 {
        let mut idx = Vec::with_capacity(t.order());
        for (r, class) in shape.classes().iter().enumerate() {
            let mut acc = 0.0;
            for leg in 0..class.len() {
                idx.clear();
                idx.extend_from_slice(class);
                match class[leg] {
                    0 => {
                        idx[leg] = 1;
                        acc -= t.component_value(0, &idx);
                    }
                    1 => {
                        idx[leg] = 0;
                        acc += t.component_value(0, &idx);
                    }
                    _ => {}
                }
            }
            values[r] = acc;
        }
    }
    CanonicalTensor::symmetric(t.order(), t.dim(), values)
}

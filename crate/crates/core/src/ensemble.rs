//! GOTE/GUTE/GSTE(β, γ) samplers and unnormalized log-densities.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Flavor;
use crate::par::{self, stream};
use crate::tensor::{gamma, identity_tensor, is_paired, CanonicalTensor, SymmetryClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gote,
    Gute,
    Gste,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Gote => "gote",
            EnsembleKind::Gute => "gute",
            EnsembleKind::Gste => "gste",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gote" => Some(EnsembleKind::Gote),
            "gute" => Some(EnsembleKind::Gute),
            "gste" => Some(EnsembleKind::Gste),
            _ => None,
        }
    }

    pub fn class(self) -> SymmetryClass {
        match self {
            EnsembleKind::Gote => SymmetryClass::Symmetric,
            EnsembleKind::Gute => SymmetryClass::Hermitian,
            EnsembleKind::Gste => SymmetryClass::SelfDual,
        }
    }

    pub fn flavor(self) -> Flavor {
        Flavor::for_class(self.class())
    }

    /// Variance divisor: per-component variance is γp/(divisor·Γ).
    fn divisor(self) -> f64 {
        match self {
            EnsembleKind::Gote => 1.0,
            EnsembleKind::Gute => 2.0,
            EnsembleKind::Gste => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub order: usize,
    pub dim: usize,
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
}

/// Coefficients of −a‖H‖² + b⟨H, 𝓘⟩ + c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, order: usize, dim: usize, beta: f64, gamma: f64, seed: u64) -> Result<Self> {
        let spec = Self { kind, order, dim, beta, gamma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidSpec(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidSpec(format!("beta must be finite, got {}", self.beta)));
        }
        if self.order == 0 || self.dim == 0 {
            return Err(Error::InvalidSpec("order and dimension must be positive".into()));
        }
        self.kind.class().check_order(self.order).map_err(|e| Error::InvalidSpec(format!("{}: {e}", self.kind.name())))
    }

    pub fn class(&self) -> SymmetryClass {
        self.kind.class()
    }

    /// κ in −κ‖H − β𝓘‖²/γ: 1/(2p), 1/p, 2/p.
    pub fn kappa(&self) -> f64 {
        let p = self.order as f64;
        match self.kind {
            EnsembleKind::Gote => 1.0 / (2.0 * p),
            EnsembleKind::Gute => 1.0 / p,
            EnsembleKind::Gste => 2.0 / p,
        }
    }

    /// (mean, variance) of every free coordinate, aligned with
    /// [`CanonicalTensor::free_coordinates`].
    pub fn free_laws(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let proto = CanonicalTensor::zeros(self.class(), self.order, self.dim)?;
        let identity = identity_tensor(self.order, self.dim)?;
        let classes = proto.shape().classes();
        let scale = self.gamma * self.order as f64 / self.kind.divisor();
        Ok(proto
            .free_coordinates()
            .into_iter()
            .map(|fc| {
                let mean = if fc.component == 0 { self.beta * identity.component(0)[fc.class] } else { 0.0 };
                (mean, scale / gamma(&classes[fc.class]) as f64)
            })
            .collect())
    }

    /// a = κ/γ, b = 2κβ/γ, c = −κβ²‖𝓘‖²/γ.
    pub fn coefficients(&self) -> Result<DensityCoefficients> {
        let k = self.kappa() / self.gamma;
        let norm = identity_tensor(self.order, self.dim)?.frobenius_norm_sq();
        Ok(DensityCoefficients { a: k, b: 2.0 * k * self.beta, c: -k * self.beta * self.beta * norm })
    }

    /// β𝓘 embedded in this ensemble's class (on H⁰ resp. Q^(0…0)).
    pub fn mode(&self) -> Result<CanonicalTensor> {
        let identity = identity_tensor(self.order, self.dim)?;
        let mut comps: Vec<Vec<f64>> = (0..CanonicalTensor::zeros(self.class(), self.order, self.dim)?
            .num_components())
            .map(|_| vec![0.0; identity.component(0).len()])
            .collect();
        comps[0] = identity.component(0).iter().map(|v| self.beta * v).collect();
        CanonicalTensor::from_components(self.class(), self.order, self.dim, comps)
    }
}

/// Draws one tensor, one Gaussian per free canonical coordinate.
pub fn sample<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<CanonicalTensor> {
    let laws = spec.free_laws()?;
    let values: Vec<f64> = laws
        .iter()
        .map(|&(mean, var)| {
            let z: f64 = rng.sample(StandardNormal);
            mean + var.sqrt() * z
        })
        .collect();
    CanonicalTensor::from_free_values(spec.class(), spec.order, spec.dim, &values)
}

/// Sample `i` uses its own stream keyed by (seed, i), so serial and parallel runs agree.
pub fn sample_batch(spec: &EnsembleSpec, count: usize) -> Result<Vec<CanonicalTensor>> {
    spec.validate()?;
    par::map_indexed(count, |i| sample(spec, &mut par::rng_for(spec.seed, stream::SAMPLE, i as u64)))
        .into_iter()
        .collect()
}

/// Norm entering the density: ‖·‖²_F, rescaled by 2^{−p/2} for self-dual tensors
/// so that the quaternionic components carry unit weight.
pub fn energy(t: &CanonicalTensor) -> f64 {
    let f = t.frobenius_norm_sq();
    match t.class() {
        SymmetryClass::SelfDual => f / (1u64 << (t.order() / 2)) as f64,
        _ => f,
    }
}

/// ⟨t, 𝓘⟩ = Σ of the real symmetric component over paired classes.
pub fn identity_pairing(t: &CanonicalTensor) -> f64 {
    if !t.order().is_multiple_of(2) {
        return 0.0;
    }
    t.shape().classes().iter().zip(t.component(0)).filter(|(c, _)| is_paired(c)).map(|(_, v)| v).sum()
}

pub fn log_density_unnormalized(t: &CanonicalTensor, spec: &EnsembleSpec) -> Result<f64> {
    spec.validate()?;
    if t.class() != spec.class() {
        return Err(Error::FlavorMismatch(format!(
            "{} density needs a {} tensor, got {}",
            spec.kind.name(),
            spec.class().name(),
            t.class().name()
        )));
    }
    if t.order() != spec.order || t.dim() != spec.dim {
        return Err(Error::InvalidShape(format!(
            "tensor is p={} N={}, ensemble is p={} N={}",
            t.order(),
            t.dim(),
            spec.order,
            spec.dim
        )));
    }
    let mut diff = t.clone();
    diff.add_scaled(-1.0, &spec.mode()?)?;
    Ok(-spec.kappa() * energy(&diff) / spec.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::paired_trace;
    use approx::assert_relative_eq;

    fn spec(kind: EnsembleKind, p: usize, n: usize, beta: f64, gamma: f64) -> EnsembleSpec {
        EnsembleSpec::new(kind, p, n, beta, gamma, 17).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::new(EnsembleKind::Gote, 3, 2, 0.0, 0.0, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Gute, 3, 2, 0.0, 1.0, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Gste, 4, 2, 0.0, 1.0, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Gste, 6, 2, 0.0, 1.0, 0).is_ok());
    }

    #[test]
    fn goe_variances() {
        let s = spec(EnsembleKind::Gote, 2, 2, 0.0, 1.0);
        let laws = s.free_laws().unwrap();
        assert_eq!(laws, vec![(0.0, 2.0), (0.0, 1.0), (0.0, 2.0)]);
        let s1 = spec(EnsembleKind::Gote, 1, 3, 0.0, 2.5);
        assert!(s1.free_laws().unwrap().iter().all(|&l| l == (0.0, 2.5)));
    }

    #[test]
    fn empirical_moments_match_laws() {
        for s in [
            spec(EnsembleKind::Gote, 3, 2, 0.0, 1.0),
            spec(EnsembleKind::Gote, 2, 2, 5.0, 1.0),
            spec(EnsembleKind::Gute, 2, 2, 1.0, 0.5),
            spec(EnsembleKind::Gste, 2, 2, 1.0, 2.0),
        ] {
            let n = 10_000;
            let batch = sample_batch(&s, n).unwrap();
            for (k, &(mean, var)) in s.free_laws().unwrap().iter().enumerate() {
                let xs: Vec<f64> = batch.iter().map(|t| t.free_values()[k]).collect();
                let (m, v) = mean_var(&xs);
                assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "{s:?} {k}");
                assert!((v - var).abs() < 4.0 * var * (2.0 / n as f64).sqrt(), "{s:?} {k}");
            }
        }
    }

    #[test]
    fn gote_energy() {
        let s = spec(EnsembleKind::Gote, 3, 2, 0.0, 1.0);
        let n = 10_000;
        let xs: Vec<f64> = sample_batch(&s, n).unwrap().iter().map(|t| t.frobenius_norm_sq()).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 12.0).abs() < 3.0 * (v / n as f64).sqrt(), "{m}");
    }

    #[test]
    fn batch_is_reproducible() {
        let s = spec(EnsembleKind::Gute, 2, 3, 0.3, 1.0);
        let a = sample_batch(&s, 50).unwrap();
        let b = sample_batch(&s, 50).unwrap();
        assert_eq!(a, b);
        let serial: Vec<_> =
            (0..50).map(|i| sample(&s, &mut par::rng_for(s.seed, stream::SAMPLE, i)).unwrap()).collect();
        assert_eq!(a, serial);
    }

    #[test]
    fn density_mode_and_identity() {
        for s in [
            spec(EnsembleKind::Gote, 2, 3, 1.3, 0.7),
            spec(EnsembleKind::Gote, 4, 2, -0.4, 1.1),
            spec(EnsembleKind::Gute, 4, 2, 0.9, 2.0),
            spec(EnsembleKind::Gste, 2, 3, 1.5, 0.5),
            spec(EnsembleKind::Gste, 6, 2, 0.5, 1.0),
        ] {
            assert_eq!(log_density_unnormalized(&s.mode().unwrap(), &s).unwrap(), 0.0);
            let c = s.coefficients().unwrap();
            for t in sample_batch(&s, 20).unwrap() {
                let lhs = log_density_unnormalized(&t, &s).unwrap();
                let rhs = -c.a * energy(&t) + c.b * identity_pairing(&t) + c.c;
                assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{s:?}");
            }
        }
    }

    #[test]
    fn paired_trace_is_identity_pairing_for_matrices() {
        let s = spec(EnsembleKind::Gote, 2, 3, 0.0, 1.0);
        for t in sample_batch(&s, 5).unwrap() {
            assert_relative_eq!(paired_trace(&t), identity_pairing(&t), epsilon = 1e-14);
        }
        let i4 = identity_tensor(4, 2).unwrap();
        assert_relative_eq!(identity_pairing(&i4), 13.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(paired_trace(&i4), 7.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn density_curvature_matches_sampler_variance() {
        for s in [
            spec(EnsembleKind::Gote, 3, 2, 0.0, 1.5),
            spec(EnsembleKind::Gute, 2, 2, 0.5, 1.0),
            spec(EnsembleKind::Gste, 2, 2, 0.5, 1.0),
            spec(EnsembleKind::Gste, 6, 1, 0.0, 1.0),
        ] {
            let base = s.mode().unwrap();
            let values = base.free_values();
            let laws = s.free_laws().unwrap();
            let h = 0.5;
            for k in 0..values.len() {
                let mut shifted = values.clone();
                shifted[k] += h;
                let t = CanonicalTensor::from_free_values(s.class(), s.order, s.dim, &shifted).unwrap();
                let second = 2.0 * log_density_unnormalized(&t, &s).unwrap() / (h * h);
                assert_relative_eq!(second, -1.0 / laws[k].1, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn gste_paired_constraint() {
        let s = spec(EnsembleKind::Gste, 2, 2, 0.7, 1.0);
        for t in sample_batch(&s, 10).unwrap() {
            let d = t.densify();
            for i in 0..2 {
                assert_eq!(d.get(&[2 * i, 2 * i + 1]).norm(), 0.0);
            }
        }
        let s = spec(EnsembleKind::Gste, 6, 1, 0.0, 1.0);
        let d = sample_batch(&s, 1).unwrap()[0].densify();
        assert!(d.get(&[0, 0, 0, 0, 0, 1]).norm() > 0.0);
    }
}

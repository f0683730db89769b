//! Statistical verification suites.
//!
//! Every suite draws sample `i` from its own stream keyed by `(seed, stream, i)`
//! and reduces statistics sequentially, so reports are identical for serial
//! and parallel runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{self, EnsembleSpec};
use crate::error::{Error, Result};
use crate::group::{givens, haar_sample, theta_derivative, Flavor};
use crate::invariant::{bouquet_graph, evaluate, melon_graph, melon_style, TraceGraph};
use crate::par::{self, stream};
use crate::stats;
use crate::tensor::{
    flatten_isometry, identity_tensor, unflatten_isometry, CanonicalTensor, DenseTensor, Positions, SymmetryClass,
    TensorShape,
};

/// Family-wise level of every suite.
pub const LEVEL: f64 = 0.01;
/// Standard errors allowed for moment checks.
pub const Z_LIMIT: f64 = 4.0;
pub const MIN_SAMPLES: usize = 100;
/// Most entry probes used by the invariance suite.
pub const MAX_ENTRY_PROBES: usize = 24;
pub const DIRECTIONS: usize = 10;
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Exploratory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtest {
    pub name: String,
    /// `None` when the statistic is not finite.
    pub statistic: Option<f64>,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub passed: bool,
}

impl Subtest {
    fn new(name: String, statistic: f64, threshold: f64, p_value: Option<f64>, passed: bool) -> Self {
        let finite = statistic.is_finite();
        Self { name, statistic: finite.then_some(statistic), threshold, p_value, passed: passed && finite }
    }

    /// Passes iff |z| ≤ [`Z_LIMIT`].
    fn z(name: String, z: f64) -> Self {
        Self::new(name, z.abs(), Z_LIMIT, None, z.abs() <= Z_LIMIT)
    }

    /// Passes iff p ≥ level.
    fn ks(name: String, r: stats::KsResult, level: f64) -> Self {
        Self::new(name, r.statistic, level, Some(r.p_value), r.p_value >= level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub test: String,
    pub sampler: String,
    /// Worst subtest statistic.
    pub statistic: Option<f64>,
    pub threshold: f64,
    /// Smallest subtest p-value, for suites built on two-sample tests.
    pub p_value: Option<f64>,
    pub verdict: Verdict,
    pub samples: usize,
    pub seed: u64,
    pub subtests: Vec<Subtest>,
}

impl VerificationReport {
    fn build(test: &str, sampler: String, threshold: f64, samples: usize, seed: u64, subtests: Vec<Subtest>) -> Self {
        let all_finite = subtests.iter().all(|s| s.statistic.is_some());
        let statistic = if all_finite { subtests.iter().filter_map(|s| s.statistic).reduce(f64::max) } else { None };
        let p_value = subtests.iter().filter_map(|s| s.p_value).reduce(f64::min);
        let verdict = if subtests.iter().all(|s| s.passed) { Verdict::Pass } else { Verdict::Fail };
        Self { test: test.into(), sampler, statistic, threshold, p_value, verdict, samples, seed, subtests }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Subtest> {
        self.subtests.iter().filter(|s| !s.passed)
    }
}

/// Source of class-tagged random tensors.
pub trait TensorSampler: Sync {
    fn name(&self) -> String;
    fn class(&self) -> SymmetryClass;
    fn order(&self) -> usize;
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> CanonicalTensor;
}

/// Draws from GOTE/GUTE/GSTE.
#[derive(Debug, Clone)]
pub struct EnsembleSampler(pub EnsembleSpec);

impl TensorSampler for EnsembleSampler {
    fn name(&self) -> String {
        let s = &self.0;
        format!("{}(beta={}, gamma={}) p={} N={}", s.kind.name(), s.beta, s.gamma, s.order, s.dim)
    }

    fn class(&self) -> SymmetryClass {
        self.0.class()
    }

    fn order(&self) -> usize {
        self.0.order
    }

    fn dim(&self) -> usize {
        self.0.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CanonicalTensor {
        ensemble::sample(&self.0, rng).expect("validated ensemble spec")
    }
}

/// Independent Uniform[0,1] canonical entries: a product law that is not invariant.
#[derive(Debug, Clone)]
pub struct UniformEntrySampler {
    pub order: usize,
    pub dim: usize,
}

impl TensorSampler for UniformEntrySampler {
    fn name(&self) -> String {
        format!("uniform-entries p={} N={}", self.order, self.dim)
    }

    fn class(&self) -> SymmetryClass {
        SymmetryClass::Symmetric
    }

    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CanonicalTensor {
        let k = TensorShape::new(self.order, self.dim).expect("valid shape").num_classes();
        CanonicalTensor::symmetric(self.order, self.dim, (0..k).map(|_| rng.random::<f64>()).collect())
            .expect("valid shape")
    }
}

/// β𝓘 + s·(Uᵀe₁)^{⊗p} with Haar U: orthogonally invariant, entries dependent.
#[derive(Debug, Clone)]
pub struct RotatedSpikeSampler {
    pub order: usize,
    pub dim: usize,
    pub beta: f64,
    pub scale: f64,
}

impl RotatedSpikeSampler {
    /// Spike scaled so that E‖H − β𝓘‖² matches GOTE(β, γ).
    pub fn matching(spec: &EnsembleSpec) -> Self {
        let k = TensorShape::new(spec.order, spec.dim).expect("valid shape").num_classes();
        Self {
            order: spec.order,
            dim: spec.dim,
            beta: spec.beta,
            scale: (spec.gamma * spec.order as f64 * k as f64).sqrt(),
        }
    }
}

impl TensorSampler for RotatedSpikeSampler {
    fn name(&self) -> String {
        format!("rotated-spike(beta={}, scale={}) p={} N={}", self.beta, self.scale, self.order, self.dim)
    }

    fn class(&self) -> SymmetryClass {
        SymmetryClass::Symmetric
    }

    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CanonicalTensor {
        let u = haar_sample(Flavor::Orthogonal, self.dim, rng);
        let v: Vec<f64> = (0..self.dim).map(|j| u.matrix()[(0, j)].re).collect();
        let shape = TensorShape::new(self.order, self.dim).expect("valid shape");
        let identity = identity_tensor(self.order, self.dim).expect("valid shape");
        let values = shape
            .classes()
            .iter()
            .zip(identity.component(0))
            .map(|(c, i)| self.beta * i + self.scale * c.iter().map(|&k| v[k]).product::<f64>())
            .collect();
        CanonicalTensor::symmetric(self.order, self.dim, values).expect("valid shape")
    }
}

/// Always returns the same tensor.
#[derive(Debug, Clone)]
pub struct ConstantSampler {
    pub label: String,
    pub tensor: CanonicalTensor,
}

impl ConstantSampler {
    pub fn zero(class: SymmetryClass, order: usize, dim: usize) -> Result<Self> {
        Ok(Self { label: "zero".into(), tensor: CanonicalTensor::zeros(class, order, dim)? })
    }

    /// β𝓘 in the class of `spec`.
    pub fn mode(spec: &EnsembleSpec) -> Result<Self> {
        Ok(Self { label: format!("constant beta*I (beta={})", spec.beta), tensor: spec.mode()? })
    }
}

impl TensorSampler for ConstantSampler {
    fn name(&self) -> String {
        format!("{} p={} N={}", self.label, self.tensor.order(), self.tensor.dim())
    }

    fn class(&self) -> SymmetryClass {
        self.tensor.class()
    }

    fn order(&self) -> usize {
        self.tensor.order()
    }

    fn dim(&self) -> usize {
        self.tensor.dim()
    }

    fn sample(&self, _rng: &mut ChaCha8Rng) -> CanonicalTensor {
        self.tensor.clone()
    }
}

/// Uniform point of the unit Frobenius sphere, built in flattened coordinates.
#[derive(Debug, Clone)]
pub struct SphereSampler {
    pub order: usize,
    pub dim: usize,
}

impl TensorSampler for SphereSampler {
    fn name(&self) -> String {
        format!("unit-sphere p={} N={}", self.order, self.dim)
    }

    fn class(&self) -> SymmetryClass {
        SymmetryClass::Symmetric
    }

    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CanonicalTensor {
        let k = TensorShape::new(self.order, self.dim).expect("valid shape").num_classes();
        unflatten_isometry(self.order, self.dim, &sphere_point(k, rng)).expect("valid shape")
    }
}

fn sphere_point<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { got: n, min: MIN_SAMPLES });
    }
    Ok(())
}

fn draw(sampler: &dyn TensorSampler, n: usize, seed: u64, which: u64) -> Vec<CanonicalTensor> {
    par::map_indexed(n, |i| sampler.sample(&mut par::rng_for(seed, which, i as u64)))
}

/// Dense positions whose index tuple is sorted, evenly thinned to at most `cap`.
fn probe_positions(order: usize, dim: usize, cap: usize) -> Vec<Vec<usize>> {
    let sorted: Vec<Vec<usize>> = Positions::new(order, dim).filter(|p| p.windows(2).all(|w| w[0] <= w[1])).collect();
    if sorted.len() <= cap {
        return sorted;
    }
    (0..cap).map(|k| sorted[k * sorted.len() / cap].clone()).collect()
}

fn one_based(p: &[usize]) -> String {
    let parts: Vec<String> = p.iter().map(|i| (i + 1).to_string()).collect();
    parts.join(",")
}

/// Compares the laws of probes on {t} and on {U·t'} (U Haar of the class flavor,
/// t' an independent draw). Probes are dense entries at sorted positions (real
/// and, for complex classes, imaginary parts), the melon and, for even p, the
/// bouquet. Each probe is a KS subtest at level 0.01/#probes.
pub fn invariance_test(sampler: &dyn TensorSampler, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    check_samples(n_samples)?;
    let class = sampler.class();
    let flavor = Flavor::for_class(class);
    let p = sampler.order();
    let dense_dim = class.dense_dim(sampler.dim());
    let positions = probe_positions(p, dense_dim, MAX_ENTRY_PROBES);
    let mut graphs: Vec<(String, TraceGraph)> = vec![("melon".into(), melon_graph(p, melon_style(class))?)];
    if p.is_multiple_of(2) {
        graphs.push(("bouquet".into(), bouquet_graph(p)?));
    }
    let complex = !class.is_real();
    let probe = |d: &DenseTensor| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for pos in &positions {
            let z = d.get(pos);
            out.push(z.re);
            if complex {
                out.push(z.im);
            }
        }
        for (_, g) in &graphs {
            out.push(evaluate(g, d)?.re);
        }
        Ok(out)
    };
    let reference: Vec<Vec<f64>> = par::map_indexed(n_samples, |i| {
        probe(&sampler.sample(&mut par::rng_for(seed, stream::SAMPLE, i as u64)).densify())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let rotated: Vec<Vec<f64>> = par::map_indexed(n_samples, |i| {
        let t = sampler.sample(&mut par::rng_for(seed, stream::ROTATED, i as u64));
        let u = haar_sample(flavor, sampler.dim(), &mut par::rng_for(seed, stream::HAAR, i as u64));
        probe(&u.act_dense(&t.densify())?)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut names = Vec::new();
    for pos in &positions {
        names.push(format!("Re entry ({})", one_based(pos)));
        if complex {
            names.push(format!("Im entry ({})", one_based(pos)));
        }
    }
    names.extend(graphs.iter().map(|(n, _)| n.clone()));
    let level = LEVEL / names.len() as f64;
    let subtests = names
        .into_iter()
        .enumerate()
        .map(|(k, name)| {
            let a: Vec<f64> = reference.iter().map(|r| r[k]).collect();
            let b: Vec<f64> = rotated.iter().map(|r| r[k]).collect();
            Subtest::ks(name, stats::ks_two_sample(&a, &b), level)
        })
        .collect();
    Ok(VerificationReport::build("invariance", sampler.name(), level, n_samples, seed, subtests))
}

/// Checks each free canonical coordinate against the Gaussian law implied by
/// `reference` (moments 1–4 about the reference mean within 4 standard errors)
/// and every pair of coordinates for vanishing correlation (|r| ≤ 4/√n).
pub fn gaussianity_independence_test(
    sampler: &dyn TensorSampler,
    reference: &EnsembleSpec,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_samples(n_samples)?;
    if sampler.class() != reference.class() || sampler.order() != reference.order || sampler.dim() != reference.dim {
        return Err(Error::FlavorMismatch(format!(
            "sampler {} does not match reference {} p={} N={}",
            sampler.name(),
            reference.kind.name(),
            reference.order,
            reference.dim
        )));
    }
    let laws = reference.free_laws()?;
    let samples = draw(sampler, n_samples, seed, stream::SAMPLE);
    let proto = &samples[0];
    let coords = proto.free_coordinates();
    let classes = proto.shape().classes();
    let columns: Vec<Vec<f64>> =
        (0..laws.len()).map(|k| samples.iter().map(|t| t.free_values()[k]).collect()).collect();
    let label = |k: usize| {
        let fc = coords[k];
        format!("c{}({})", fc.component, one_based(&classes[fc.class]))
    };
    let rn = (n_samples as f64).sqrt();
    let mut subtests = Vec::new();
    for (k, &(mu, var)) in laws.iter().enumerate() {
        let sd = var.sqrt();
        let m = stats::central_moments(&columns[k], mu);
        let expected = [0.0, var, 0.0, 3.0 * var * var];
        let se = [sd, var * 2f64.sqrt(), var * sd * 15f64.sqrt(), var * var * 96f64.sqrt()];
        for j in 0..4 {
            let z = (m[j] - expected[j]) / (se[j] / rn);
            subtests.push(Subtest::z(format!("moment {} of {}", j + 1, label(k)), z));
        }
    }
    let limit = Z_LIMIT / rn;
    for a in 0..columns.len() {
        for b in a + 1..columns.len() {
            let r = stats::pearson(&columns[a], &columns[b]);
            subtests.push(Subtest::new(
                format!("corr {} {}", label(a), label(b)),
                r.abs(),
                limit,
                None,
                r.abs() <= limit,
            ));
        }
    }
    Ok(VerificationReport::build("gaussianity", sampler.name(), Z_LIMIT, n_samples, seed, subtests))
}

/// Max-abs gap between theta_derivative and the central difference of
/// θ ↦ U_θ·t at 0 over random symmetric tensors, p = 1..4, N = 2, 3.
pub fn derivative_identity_test(n_trials: usize, seed: u64) -> Result<VerificationReport> {
    let configs: Vec<(usize, usize)> = (1..=4).flat_map(|p| [(p, 2), (p, 3)]).collect();
    let errors: Vec<(usize, f64)> = par::map_indexed(n_trials, |i| {
        let (p, n) = configs[i % configs.len()];
        let mut rng = par::rng_for(seed, stream::TRIALS, i as u64);
        let k = TensorShape::new(p, n)?.num_classes();
        let t = CanonicalTensor::symmetric(p, n, (0..k).map(|_| rng.sample(StandardNormal)).collect())?;
        Ok((i % configs.len(), derivative_gap(&t)?))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let subtests = configs
        .iter()
        .enumerate()
        .filter_map(|(c, &(p, n))| {
            let worst = errors.iter().filter(|e| e.0 == c).map(|e| e.1).reduce(f64::max)?;
            Some(Subtest::new(format!("p={p} N={n}"), worst, FD_TOLERANCE, None, worst <= FD_TOLERANCE))
        })
        .collect();
    Ok(VerificationReport::build("derivative", "random symmetric".into(), FD_TOLERANCE, n_trials, seed, subtests))
}

/// max |theta_derivative(t) − (U_h·t − U_{−h}·t)/2h| over canonical entries.
pub fn derivative_gap(t: &CanonicalTensor) -> Result<f64> {
    let plus = givens(FD_STEP, t.dim(), Flavor::Orthogonal).act(t)?;
    let minus = givens(-FD_STEP, t.dim(), Flavor::Orthogonal).act(t)?;
    let d = theta_derivative(t)?;
    Ok(plus
        .component(0)
        .iter()
        .zip(minus.component(0))
        .zip(d.component(0))
        .map(|((a, b), x)| ((a - b) / (2.0 * FD_STEP) - x).abs())
        .fold(0.0, f64::max))
}

/// Uniformity of H/‖H‖ on the sphere of the flattened coordinates.
pub fn isotropy_test(sampler: &dyn TensorSampler, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let samples = isotropy_inputs(sampler, n_samples, seed)?;
    isotropy_report(sampler, samples, n_samples, seed, "isotropy")
}

/// Isotropy statistics of H − Ê(H₁…₁)𝓘, with E(H₁…₁) estimated from the same
/// samples; reported without a verdict.
pub fn isotropy_exploratory(sampler: &dyn TensorSampler, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    let samples = isotropy_inputs(sampler, n_samples, seed)?;
    let shift = samples.iter().map(|t| t.component(0)[0]).sum::<f64>() / samples.len() as f64;
    let identity = identity_tensor(sampler.order(), sampler.dim())?;
    let shifted = samples
        .into_iter()
        .map(|mut t| {
            t.add_scaled(-shift, &identity)?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = isotropy_report(sampler, shifted, n_samples, seed, "isotropy-exploratory")?;
    report.verdict = Verdict::Exploratory;
    Ok(report)
}

fn isotropy_inputs(sampler: &dyn TensorSampler, n_samples: usize, seed: u64) -> Result<Vec<CanonicalTensor>> {
    check_samples(n_samples)?;
    if sampler.class() != SymmetryClass::Symmetric {
        return Err(Error::FlavorMismatch(format!("isotropy needs a real symmetric sampler, got {}", sampler.name())));
    }
    let k = TensorShape::new(sampler.order(), sampler.dim())?.num_classes();
    if k < 3 {
        return Err(Error::TooFewCoordinates(k));
    }
    Ok(draw(sampler, n_samples, seed, stream::SAMPLE))
}

fn isotropy_report(
    sampler: &dyn TensorSampler,
    samples: Vec<CanonicalTensor>,
    n_samples: usize,
    seed: u64,
    name: &str,
) -> Result<VerificationReport> {
    let points: Vec<Vec<f64>> = samples
        .iter()
        .map(|t| {
            let x = flatten_isometry(t)?;
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(x.into_iter().map(|v| v / norm).collect())
        })
        .collect::<Result<_>>()?;
    let k = points[0].len();
    let kf = k as f64;
    let nf = n_samples as f64;
    let mut subtests = Vec::new();
    let se = (2.0 * (kf - 1.0) / (kf * kf * (kf + 2.0)) / nf).sqrt();
    let classes = samples[0].shape().classes();
    for (i, class) in classes.iter().enumerate() {
        let m = points.iter().map(|x| x[i] * x[i]).sum::<f64>() / nf;
        subtests.push(Subtest::z(format!("mean x^2 at ({})", one_based(class)), (m - 1.0 / kf) / se));
    }
    let level = LEVEL / DIRECTIONS as f64;
    let sphere: Vec<Vec<f64>> =
        par::map_indexed(n_samples, |i| sphere_point(k, &mut par::rng_for(seed, stream::SPHERE, i as u64)));
    for d in 0..DIRECTIONS {
        let dir = sphere_point(k, &mut par::rng_for(seed, stream::DIRECTIONS, d as u64));
        let dot = |x: &Vec<f64>| x.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        let a: Vec<f64> = points.iter().map(dot).collect();
        let b: Vec<f64> = sphere.iter().map(dot).collect();
        subtests.push(Subtest::ks(format!("projection {}", d + 1), stats::ks_two_sample(&a, &b), level));
    }
    Ok(VerificationReport::build(name, sampler.name(), Z_LIMIT, n_samples, seed, subtests))
}

//! `gte`: sampling, group actions, trace invariants, graph tooling and the
//! verification suites from the command line.
//!
//! Exit codes: 0 on success or a passing verification, 1 on a failing
//! verification, 2 on usage, file or format errors.

use std::fmt::Write as _;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use gte_core::ensemble::{sample_batch, EnsembleKind, EnsembleSpec};
use gte_core::group::{haar_sample, Flavor};
use gte_core::harness::{
    derivative_identity_test, gaussianity_independence_test, invariance_test, isotropy_exploratory, isotropy_test,
    EnsembleSampler, RotatedSpikeSampler, TensorSampler, UniformEntrySampler, Verdict, VerificationReport,
};
use gte_core::invariant::{
    bouquet_graph, enumerate_multigraphs, enumerate_rank2, evaluate_tensor, melon_graph, melon_style, GraphFlavor,
    MelonStyle, TraceGraph, REAL_TOLERANCE,
};
use gte_core::io::{self, GraphFile, MatrixFile, TensorFile};
use gte_core::par::{self, stream};
use gte_core::tensor::{identity_tensor, CanonicalTensor};
use gte_core::{Complex64, Error};

#[derive(Parser)]
#[command(name = "gte", about = "Gaussian tensor ensembles and trace invariants", disable_version_flag = true)]
struct Cli {
    /// Print toolkit and format versions.
    #[arg(long)]
    version: bool,

    /// Worker threads (default: machine parallelism; 1 runs serially). Output does not depend on it.
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw tensors from GOTE/GUTE/GSTE as newline-delimited tensor JSON.
    Sample(SampleArgs),
    /// Apply a group element to a tensor.
    Act(ActArgs),
    /// Evaluate a trace invariant; a batch input yields a CSV table.
    Invariant(InvariantArgs),
    /// Emit or validate trace graphs.
    Graphs(GraphsArgs),
    /// Write the symmetric tensor identity.
    Identity(IdentityArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gote,
    Gute,
    Gste,
}

impl From<Kind> for EnsembleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Gote => EnsembleKind::Gote,
            Kind::Gute => EnsembleKind::Gute,
            Kind::Gste => EnsembleKind::Gste,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_name = "INT")]
    p: usize,
    #[arg(long, value_name = "INT")]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1, value_name = "INT")]
    count: usize,
    #[arg(long, value_name = "INT")]
    seed: u64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("element").required(true).args(["matrix", "haar"])))]
struct ActArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// Group element in matrix JSON.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Draw a Haar element of the tensor's group.
    #[arg(long, requires = "seed")]
    haar: bool,
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Also write the group element used.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["graph", "melon", "bouquet"])))]
#[command(group(ArgGroup::new("input").required(true).args(["tensor", "tensors"])))]
struct InvariantArgs {
    /// Graph in graph JSON.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Melon graph matching the tensor class.
    #[arg(long)]
    melon: bool,
    /// Bouquet graph (paired trace).
    #[arg(long)]
    bouquet: bool,
    /// Single tensor; prints the value (`re` if real, else `re,im`).
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// Newline-delimited tensors; writes `index,re,im` CSV.
    #[arg(long)]
    tensors: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rank2,
    Multigraphs,
    Melon,
    Bouquet,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFlavorArg {
    Real,
    Parity,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Real,
    Hermitian,
    Selfdual,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["family", "validate"])))]
struct GraphsArgs {
    #[arg(long, value_enum, requires = "p")]
    family: Option<Family>,
    #[arg(long, value_name = "INT")]
    p: Option<usize>,
    /// Matching flavor for rank-2 enumeration.
    #[arg(long, value_enum, default_value = "real")]
    flavor: GraphFlavorArg,
    /// Edge budget for multigraph enumeration.
    #[arg(long, default_value_t = 8, value_name = "INT")]
    max_edges: usize,
    /// Parity convention for the melon.
    #[arg(long, value_enum, default_value = "real")]
    style: StyleArg,
    /// Validate a graph file; exits 1 if invalid.
    #[arg(long, conflicts_with_all = ["family", "p"])]
    validate: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long, value_name = "INT")]
    p: usize,
    #[arg(long, value_name = "INT")]
    dim: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Invariance,
    Gaussianity,
    Derivative,
    Isotropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Ensemble,
    /// Uniform[0,1] canonical entries (real symmetric).
    Uniform,
    /// Haar-rotated spike β𝓘 + s·v^{⊗p} (real symmetric).
    Spike,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, value_enum, default_value = "gote")]
    kind: Kind,
    #[arg(long, default_value_t = 2, value_name = "INT")]
    p: usize,
    #[arg(long, default_value_t = 2, value_name = "INT")]
    dim: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value = "ensemble")]
    sampler: SamplerArg,
    /// Sample count (default 5000; trial count 100 for the derivative suite).
    #[arg(long, value_name = "INT")]
    samples: Option<usize>,
    #[arg(long, value_name = "INT")]
    seed: u64,
    /// Isotropy of H − Ê(H₁…₁)𝓘, reported without a verdict.
    #[arg(long)]
    exploratory: bool,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Core(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!(
            "gte {} (gte-core {}, format {})",
            env!("CARGO_PKG_VERSION"),
            gte_core::VERSION,
            gte_core::FORMAT_VERSION
        );
        return ExitCode::SUCCESS;
    }
    let result = configure_threads(cli.threads).and_then(|()| match cli.command {
        Some(Command::Sample(a)) => sample(a),
        Some(Command::Act(a)) => act(a),
        Some(Command::Invariant(a)) => invariant(a),
        Some(Command::Graphs(a)) => graphs(a),
        Some(Command::Identity(a)) => identity(a),
        Some(Command::Verify(a)) => verify(a),
        None => Err(Failure::Usage("a subcommand is required (see --help)".into())),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Outcome {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}"))),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Outcome {
    match out {
        Some(path) => io::write_string(path, contents)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn ensemble_spec(kind: Kind, p: usize, dim: usize, beta: f64, gamma: f64, seed: u64) -> Result<EnsembleSpec, Failure> {
    EnsembleSpec::new(kind.into(), p, dim, beta, gamma, seed)
        .map_err(|e| Failure::Usage(format!("--kind/--p/--dim/--beta/--gamma: {e}")))
}

fn sample(a: SampleArgs) -> Outcome {
    let spec = ensemble_spec(a.kind, a.p, a.dim, a.beta, a.gamma, a.seed)?;
    let tensors = sample_batch(&spec, a.count)?;
    let mut buf = Vec::new();
    io::write_tensors_ndjson(&mut buf, &tensors).map_err(|source| Error::Io { path: "<buffer>".into(), source })?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn act(a: ActArgs) -> Outcome {
    let t = io::read_tensor(&a.tensor)?;
    let g = match (&a.matrix, a.seed) {
        (Some(path), _) => io::read_matrix(path)?,
        (None, Some(seed)) => {
            haar_sample(Flavor::for_class(t.class()), t.dim(), &mut par::rng_for(seed, stream::HAAR, 0))
        }
        (None, None) => return Err(Failure::Usage("--haar requires --seed".into())),
    };
    if let Some(path) = &a.matrix_out {
        io::write_string(path, &json_line(&MatrixFile::from_element(&g))?)?;
    }
    let out = g.act(&t)?;
    emit(a.out.as_deref(), &json_line(&TensorFile::from_tensor(&out))?)
}

fn graph_for(a: &InvariantArgs, t: &CanonicalTensor) -> Result<TraceGraph, Failure> {
    Ok(match &a.graph {
        Some(path) => io::read_graph(path)?,
        None if a.melon => melon_graph(t.order(), melon_style(t.class()))?,
        None => bouquet_graph(t.order())?,
    })
}

fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_TOLERANCE
}

fn invariant(a: InvariantArgs) -> Outcome {
    if let Some(path) = &a.tensor {
        let t = io::read_tensor(path)?;
        let z = evaluate_tensor(&graph_for(&a, &t)?, &t)?;
        let line = if is_real(z) { format!("{}\n", z.re) } else { format!("{},{}\n", z.re, z.im) };
        return emit(a.out.as_deref(), &line);
    }
    let path = a.tensors.as_ref().expect("clap enforces an input");
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let tensors =
        io::read_tensors_ndjson(BufReader::new(file)).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut csv = String::from("index,re,im\n");
    let Some(first) = tensors.first() else {
        return emit(a.out.as_deref(), &csv);
    };
    if let Some(k) = tensors.iter().position(|t| t.class() != first.class() || t.order() != first.order()) {
        return Err(
            Error::Format(format!("{}: line {} differs in class or order from line 1", path.display(), k + 1)).into()
        );
    }
    let g = graph_for(&a, first)?;
    let values = par::map_slice(&tensors, |t| evaluate_tensor(&g, t));
    for (i, z) in values.into_iter().enumerate() {
        let z = z?;
        writeln!(csv, "{},{},{}", i + 1, z.re, z.im).expect("writing to a String");
    }
    emit(a.out.as_deref(), &csv)
}

fn graphs(a: GraphsArgs) -> Outcome {
    if let Some(path) = &a.validate {
        let text = io::read_to_string(path)?;
        let file: GraphFile =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let edges = file
            .edges
            .iter()
            .map(|[[v, k], [w, l]]| {
                let slot = |v: usize, k: usize| gte_core::invariant::Slot::new(v.wrapping_sub(1), k.wrapping_sub(1));
                (slot(*v, *k), slot(*w, *l))
            })
            .collect();
        let report = TraceGraph::unchecked(file.p, file.n, file.flavor, edges).validate();
        let summary = serde_json::json!({
            "valid": report.is_ok(),
            "connected": report.connected,
            "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        });
        emit(a.out.as_deref(), &json_line(&summary)?)?;
        return if report.is_ok() { Ok(()) } else { Err(Failure::Verification) };
    }
    let family = a.family.expect("clap enforces a mode");
    let p = a.p.expect("clap requires --p with --family");
    let list = match family {
        Family::Rank2 => enumerate_rank2(
            p,
            match a.flavor {
                GraphFlavorArg::Real => GraphFlavor::Real,
                GraphFlavorArg::Parity => GraphFlavor::Parity,
            },
        ),
        Family::Multigraphs => enumerate_multigraphs(p, a.max_edges)?,
        Family::Melon => vec![melon_graph(
            p,
            match a.style {
                StyleArg::Real => MelonStyle::Real,
                StyleArg::Hermitian => MelonStyle::Hermitian,
                StyleArg::Selfdual => MelonStyle::SelfDual,
            },
        )?],
        Family::Bouquet => vec![bouquet_graph(p)?],
    };
    let mut out = String::new();
    for g in &list {
        out.push_str(&json_line(&GraphFile::from_graph(g))?);
    }
    emit(a.out.as_deref(), &out)
}

fn identity(a: IdentityArgs) -> Outcome {
    let t = identity_tensor(a.p, a.dim).map_err(|e| Failure::Usage(format!("--p/--dim: {e}")))?;
    emit(a.out.as_deref(), &json_line(&TensorFile::from_tensor(&t))?)
}

fn verify(a: VerifyArgs) -> Outcome {
    let spec = ensemble_spec(a.kind, a.p, a.dim, a.beta, a.gamma, a.seed)?;
    let real_only = |name: &str| -> Outcome {
        if matches!(a.kind, Kind::Gote) {
            Ok(())
        } else {
            Err(Failure::Usage(format!("--sampler {name} is real symmetric and needs --kind gote")))
        }
    };
    let sampler: Box<dyn TensorSampler> = match a.sampler {
        SamplerArg::Ensemble => Box::new(EnsembleSampler(spec)),
        SamplerArg::Uniform => {
            real_only("uniform")?;
            Box::new(UniformEntrySampler { order: a.p, dim: a.dim })
        }
        SamplerArg::Spike => {
            real_only("spike")?;
            Box::new(RotatedSpikeSampler::matching(&spec))
        }
    };
    if a.exploratory && a.suite != Suite::Isotropy {
        return Err(Failure::Usage("--exploratory only applies to --suite isotropy".into()));
    }
    let report = match a.suite {
        Suite::Invariance => invariance_test(sampler.as_ref(), a.samples.unwrap_or(5000), a.seed)?,
        Suite::Gaussianity => {
            gaussianity_independence_test(sampler.as_ref(), &spec, a.samples.unwrap_or(5000), a.seed)?
        }
        Suite::Derivative => derivative_identity_test(a.samples.unwrap_or(100), a.seed)?,
        Suite::Isotropy if a.exploratory => isotropy_exploratory(sampler.as_ref(), a.samples.unwrap_or(5000), a.seed)?,
        Suite::Isotropy => isotropy_test(sampler.as_ref(), a.samples.unwrap_or(5000), a.seed)?,
    };
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        s.push('\n');
        s
    } else {
        summary(&report)
    };
    emit(a.out.as_deref(), &text)?;
    if report.verdict == Verdict::Fail {
        Err(Failure::Verification)
    } else {
        Ok(())
    }
}

fn summary(r: &VerificationReport) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Exploratory => "EXPLORATORY",
    };
    let mut s = format!("{} {}: {verdict} ({} samples, seed {})\n", r.test, r.sampler, r.samples, r.seed);
    if let Some(stat) = r.statistic {
        writeln!(s, "statistic {stat} threshold {}", r.threshold).expect("writing to a String");
    }
    if let Some(p) = r.p_value {
        writeln!(s, "min p-value {p}").expect("writing to a String");
    }
    for t in r.failures() {
        let stat = t.statistic.map_or("n/a".to_string(), |v| v.to_string());
        writeln!(s, "failed: {} statistic {stat} threshold {}", t.name, t.threshold).expect("writing to a String");
    }
    s
}

//! `symcone`: solve conic problems, audit self-scaled barriers, decompose
//! Jordan algebras and identify barrier weights.
//!
//! Exit codes: 0 success, 1 input error, 2 iteration limit, 3 numerical
//! failure or failed check. Results go to stdout, diagnostics to stderr.

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use symcone::barrier::{verify_self_scaled, Barrier, SelfScaledBarrier};
use symcone::decompose::{identify_barrier_weights, match_blocks, scramble_with_basis, split_irreducible};
use symcone::eja::{Algebra, Element, StructureTensor};
use symcone::io::{
    from_json, read_algebra_source, to_json, AlgebraSource, ConeDescriptor, DecompositionDoc, ProblemFile,
    SolutionDoc, SCHEMA,
};
use symcone::ipm::{solve, SolveOptions, Status};
use symcone::Error;

const EXIT_INPUT: u8 = 1;
const EXIT_ITERATION_LIMIT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Largest weight deviation accepted by `identify`.
const IDENTIFY_TOL: f64 = 1e-5;
/// Tolerance for the closure checks of `decompose`.
const SPLIT_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "symcone", version, about = "Symmetric-cone toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a conic problem file with the NT interior-point method.
    Solve(SolveArgs),
    /// Check the self-scaled identities of a barrier numerically.
    Verify(VerifyArgs),
    /// Split an algebra into its irreducible ideals.
    Decompose(DecomposeArgs),
    /// Recover barrier weights from values alone and compare with the file.
    Identify(IdentifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    path: std::path::PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    gap_tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// `orthant`, `lorentz`, `sympsd`, or a full spec such as
    /// `sum(orthant:2, lorentz:3)`.
    #[arg(long)]
    family: String,
    /// Comma-separated dimensions for a leaf family; several give a sum.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Barrier weights: one, one per summand, or one per irreducible block.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    weights: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, env = "SYMCONE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Cone spec string, or a path to a tensor, descriptor or problem file.
    input: String,
    /// Conjugate the structure constants by a random rotation first.
    #[arg(long)]
    scramble_seed: Option<u64>,
    #[arg(long, env = "SYMCONE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct IdentifyArgs {
    /// Problem or cone file with embedded weights, or a cone spec string.
    input: String,
    /// Weights for a cone spec given on the command line.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    scramble_seed: Option<u64>,
    #[arg(long, env = "SYMCONE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// Formats with 9 significant digits.
fn sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        format!("{v:.*}", (8 - mag) as usize)
    } else {
        format!("{v:.8e}")
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_for(&e))
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

/// A path if it exists, otherwise the argument itself.
fn read_input(arg: &str) -> Result<String, Error> {
    let p = Path::new(arg);
    if p.is_file() {
        read_text(p)
    } else if arg.trim_start().starts_with('{') || !arg.contains(['/', '.']) || arg.contains(':') {
        Ok(arg.to_string())
    } else {
        Err(Error::Input(format!("no such file: {arg}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Identify(a) => cmd_identify(a),
    }
}

fn cmd_solve(a: SolveArgs) -> ExitCode {
    let problem = match read_text(&a.path).and_then(|t| from_json::<ProblemFile>(&t)).and_then(|d| d.to_problem()) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let opts = SolveOptions { gap_tol: a.gap_tol, max_iter: a.max_iter, ..Default::default() };
    let sol = solve(&problem, &opts);
    if a.json {
        println!("{}", to_json(&SolutionDoc::from(&sol)));
    } else {
        println!("status {:?}", sol.status);
        println!("objective {}", sig(sol.objective));
        println!("gap {}", sig(sol.gap));
        println!("iterations {}", sol.iterations);
    }
    if let Some(m) = &sol.message {
        eprintln!("solver stopped: {m}");
    }
    match sol.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::IterationLimit => ExitCode::from(EXIT_ITERATION_LIMIT),
        Status::NumericalFailure => ExitCode::from(EXIT_NUMERICAL),
    }
}

fn verify_cone(family: &str, dims: &[usize]) -> Result<Arc<Algebra>, Error> {
    let leaf = |d: usize| ConeDescriptor::parse(&format!("{family}:{d}"));
    let desc = match (family.contains(['(', ':']), dims) {
        (true, []) => ConeDescriptor::parse(family)?,
        (true, _) => return Err(Error::Input("--dims cannot be combined with a full cone spec".into())),
        (false, []) => return Err(Error::Input(format!("--dims is required for family {family}"))),
        (false, [d]) => leaf(*d)?,
        (false, ds) => ConeDescriptor::sum(ds.iter().map(|&d| leaf(d)).collect::<Result<_, _>>()?),
    };
    desc.build()
}

fn cmd_verify(a: VerifyArgs) -> ExitCode {
    let barrier = match verify_cone(&a.family, &a.dims).and_then(|c| SelfScaledBarrier::new(&c, &a.weights, a.offset)) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let report = verify_self_scaled(&barrier, a.trials, a.seed, a.tol);
    if a.json {
        println!("{}", to_json(&report));
    } else {
        println!("{report}");
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("failing identities: {}", report.failing().join(", "));
        ExitCode::from(EXIT_NUMERICAL)
    }
}

/// A cone given natively, with the barrier embedded in its file if any.
type NativeCone = (Arc<Algebra>, Option<SelfScaledBarrier>);

/// Structure constants for the input, with the native cone when known.
fn load_tensor(input: &str) -> Result<(StructureTensor, Option<NativeCone>), Error> {
    match read_algebra_source(&read_input(input)?)? {
        AlgebraSource::Tensor(t) => {
            t.validate(1e-9)?;
            Ok((t, None))
        }
        AlgebraSource::Cone(alg, b) => Ok((alg.structure_tensor(), Some((alg, b)))),
    }
}

fn block_table(doc: &DecompositionDoc) {
    println!("{:>5} {:>5} {:>5}  family", "block", "dim", "rank");
    for (i, b) in doc.result.blocks.iter().enumerate() {
        println!("{:>5} {:>5} {:>5}  {}", i, b.dim, b.rank, b.family.as_str());
    }
    println!("closure residual {}", sig(doc.result.closure_residual));
    println!("change-of-basis residual {}", sig(doc.result.change_of_basis_residual));
}

fn cmd_decompose(a: DecomposeArgs) -> ExitCode {
    let run = || -> Result<DecompositionDoc, Error> {
        let (mut t, _) = load_tensor(&a.input)?;
        if let Some(s) = a.scramble_seed {
            t = scramble_with_basis(&t, s).0;
        }
        Ok(DecompositionDoc::new(split_irreducible(&t, SPLIT_TOL, a.seed)?))
    };
    match run() {
        Ok(doc) => {
            if a.json {
                println!("{}", to_json(&doc));
            } else {
                block_table(&doc);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

#[derive(serde::Serialize)]
struct IdentifyDoc {
    schema: u32,
    offset_declared: f64,
    offset_recovered: f64,
    blocks: Vec<IdentifyBlock>,
    nu_fit: f64,
    nu_measured: f64,
    max_deviation: f64,
    pass: bool,
}

#[derive(serde::Serialize)]
struct IdentifyBlock {
    dim: usize,
    rank: usize,
    declared: f64,
    recovered: f64,
}

fn cmd_identify(a: IdentifyArgs) -> ExitCode {
    let run = || -> Result<IdentifyDoc, Error> {
        let (t0, native) = load_tensor(&a.input)?;
        let Some((cone, embedded)) = native else {
            return Err(Error::Input("identify needs a cone with weights, not a bare tensor".into()));
        };
        let barrier = match (embedded, &a.weights) {
            (_, Some(w)) => SelfScaledBarrier::new(&cone, w, 0.0)?,
            (Some(b), None) => b,
            (None, None) => SelfScaledBarrier::standard(&cone),
        };
        let (t, q) = match a.scramble_seed {
            Some(s) => scramble_with_basis(&t0, s),
            None => (t0.clone(), DMatrix::identity(t0.dim(), t0.dim())),
        };
        let d = split_irreducible(&t, SPLIT_TOL, a.seed)?;
        let oracle = |z: &DVector<f64>| {
            let y = cone.from_orthonormal(&(&q * z));
            Element::new(&cone, y).and_then(|x| barrier.value(&x)).unwrap_or(f64::NAN)
        };
        let id = identify_barrier_weights(&oracle, &d, &t)?;
        let owners = match_blocks(&d, &q, &cone)?;
        let blocks: Vec<IdentifyBlock> = d
            .blocks
            .iter()
            .zip(&id.weights)
            .zip(&owners)
            .map(|((b, &w), &k)| IdentifyBlock { dim: b.dim, rank: b.rank, declared: barrier.weights()[k], recovered: w })
            .collect();
        let max_deviation = blocks
            .iter()
            .map(|b| (b.recovered - b.declared).abs())
            .chain(std::iter::once((id.offset - barrier.offset()).abs()))
            .fold(0.0, f64::max);
        Ok(IdentifyDoc {
            schema: SCHEMA,
            offset_declared: barrier.offset(),
            offset_recovered: id.offset,
            blocks,
            nu_fit: id.nu_fit,
            nu_measured: id.nu_measured,
            max_deviation,
            pass: max_deviation <= IDENTIFY_TOL,
        })
    };
    let doc = match run() {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    if a.json {
        println!("{}", to_json(&doc));
    } else {
        println!("{:>5} {:>5} {:>5} {:>14} {:>14}", "block", "dim", "rank", "declared", "recovered");
        for (i, b) in doc.blocks.iter().enumerate() {
            println!("{:>5} {:>5} {:>5} {:>14} {:>14}", i, b.dim, b.rank, sig(b.declared), sig(b.recovered));
        }
        println!("offset declared {} recovered {}", sig(doc.offset_declared), sig(doc.offset_recovered));
        println!("nu fit {} measured {}", sig(doc.nu_fit), sig(doc.nu_measured));
        println!("max deviation {}", sig(doc.max_deviation));
    }
    if doc.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("recovered weights differ from the declared ones by {:.3e}", doc.max_deviation);
        ExitCode::from(EXIT_NUMERICAL)
    }
}

//! `alphax`: weighted alpha complexes from the command line.
//!
//! Exit codes follow convention: 0 on success, 1 when `verify` finds a
//! mismatch, 2 for usage and input errors.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use alphax::{
    barycentric_embed, brute_alpha, build_alpha, build_cech_graph, compare, betti_pipeline,
    BuildParams, Tolerances, WeightedPoints,
};

#[derive(Parser, Debug)]
#[command(name = "alphax", version, about = "Weighted alpha complexes via dual quadratic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the alpha complex and write it as a text file.
    Build(BuildArgs),
    /// Print Betti numbers of the alpha complex, one per line.
    Betti(BettiArgs),
    /// Print the intersection graph of the bounded balls as `i j` lines.
    Graph(GraphArgs),
    /// Rebuild with the brute-force reference and report any difference.
    Verify(VerifyArgs),
    /// Export a built complex as OFF geometry via barycentric subdivision.
    ExportGeom(ExportArgs),
}

#[derive(Args, Debug)]
struct PointArgs {
    /// CSV point cloud, one comma-separated point per line.
    #[arg(long, value_name = "FILE")]
    points: PathBuf,
    /// Per-point powers (squared radii), one per line.
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// Filtration cutoff in power units; may be negative for weighted input.
    #[arg(
        long,
        value_name = "A1",
        required_unless_present = "radius",
        conflicts_with = "radius",
        allow_negative_numbers = true
    )]
    alpha: Option<f64>,
    /// Common ball radius, squared to get the cutoff; unweighted input only.
    #[arg(long, value_name = "R", conflicts_with = "weights")]
    radius: Option<f64>,
}

impl PointArgs {
    fn cutoff(&self) -> f64 {
        match self.alpha {
            Some(a) => a,
            None => {
                let r = self.radius.expect("clap enforces alpha or radius");
                r * r
            }
        }
    }

    fn load(&self) -> Result<WeightedPoints> {
        io::load_points(&self.points, self.weights.as_deref(), self.cutoff())
    }
}

#[derive(Args, Debug)]
struct TolArgs {
    /// Override the cutoff acceptance tolerance.
    #[arg(long, value_name = "EPS")]
    eps_c: Option<f64>,
    /// Override the feasibility tolerance.
    #[arg(long, value_name = "EPS")]
    eps_feas: Option<f64>,
    /// Override the factorization pivot tolerance.
    #[arg(long, value_name = "EPS")]
    eps_pivot: Option<f64>,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(e) = self.eps_c {
            t.eps_c = e;
        }
        if let Some(e) = self.eps_feas {
            t.eps_feas = e;
        }
        if let Some(e) = self.eps_pivot {
            t.eps_pivot = e;
        }
        t
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    points: PointArgs,
    /// Largest simplex dimension to emit.
    #[arg(long, value_name = "D")]
    dim: usize,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Append each simplex's witness coordinates to its line.
    #[arg(long)]
    witnesses: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct BettiArgs {
    #[command(flatten)]
    points: PointArgs,
    /// Coefficient field order; must be prime.
    #[arg(long, value_name = "P")]
    prime: u64,
    /// Report Betti numbers for dimensions 0 through K.
    #[arg(long, value_name = "K")]
    upto: usize,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    points: PointArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    points: PointArgs,
    /// Largest simplex dimension to check.
    #[arg(long, value_name = "D")]
    dim: usize,
    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Complex file with witness coordinates (built with --witnesses).
    #[arg(long, value_name = "FILE")]
    complex: PathBuf,
    /// Output OFF file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Longest flag dimension to emit; 2 gives segments and triangles.
    #[arg(long, value_name = "D", default_value_t = 2)]
    flag_dim: usize,
}

fn params(dim: usize, threads: Option<usize>, tol: &TolArgs) -> BuildParams {
    let mut p = BuildParams::new(dim);
    p.threads = threads;
    p.tolerances = tol.tolerances();
    p
}

fn run_build(args: BuildArgs) -> Result<()> {
    let pts = args.points.load()?;
    let p = params(args.dim, args.threads, &args.tol);
    let (complex, witness) = build_alpha(&pts, &p)?;
    let file = io::ComplexFile {
        ambient: pts.dim(),
        cutoff: pts.cutoff(),
        complex,
        witness: args.witnesses.then_some(witness),
    };
    match &args.out {
        Some(path) => io::write_complex(path, &file),
        None => {
            let text =
                io::format_complex(&file.complex, file.witness.as_ref(), file.ambient, file.cutoff)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn run_betti(args: BettiArgs) -> Result<()> {
    let pts = args.points.load()?;
    let p = params(args.upto + 1, args.threads, &args.tol);
    let b = betti_pipeline(&pts, &p, args.prime)?;
    for v in &b.0 {
        println!("{v}");
    }
    Ok(())
}

fn run_graph(args: GraphArgs) -> Result<()> {
    let pts = args.points.load()?;
    let graph = build_cech_graph(&pts);
    let mut out = String::new();
    for (i, j) in graph.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    print!("{out}");
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let pts = args.points.load()?;
    let p = params(args.dim, args.threads, &args.tol);
    let (complex, witness) = build_alpha(&pts, &p)?;
    let (reference, ref_witness) =
        brute_alpha(&pts, args.dim).context("reference construction failed")?;
    let diff = compare(
        (&complex, &witness),
        (&reference, &ref_witness),
        1e-9,
        1e-7,
    );
    if diff.is_match() {
        println!("OK: complexes identical");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{diff}");
        Ok(ExitCode::from(1))
    }
}

fn run_export(args: ExportArgs) -> Result<()> {
    let file = io::read_complex(&args.complex)?;
    let Some(witness) = file.witness else {
        bail!(
            "{} has no witness coordinates; rebuild with --witnesses",
            args.complex.display()
        );
    };
    let embedding = barycentric_embed(&file.complex, &witness, args.flag_dim)?;
    let mut out = std::fs::File::create(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    io::write_off(&embedding, &mut out)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Build(args) => run_build(args).map(|()| ExitCode::SUCCESS),
        Command::Betti(args) => run_betti(args).map(|()| ExitCode::SUCCESS),
        Command::Graph(args) => run_graph(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => run_verify(args),
        Command::ExportGeom(args) => run_export(args).map(|()| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use quanco::biogas::{
    generate_with_stats, read_problem, true_minimum, univariate_optimum, write_problem, BiomassProblem,
    MvnGenConfig, Variant,
};
use quanco::ising::SolverParams;

use crate::error::{BenchError, Result};
use crate::output::{write_atomic, write_json, write_sweep, write_trace_csv};
use crate::report::report_dirs;
use crate::runner::{run_on_problem, run_sweep, RunRecord};
use crate::spec::{AlgoSpec, Algorithm, ExperimentSpec, RadiusRule};

pub const TRACE_CSV: &str = "trace.csv";
pub const RUN_JSON: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "quanco", version, about = "Trust-region benchmarks on biogas blending problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a problem and write it as JSON.
    Generate(GenerateArgs),
    /// Run one optimiser on a problem file.
    Run(RunArgs),
    /// Run every combination in an experiment file.
    Sweep(SweepArgs),
    /// Print the criteria table for sweep output directories.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "cone")]
    pub variant: Variant,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Generator JSON replacing the synthetic defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub problem: PathBuf,
    #[arg(long, default_value = "quanco")]
    pub algo: Algorithm,
    #[arg(long, default_value = "exact")]
    pub solver: String,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Annealing samples per sub-problem.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the trace and summary; defaults to the problem's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solver parameter JSON; flags above take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the experiment file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replaces the experiment's seed list with a single seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Run jobs one at a time on the calling thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<BiomassProblem> {
    if args.k == 0 {
        return Err(BenchError::Usage("--k must be at least 1".into()));
    }
    let cfg = match &args.config {
        Some(path) => {
            let cfg: MvnGenConfig = read_json(path)?;
            if cfg.variant != args.variant {
                log::info!("using variant {} from {}", cfg.variant, path.display());
            }
            cfg
        }
        None => MvnGenConfig::synthetic(args.variant),
    }
    .with_seed(args.seed);
    let (problem, stats) = generate_with_stats(&cfg, args.k)?;
    write_atomic(&args.out, |w| Ok(write_problem(&problem, w)?))?;

    let best = true_minimum(&problem)?;
    let optima = problem
        .biomasses()
        .iter()
        .map(|b| univariate_optimum(b, problem.revenue()))
        .collect::<quanco::Result<Vec<_>>>()?;
    let feeds: Vec<f64> = optima.iter().map(|o| o.0).collect();
    let values: Vec<f64> = optima.iter().map(|o| o.1).collect();
    let lo = feeds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = feeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = |e| BenchError::io(&args.out, e);
    writeln!(
        out,
        "wrote {} ({} biomasses, {} of {} draws accepted)",
        args.out.display(),
        problem.len(),
        stats.accepted,
        stats.drawn
    )
    .map_err(w)?;
    writeln!(out, "f_min = {:.10} at biomass {} with feed {:.6}", best.f_min, best.index, best.feed).map_err(w)?;
    writeln!(out, "single-biomass optima: feed in [{lo:.4}, {hi:.4}], cost from {:.4} to {worst:.4}", best.f_min)
        .map_err(w)?;
    Ok(problem)
}

fn load_problem(path: &Path) -> Result<BiomassProblem> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    Ok(read_problem(std::io::BufReader::new(file))?)
}

fn cap_of(e: &quanco::Error) -> Option<usize> {
    match e {
        quanco::Error::SizeCapExceeded { cap, .. } => Some(*cap),
        quanco::Error::Solver { source, .. } => cap_of(source),
        _ => None,
    }
}

/// Adds the problem size to exact-solver cap errors.
fn with_guidance(err: BenchError, k: usize, m: usize) -> BenchError {
    match &err {
        BenchError::Core(e) => match cap_of(e) {
            Some(cap) => BenchError::Usage(format!(
                "{e}. K*M = {k}*{m} = {} bits; choose --m with K*M <= {cap}, or --solver sa",
                k * m
            )),
            None => err,
        },
        _ => err,
    }
}

pub fn run(args: &RunArgs, out: &mut dyn Write) -> Result<RunRecord> {
    let problem = load_problem(&args.problem)?;
    let variant = problem
        .variant()
        .ok_or_else(|| BenchError::Usage("problem mixes yield families; run needs a single family".into()))?;
    let mut params: SolverParams = match &args.config {
        Some(p) => read_json(p)?,
        None => SolverParams::default(),
    };
    if args.samples.is_some() {
        params.samples = args.samples;
    }
    let algo = AlgoSpec { algo: args.algo, solver: args.solver.clone(), bits: args.m, params };
    let record = run_on_problem(&problem, variant, &algo, args.iters, args.seed, &RadiusRule::default())
        .map_err(|e| with_guidance(e, problem.len(), args.m))?;

    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args.problem.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    write_trace_csv(&dir.join(TRACE_CSV), &record.rows)?;
    write_json(&dir.join(RUN_JSON), &record)?;
    writeln!(
        out,
        "{}: normalised cost {:.6}, suboptimality {:.3e}, {} after {} iterations",
        record.algo,
        record.normalized_cost,
        record.suboptimality,
        record.reason,
        record.rows.len()
    )
    .map_err(|e| BenchError::io(&dir, e))?;
    Ok(record)
}

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<Vec<RunRecord>> {
    let mut spec = ExperimentSpec::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        spec.seeds = vec![seed];
    }
    if args.workers.is_some() {
        spec.workers = args.workers;
    }
    let dir = args
        .out
        .clone()
        .or_else(|| spec.output.clone())
        .ok_or_else(|| BenchError::Usage("no output directory: pass --out or set `output`".into()))?;
    let runs = run_sweep(&spec, !args.serial)?;
    write_sweep(&dir, &spec, &runs)?;
    let failed = runs.iter().filter(|r| !r.is_ok()).count();
    writeln!(out, "{} runs ({failed} failed) written to {}", runs.len(), dir.display())
        .map_err(|e| BenchError::io(&dir, e))?;
    Ok(runs)
}

pub fn report(args: &ReportArgs, out: &mut dyn Write) -> Result<String> {
    let text = report_dirs(&args.dirs)?;
    if let Some(path) = &args.out {
        write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(|e| BenchError::io(path, e)))?;
    }
    out.write_all(text.as_bytes()).map_err(|e| BenchError::io(Path::new("<stdout>"), e))?;
    Ok(text)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(a, out).map(drop),
        Command::Run(a) => run(a, out).map(drop),
        Command::Sweep(a) => sweep(a, out).map(drop),
        Command::Report(a) => report(a, out).map(drop),
    }
}

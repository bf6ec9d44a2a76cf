use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use threecubes::driver::{
    self, format_solutions, read_solutions, verify_file, write_atomic, DriverError, RunStatus, SearchConfig,
};
use threecubes::geometry::{make_covering, Arc, Fix, DEFAULT_MARGIN};
use threecubes::oracle::brute_force;
use threecubes::parametric::{FamilyId, ParamFamily};
use threecubes::report::density_report;
use threecubes::{verify_solution, TargetSet};

#[derive(Parser)]
#[command(name = "threecubes", version, about = "Search for integer solutions of x³ + y³ + z³ = k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice search over a height range, with optional checkpointing.
    Search(SearchArgs),
    /// Brute-force every solution up to a height bound.
    Oracle(OracleArgs),
    /// Re-verify solution files with exact arithmetic.
    Verify(VerifyArgs),
    /// Density report over one or more solution files.
    Report(ReportArgs),
    /// Write the flagstone covering manifest for a height range.
    Tiles(TilesArgs),
    /// Members of the parametric families for k = s³ and k = 2s³.
    Parametric(ParametricArgs),
}

#[derive(Args)]
struct TargetArgs {
    /// Largest target k; defaults to the largest of --targets.
    #[arg(long)]
    kmax: Option<u64>,
    /// Comma-separated explicit targets; all admissible k ≤ kmax if absent.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<u64>>,
}

impl TargetArgs {
    fn target_set(&self) -> Result<TargetSet> {
        let set = match (&self.targets, self.kmax) {
            (None, None) => bail!("give --kmax or --targets"),
            (None, Some(k)) => TargetSet::up_to(k)?,
            (Some(list), k) => {
                let k_max = k.or_else(|| list.iter().copied().max()).unwrap_or(0);
                TargetSet::explicit(k_max, list.iter().copied())?
            }
        };
        Ok(set)
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    b_lo: u64,
    #[arg(long)]
    b_hi: u64,
    #[command(flatten)]
    targets: TargetArgs,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Append-only progress log; an existing one is resumed.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Solution file; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the covering manifests here.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Stop after this many work units (resume with the same checkpoint).
    #[arg(long)]
    max_units: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    /// Largest coordinate magnitude.
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    kmax: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    kmax: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TilesArgs {
    #[arg(long)]
    b_lo: u64,
    #[arg(long)]
    b_hi: u64,
    #[arg(long)]
    kmax: u64,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Restrict the arc to [x-lo, x-hi] instead of the full reduced arc.
    #[arg(long, requires = "x_hi")]
    x_lo: Option<f64>,
    #[arg(long, requires = "x_lo")]
    x_hi: Option<f64>,
    /// Check containment at this many samples per flagstone.
    #[arg(long)]
    check: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    K1,
    K2,
}

#[derive(Args)]
struct ParametricArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 1)]
    scale: u64,
    /// Largest coordinate magnitude.
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn search(a: SearchArgs) -> Result<()> {
    let mut cfg = SearchConfig::new(a.b_lo, a.b_hi, a.targets.target_set()?);
    cfg.margin = a.margin;
    cfg.workers = a.workers;
    cfg.checkpoint = a.checkpoint;
    cfg.output = a.output;
    cfg.manifest = a.manifest;
    cfg.max_units = a.max_units;
    let outcome = driver::run(&cfg)?;
    match outcome.status {
        RunStatus::Complete(sols) => {
            eprintln!(
                "complete: {} solutions, {} of {} units run now",
                sols.len(),
                outcome.units_run,
                outcome.units_total
            );
            if cfg.output.is_none() {
                emit(None, &format_solutions(&sols))?;
            }
        }
        RunStatus::Interrupted { remaining } => {
            eprintln!(
                "interrupted: {} units run, {remaining} remaining; rerun with the same checkpoint to resume",
                outcome.units_run
            );
        }
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let r = brute_force(a.bound, a.kmax)?;
    eprintln!("{} solutions", r.solutions.len());
    emit(a.output.as_deref(), &r.to_text())
}

/// Lines that failed parsing or exact verification.
#[derive(Debug)]
struct VerificationFailed(usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} line(s) failed verification", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn verify(a: VerifyArgs) -> Result<()> {
    let mut failed = 0;
    for path in &a.files {
        let r = verify_file(path).with_context(|| format!("reading {}", path.display()))?;
        for f in &r.failures {
            eprintln!("{}:{}: {}: {}", path.display(), f.line, f.text.trim(), f.reason);
        }
        println!(
            "{}: {} checked, {} failed",
            path.display(),
            r.checked,
            r.failures.len()
        );
        failed += r.failures.len();
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(VerificationFailed(failed).into())
    }
}

fn report(a: ReportArgs) -> Result<()> {
    let mut corpus = Vec::new();
    let mut failed = 0;
    for path in &a.files {
        let (ok, errors) = read_solutions(path).with_context(|| format!("reading {}", path.display()))?;
        for e in &errors {
            eprintln!("{}:{}: {}", path.display(), e.line, e.reason);
        }
        for (line, s) in ok {
            if verify_solution(&s) {
                corpus.push(s);
            } else {
                eprintln!("{}:{line}: {s}: does not verify", path.display());
                failed += 1;
            }
        }
        failed += errors.len();
    }
    if failed > 0 {
        return Err(VerificationFailed(failed).into());
    }
    corpus.sort();
    corpus.dedup();
    emit(a.output.as_deref(), &density_report(&corpus, a.kmax).to_text())
}

fn tiles(a: TilesArgs) -> Result<()> {
    let arc = match (a.x_lo, a.x_hi) {
        (Some(lo), Some(hi)) => Arc::new(Fix::from_f64_floor(lo), Fix::from_f64_ceil(hi))?,
        _ => Arc::full(),
    };
    let plan = make_covering(&arc, a.b_lo, a.b_hi, a.kmax, a.margin)?;
    if let Some(samples) = a.check {
        for (i, f) in plan.flagstones().iter().enumerate() {
            f.check_containment(samples)
                .map_err(|x| anyhow!("flagstone {i} fails containment at X = {}", x.to_decimal()))?;
        }
        eprintln!("{} flagstones contain {samples} samples each", plan.len());
    } else {
        eprintln!("{} flagstones", plan.len());
    }
    emit(a.output.as_deref(), &plan.to_manifest())
}

fn parametric(a: ParametricArgs) -> Result<()> {
    let family = match a.family {
        Family::K1 => FamilyId::K1,
        Family::K2 => FamilyId::K2,
    };
    let fam = ParamFamily::new(family, a.scale)?;
    let mut members = fam.members_up_to(a.bound);
    members.sort();
    eprintln!("{} members for k = {}", members.len(), fam.k());
    emit(a.output.as_deref(), &format_solutions(&members))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<VerificationFailed>() {
        return 2;
    }
    match err.downcast_ref::<DriverError>() {
        Some(e) => e.exit_code() as u8,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(a) => search(a),
        Command::Oracle(a) => oracle(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report(a),
        Command::Tiles(a) => tiles(a),
        Command::Parametric(a) => parametric(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

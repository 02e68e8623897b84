use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vemsurf::study::{run_study_with_progress, ReferenceSpec, StudyConfig};
use vemsurf::{CantorPattern, LinearSolverKind, SeedMode};

/// Convergence study of the VEM minimal surface solver on Voronoi meshes.
///
/// Writes a CSV with columns mesh,h,N,it,e_h1,ecr_h1,e_l2,ecr_l2,c1,c2.
/// Exits with 2 if a refinement level did not converge, 1 on errors.
#[derive(Debug, Parser)]
#[command(name = "vemsurf", version)]
struct Args {
    /// concus | catenoid | scherk | schwarz | disk | cantor
    #[arg(long)]
    problem: String,

    /// uniform (Lloyd-relaxed) or random seeds
    #[arg(long, default_value = "uniform", value_parser = parse::<SeedMode>)]
    mode: SeedMode,

    /// Comma-separated dof targets, one per refinement level
    #[arg(long, value_delimiter = ',', required = true)]
    targets: Vec<usize>,

    /// Relative update threshold of the fixed-point iteration
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, default_value_t = 500)]
    max_iter: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// CSV output path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// analytic | fine:<multiplier>
    #[arg(long, default_value = "analytic", value_parser = parse::<ReferenceSpec>)]
    reference: ReferenceSpec,

    /// Side layout of the Cantor data: mirror | diagonal
    #[arg(long, default_value = "mirror", value_parser = parse::<CantorPattern>)]
    cantor_pattern: CantorPattern,

    /// Writes the finest solution as x,y,u CSV and a sibling .mesh file
    #[arg(long)]
    emit_surface: Option<PathBuf>,

    /// Lloyd iterations for uniform meshes
    #[arg(long, default_value_t = 100)]
    lloyd: usize,

    /// direct | cg
    #[arg(long, default_value = "direct", value_parser = parse::<LinearSolverKind>)]
    solver: LinearSolverKind,

    /// Suppress per-level progress on stderr
    #[arg(long, short)]
    quiet: bool,
}

fn parse<T: std::str::FromStr<Err = vemsurf::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: vemsurf::Error| e.to_string())
}

impl Args {
    fn config(&self) -> StudyConfig {
        StudyConfig {
            mode: self.mode,
            tolerance: self.tol,
            max_iterations: self.max_iter,
            rng_seed: self.seed,
            out: self.out.clone(),
            reference: self.reference,
            cantor_pattern: self.cantor_pattern,
            emit_surface: self.emit_surface.clone(),
            lloyd_iterations: self.lloyd,
            linear_solver: self.solver,
            ..StudyConfig::new(self.problem.clone(), self.targets.clone())
        }
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1; 2 is reserved for unconverged levels
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = vemsurf::init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let cfg = args.config();
    let quiet = args.quiet;
    match run_study_with_progress(&cfg, |msg| {
        if !quiet {
            eprintln!("{msg}");
        }
    }) {
        Ok(outcome) => {
            if cfg.out.is_none() {
                print!("{}", outcome.table.to_csv());
            }
            if !outcome.all_converged() {
                eprintln!("warning: at least one level hit the iteration cap");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

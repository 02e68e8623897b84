//! Convergence studies: one Voronoi mesh per dof target, a fixed-point
//! solve on each, and a CSV table of errors and rates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::analysis::{
    reference_solution, AnalyticSolution, ConvergenceTable, ErrorReport, ExactSolution, FineMeshSpec,
};
use crate::error::{Error, Result};
use crate::mesh::{generate_voronoi, save_mesh, SeedMode};
use crate::problems::{by_name, CantorPattern, TestProblem};
use crate::solver::{fixed_point_solve, DiscreteSolution, Discretization, FixedPointConfig, LinearSolverKind};

/// Source of the "exact" solution in the error columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSpec {
    Analytic,
    /// A uniform Voronoi solve with `multiplier` times the finest target.
    FineMesh { multiplier: usize },
}

impl std::str::FromStr for ReferenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "analytic" {
            return Ok(ReferenceSpec::Analytic);
        }
        let bad = || Error::Config(format!("bad reference `{s}` (expected analytic|fine:<multiplier>)"));
        let m: usize = s.strip_prefix("fine:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if m < 2 {
            return Err(Error::Config(format!("fine-mesh multiplier must be at least 2, got {m}")));
        }
        Ok(ReferenceSpec::FineMesh { multiplier: m })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: String,
    pub mode: SeedMode,
    /// Approximate dof count of each level; a level uses `target / 2` seeds.
    pub targets: Vec<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub rng_seed: u64,
    pub out: Option<PathBuf>,
    pub reference: ReferenceSpec,
    pub cantor_pattern: CantorPattern,
    /// Writes the finest solution as `x,y,u` plus a sibling `.mesh` file.
    pub emit_surface: Option<PathBuf>,
    /// Lloyd iterations of uniform meshes.
    pub lloyd_iterations: usize,
    pub linear_solver: LinearSolverKind,
}

impl StudyConfig {
    pub fn new(problem: impl Into<String>, targets: Vec<usize>) -> Self {
        Self {
            problem: problem.into(),
            mode: SeedMode::Uniform,
            targets,
            tolerance: 1e-9,
            max_iterations: 500,
            rng_seed: 0,
            out: None,
            reference: ReferenceSpec::Analytic,
            cantor_pattern: CantorPattern::default(),
            emit_surface: None,
            lloyd_iterations: 100,
            linear_solver: LinearSolverKind::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.len() < 2 {
            return Err(Error::Config(format!(
                "at least 2 refinement levels are needed for rates, got {}",
                self.targets.len()
            )));
        }
        if self.targets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("dof targets must be strictly increasing".into()));
        }
        if self.targets[0] < 8 {
            return Err(Error::Config(format!("dof target {} is too small", self.targets[0])));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }

    fn solver_config(&self) -> FixedPointConfig {
        FixedPointConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            linear_solver: self.linear_solver,
            ..Default::default()
        }
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            SeedMode::Uniform => "u",
            SeedMode::Random => "r",
        }
    }
}

/// Per-level solver history kept alongside the table.
#[derive(Debug, Clone)]
pub struct LevelLog {
    pub converged: bool,
    pub energies: Vec<f64>,
    pub updates: Vec<f64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub table: ConvergenceTable,
    pub levels: Vec<LevelLog>,
    /// Dofs and iterations of the fine reference solve, if one was used.
    pub reference: Option<(usize, usize)>,
}

impl StudyOutcome {
    pub fn all_converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }

    /// 0 on full convergence, 2 if any level stopped at the iteration cap.
    pub fn exit_code(&self) -> i32 {
        if self.all_converged() {
            0
        } else {
            2
        }
    }
}

/// Runs every refinement level in order and writes the CSV to `config.out`.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome> {
    run_study_with_progress(config, |_| {})
}

/// As [`run_study`], calling `progress` with a one-line status per step.
pub fn run_study_with_progress(config: &StudyConfig, mut progress: impl FnMut(&str)) -> Result<StudyOutcome> {
    config.validate()?;
    let problem = by_name(&config.problem, config.cantor_pattern)?;
    // fail on an unwritable path before any solve
    if let Some(out) = &config.out {
        std::fs::write(out, "").map_err(|e| Error::io(out, e))?;
    }

    let solver_cfg = config.solver_config();
    let (exact, reference): (Box<dyn ExactSolution>, _) = match config.reference {
        ReferenceSpec::Analytic => (Box::new(AnalyticSolution::from_problem(&problem)?), None),
        ReferenceSpec::FineMesh { multiplier } => {
            let spec = FineMeshSpec {
                target_dofs: multiplier * config.targets.last().unwrap(),
                mode: SeedMode::Uniform,
                lloyd_iterations: config.lloyd_iterations.max(1),
                rng_seed: config.rng_seed.wrapping_add(1),
            };
            let t = Instant::now();
            let r = reference_solution(&problem, &spec, &solver_cfg)?;
            let info = (r.discretization().dof_count(), r.iterations());
            progress(&format!(
                "reference: N={} it={} ({:.1?})",
                info.0,
                info.1,
                t.elapsed()
            ));
            (Box::new(r), Some(info))
        }
    };

    let mut rows = Vec::with_capacity(config.targets.len());
    let mut levels = Vec::with_capacity(config.targets.len());
    let mut finest = None;
    for (k, &target) in config.targets.iter().enumerate() {
        let t = Instant::now();
        let name = format!("{}-{}_{}", config.mode_name(), problem.name, k + 1);
        let (disc, rep) = solve_level(&problem, config, target, &solver_cfg)?;
        let row = ErrorReport::compute(name, &disc, &rep.solution.values, rep.iterations, exact.as_ref())?;
        let log = LevelLog {
            converged: rep.converged,
            energies: rep.energies,
            updates: rep.per_iteration_updates,
            elapsed: t.elapsed(),
        };
        progress(&format!(
            "{}: N={} it={}{} e_h1={:.3e} c1={:.3} ({:.1?})",
            row.mesh,
            row.n,
            row.iterations,
            if log.converged { "" } else { " (not converged)" },
            row.e_h1,
            row.c1,
            log.elapsed
        ));
        rows.push(row);
        levels.push(log);
        finest = Some(rep.solution);
    }

    let table = ConvergenceTable::new(rows)?;
    if let Some(out) = &config.out {
        std::fs::write(out, table.to_csv()).map_err(|e| Error::io(out, e))?;
    }
    if let (Some(path), Some(sol)) = (&config.emit_surface, &finest) {
        emit_surface(sol, path)?;
    }
    Ok(StudyOutcome {
        table,
        levels,
        reference,
    })
}

fn solve_level(
    problem: &TestProblem,
    config: &StudyConfig,
    target: usize,
    solver_cfg: &FixedPointConfig,
) -> Result<(Discretization, crate::solver::SolveReport)> {
    let mesh = generate_voronoi(
        &problem.domain,
        target / 2,
        config.mode,
        config.lloyd_iterations,
        config.rng_seed,
    )?;
    let disc = Discretization::new(Arc::new(mesh))?;
    let rep = fixed_point_solve(&disc, problem.boundary_fn.as_ref(), solver_cfg)?;
    Ok((disc, rep))
}

/// Writes `x,y,u` (one line per vertex after the header) to `path` and the
/// mesh to `path` with extension `.mesh`.
pub fn emit_surface(solution: &DiscreteSolution, path: &Path) -> Result<()> {
    let mut s = String::from("x,y,u\n");
    for (p, u) in solution.mesh.vertices().iter().zip(&solution.values) {
        let _ = writeln!(s, "{:.9e},{:.9e},{:.9e}", p.x, p.y, u);
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))?;
    save_mesh(&solution.mesh, surface_mesh_path(path))
}

/// Sibling mesh file written by [`emit_surface`].
pub fn surface_mesh_path(path: &Path) -> PathBuf {
    path.with_extension("mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_spec_parsing() {
        assert_eq!("analytic".parse::<ReferenceSpec>().unwrap(), ReferenceSpec::Analytic);
        assert_eq!(
            "fine:16".parse::<ReferenceSpec>().unwrap(),
            ReferenceSpec::FineMesh { multiplier: 16 }
        );
        for bad in ["fine", "fine:", "fine:x", "fine:1", "exact"] {
            assert!(bad.parse::<ReferenceSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn single_level_is_rejected() {
        let cfg = StudyConfig::new("concus", vec![4000]);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(matches!(run_study(&cfg), Err(Error::Config(_))));
        let cfg = StudyConfig::new("concus", vec![800, 400]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn analytic_reference_needs_closed_form() {
        let cfg = StudyConfig::new("disk", vec![100, 200]);
        assert!(matches!(run_study(&cfg), Err(Error::Config(_))));
        let cfg = StudyConfig::new("helicoid", vec![100, 200]);
        assert!(matches!(run_study(&cfg), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn small_study_names_rows() {
        let mut cfg = StudyConfig::new("concus", vec![200, 400]);
        cfg.lloyd_iterations = 20;
        let out = run_study(&cfg).unwrap();
        assert_eq!(out.exit_code(), 0);
        assert_eq!(out.table.rows[0].mesh, "u-concus_1");
        assert_eq!(out.table.rows[1].mesh, "u-concus_2");
        assert!(out.table.ecr_h1[1].unwrap() > 0.5);
    }
}

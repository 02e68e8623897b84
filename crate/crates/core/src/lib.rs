//! Lowest-order virtual element discretization of the minimal surface
//! equation on clipped Voronoi meshes.
//!
//! The nonlinear problem is solved by a fixed-point iteration in which every
//! step is a weighted Laplace problem with per-cell coefficients
//! `1 / f_h^E(u)`. [`study::run_study`] runs a refinement sequence and
//! produces a table of errors, convergence rates and the stabilization
//! constant C(u_h).
//!
//! ```no_run
//! use vemsurf::study::{run_study, StudyConfig};
//!
//! let cfg = StudyConfig::new("concus", vec![4000, 8000, 16000]);
//! let outcome = run_study(&cfg)?;
//! print!("{}", outcome.table.to_csv());
//! # Ok::<(), vemsurf::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
mod error;
pub mod geometry;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod study;
pub mod vem;

pub use error::{Error, Result};
pub use geometry::Point2;
pub use mesh::{DomainDescriptor, PolygonalMesh, SeedMode};
pub use problems::{CantorPattern, TestProblem};
pub use solver::{fixed_point_solve, newton_solve, DiscreteSolution, Discretization, FixedPointConfig, LinearSolverKind, SolveReport};
pub use vem::LocalElement;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VEM_THREADS";

/// Configures the global rayon pool from `VEM_THREADS`, if set. Has no
/// effect once the pool is running.
pub fn init_thread_pool() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // a pool built earlier (e.g. by a test) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

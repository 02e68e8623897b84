//! Fixed-point solver on generated meshes.

use std::sync::Arc;

use vemsurf::mesh::generate_voronoi;
use vemsurf::problems;
use vemsurf::{fixed_point_solve, newton_solve, Discretization, FixedPointConfig, LinearSolverKind, SeedMode};

fn concus_disc(seeds: usize) -> (Discretization, vemsurf::TestProblem) {
    let p = problems::concus();
    let m = generate_voronoi(&p.domain, seeds, SeedMode::Uniform, 50, 4).unwrap();
    (Discretization::new(Arc::new(m)).unwrap(), p)
}

#[test]
fn direct_and_cg_agree() {
    let (disc, p) = concus_disc(5000);
    assert!(disc.dof_count() > 9000);
    let run = |kind| {
        let cfg = FixedPointConfig {
            linear_solver: kind,
            ..Default::default()
        };
        fixed_point_solve(&disc, p.boundary_fn.as_ref(), &cfg).unwrap()
    };
    let a = run(LinearSolverKind::Direct);
    let b = run(LinearSolverKind::ConjugateGradient);
    assert!(a.converged && b.converged);
    assert_eq!(a.iterations, b.iterations);
    let diff = a
        .solution
        .values
        .iter()
        .zip(&b.solution.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn area_functional_decreases() {
    for p in [problems::concus(), problems::scherk(), problems::disk_x2(), problems::cantor_problem(Default::default())] {
        let m = generate_voronoi(&p.domain, 1500, SeedMode::Random, 0, 9).unwrap();
        let disc = Discretization::new(Arc::new(m)).unwrap();
        let rep = fixed_point_solve(&disc, p.boundary_fn.as_ref(), &FixedPointConfig::default()).unwrap();
        assert!(rep.converged, "{}", p.name);
        assert_eq!(rep.energies.len(), rep.iterations);
        for w in rep.energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{}: {} -> {}", p.name, w[0], w[1]);
        }
        // the discrete surface is at least as large as the domain
        assert!(*rep.energies.last().unwrap() >= disc.mesh().total_area());
    }
}

#[test]
fn picard_updates_contract() {
    let (disc, p) = concus_disc(2000);
    let rep = fixed_point_solve(&disc, p.boundary_fn.as_ref(), &FixedPointConfig::default()).unwrap();
    let u = &rep.per_iteration_updates;
    assert!(*u.last().unwrap() < 1e-9);
    // geometric decay after the first step
    for w in u[1..].windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn newton_and_picard_agree_on_cantor() {
    let p = problems::cantor_problem(Default::default());
    let m = generate_voronoi(&p.domain, 3000, SeedMode::Uniform, 30, 2).unwrap();
    let disc = Discretization::new(Arc::new(m)).unwrap();
    let cfg = FixedPointConfig {
        tolerance: 1e-11,
        max_iterations: 1000,
        ..Default::default()
    };
    let a = fixed_point_solve(&disc, p.boundary_fn.as_ref(), &cfg).unwrap();
    let b = newton_solve(&disc, p.boundary_fn.as_ref(), &cfg).unwrap();
    assert!(a.converged && b.converged);
    assert!(b.iterations * 3 < a.iterations);
    let diff = a
        .solution
        .values
        .iter()
        .zip(&b.solution.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
    for w in b.energies.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn discrete_maximum_principle_on_smooth_problems() {
    for p in [problems::concus(), problems::catenoid(), problems::scherk(), problems::schwarz_patch(), problems::disk_x2()] {
        let m = generate_voronoi(&p.domain, 2000, SeedMode::Uniform, 30, 5).unwrap();
        let disc = Discretization::new(Arc::new(m)).unwrap();
        let rep = fixed_point_solve(&disc, p.boundary_fn.as_ref(), &FixedPointConfig::default()).unwrap();
        let mesh = disc.mesh();
        let bnd: Vec<f64> = (0..mesh.dof_count()).filter(|&v| mesh.is_boundary(v)).map(|v| rep.solution.values[v]).collect();
        let lo = bnd.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = bnd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eps = 1e-6 * (hi - lo);
        for &u in &rep.solution.values {
            assert!(u >= lo - eps && u <= hi + eps, "{}: {u} outside [{lo}, {hi}]", p.name);
        }
    }
}

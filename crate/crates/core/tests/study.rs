//! Study runner and surface output.

use std::sync::Arc;

use vemsurf::mesh::{generate_voronoi, load_mesh};
use vemsurf::study::{emit_surface, run_study, surface_mesh_path, StudyConfig};
use vemsurf::{fixed_point_solve, DiscreteSolution, Discretization, DomainDescriptor, Error, FixedPointConfig, SeedMode};

fn read_surface(path: &std::path::Path) -> Vec<[f64; 3]> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn emitted_surface_reproduces_linear_solution() {
    let m = generate_voronoi(&DomainDescriptor::unit_square(), 300, SeedMode::Random, 0, 2).unwrap();
    let disc = Discretization::new(Arc::new(m)).unwrap();
    let f = |p: vemsurf::Point2| 2.0 * p.x - 3.0 * p.y + 1.0;
    let rep = fixed_point_solve(&disc, &f, &FixedPointConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    emit_surface(&rep.solution, &path).unwrap();
    let rows = read_surface(&path);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), disc.dof_count() + 1);
    for r in &rows {
        // 10 significant digits per field
        assert!((r[2] - (2.0 * r[0] - 3.0 * r[1] + 1.0)).abs() < 1e-8);
    }
    let mesh = load_mesh(surface_mesh_path(&path)).unwrap();
    assert_eq!(mesh.dof_count(), rows.len());
}

#[test]
fn emitted_constant_surface() {
    let m = generate_voronoi(&DomainDescriptor::unit_square(), 100, SeedMode::Random, 0, 2).unwrap();
    let sol = DiscreteSolution {
        values: vec![0.25; m.dof_count()],
        mesh: Arc::new(m),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    emit_surface(&sol, &path).unwrap();
    assert!(read_surface(&path).iter().all(|r| r[2] == 0.25));
    let bad = dir.path().join("missing").join("c.csv");
    assert!(matches!(emit_surface(&sol, &bad), Err(Error::Io { .. })));
}

#[test]
fn study_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let cfg = StudyConfig {
            out: Some(out.clone()),
            mode: SeedMode::Random,
            rng_seed: 3,
            ..StudyConfig::new("scherk", vec![400, 800, 1600])
        };
        let outcome = run_study(&cfg).unwrap();
        assert_eq!(outcome.exit_code(), 0);
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "mesh,h,N,it,e_h1,ecr_h1,e_l2,ecr_l2,c1,c2");
    assert!(lines[1].starts_with("r-scherk_1,"));
    // every real carries at least 9 significant digits
    for field in lines[3].split(',').skip(1) {
        if field.contains('e') {
            let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
            assert!(mantissa.len() >= 9, "{field}");
        }
    }
}

#[test]
fn unconverged_levels_set_exit_code() {
    let cfg = StudyConfig {
        max_iterations: 3,
        ..StudyConfig::new("concus", vec![200, 400])
    };
    let outcome = run_study(&cfg).unwrap();
    assert!(!outcome.all_converged());
    assert_eq!(outcome.exit_code(), 2);
    assert!(outcome.table.rows.iter().all(|r| r.iterations == 3));
}

#[test]
fn unwritable_output_fails_before_solving() {
    let cfg = StudyConfig {
        out: Some("/nonexistent-dir/x.csv".into()),
        ..StudyConfig::new("concus", vec![200, 400])
    };
    assert!(matches!(run_study(&cfg), Err(Error::Io { .. })));
}

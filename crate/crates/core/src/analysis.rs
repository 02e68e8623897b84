//! Error norms, the stabilization constant C(u_h), convergence rates and
//! fine-mesh reference solutions.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{convex_contains, polygon_distance, polygon_quadrature, Point2};
use crate::mesh::{generate_voronoi, DomainDescriptor, PolygonalMesh, SeedMode};
use crate::problems::{ScalarField, TestProblem, VectorField};
use crate::solver::{newton_solve, Discretization, FixedPointConfig};

/// A function used as the "exact" solution in the error norms.
pub trait ExactSolution: Sync {
    fn value(&self, p: Point2) -> Result<f64>;
    fn gradient(&self, p: Point2) -> Result<[f64; 2]>;
}

/// Closed-form solution and gradient.
#[derive(Clone)]
pub struct AnalyticSolution {
    pub value: ScalarField,
    pub gradient: VectorField,
}

impl AnalyticSolution {
    pub fn from_problem(problem: &TestProblem) -> Result<Self> {
        match (&problem.exact, &problem.exact_grad) {
            (Some(u), Some(g)) => Ok(Self {
                value: u.clone(),
                gradient: g.clone(),
            }),
            _ => Err(Error::Config(format!(
                "problem `{}` has no analytic solution; use a fine-mesh reference",
                problem.name
            ))),
        }
    }
}

impl ExactSolution for AnalyticSolution {
    fn value(&self, p: Point2) -> Result<f64> {
        Ok((self.value)(p))
    }

    fn gradient(&self, p: Point2) -> Result<[f64; 2]> {
        Ok((self.gradient)(p))
    }
}

/// The per-cell linear polynomial `Pi v` in global coordinates.
#[derive(Debug, Clone, Copy)]
struct CellLinear {
    centroid: Point2,
    value: f64,
    grad: [f64; 2],
}

impl CellLinear {
    fn eval(&self, p: Point2) -> f64 {
        self.value + self.grad[0] * (p.x - self.centroid.x) + self.grad[1] * (p.y - self.centroid.y)
    }
}

fn cell_linears(disc: &Discretization, u: &[f64]) -> Vec<CellLinear> {
    disc.elements()
        .par_iter()
        .enumerate()
        .map(|(c, el)| {
            let v = disc.local_values(c, u);
            let coef = el.projected_linear(&v);
            CellLinear {
                centroid: el.centroid(),
                value: coef[0],
                grad: el.projected_gradient(&v),
            }
        })
        .collect()
}

fn check_len(disc: &Discretization, u: &[f64]) -> Result<()> {
    if u.len() != disc.dof_count() {
        return Err(Error::Assembly(format!(
            "solution has {} entries, mesh has {} vertices",
            u.len(),
            disc.dof_count()
        )));
    }
    Ok(())
}

/// Sums `(|e|^2, |ref|^2)` over all cells with the fan rule; the per-cell
/// partial sums are reduced in cell order.
fn integrate_pairs<F>(disc: &Discretization, u: &[f64], integrand: F) -> Result<(f64, f64)>
where
    F: Fn(&CellLinear, Point2) -> Result<(f64, f64)> + Sync,
{
    check_len(disc, u)?;
    let lin = cell_linears(disc, u);
    let parts: Vec<Result<(f64, f64)>> = disc
        .elements()
        .par_iter()
        .zip(&lin)
        .map(|(el, l)| {
            let mut acc = (0.0, 0.0);
            for (p, w) in polygon_quadrature(el.coords(), el.centroid()) {
                let (a, b) = integrand(l, p)?;
                acc.0 += w * a;
                acc.1 += w * b;
            }
            Ok(acc)
        })
        .collect();
    let mut total = (0.0, 0.0);
    for r in parts {
        let (a, b) = r?;
        total.0 += a;
        total.1 += b;
    }
    Ok(total)
}

fn ratio(num2: f64, den2: f64, what: &str) -> Result<f64> {
    if !(den2 > 0.0) {
        return Err(Error::Undefined(format!(
            "{what} of the exact solution vanishes; relative error is undefined"
        )));
    }
    Ok((num2 / den2).sqrt())
}

/// `|grad u - grad Pi u_h| / |grad u|` in L2.
pub fn error_h1(disc: &Discretization, u: &[f64], exact: &dyn ExactSolution) -> Result<f64> {
    let (n, d) = integrate_pairs(disc, u, |l, p| {
        let g = exact.gradient(p)?;
        let (ex, ey) = (g[0] - l.grad[0], g[1] - l.grad[1]);
        Ok((ex * ex + ey * ey, g[0] * g[0] + g[1] * g[1]))
    })?;
    ratio(n, d, "the gradient")
}

/// `|u - Pi u_h| / |u|` in L2.
pub fn error_l2(disc: &Discretization, u: &[f64], exact: &dyn ExactSolution) -> Result<f64> {
    let (n, d) = integrate_pairs(disc, u, |l, p| {
        let v = exact.value(p)?;
        let e = v - l.eval(p);
        Ok((e * e, v * v))
    })?;
    ratio(n, d, "the L2 norm")
}

/// Length scale dividing the stabilization seminorm in C(u_h).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthScale {
    /// The mesh size h (column C1).
    MeshSize,
    /// `1 / sqrt(N)` (column C2).
    InvSqrtDofs,
}

/// `C(u_h) = sqrt(sum_E S^E((I - Pi) u_h, (I - Pi) u_h)) / l`.
pub fn constant_c(disc: &Discretization, u: &[f64], scale: LengthScale) -> Result<f64> {
    check_len(disc, u)?;
    let parts: Vec<f64> = disc
        .elements()
        .par_iter()
        .enumerate()
        .map(|(c, el)| el.stab_energy(&disc.local_values(c, u)))
        .collect();
    let s: f64 = parts.iter().sum();
    let l = match scale {
        LengthScale::MeshSize => disc.mesh().mesh_size(),
        LengthScale::InvSqrtDofs => 1.0 / (disc.dof_count() as f64).sqrt(),
    };
    Ok(s.sqrt() / l)
}

/// Estimated convergence rate with respect to N, assuming `N ~ h^-2`:
/// `-2 ln(e1 / e0) / ln(N1 / N0)`.
pub fn ecr(prev: (usize, f64), curr: (usize, f64)) -> Result<f64> {
    let ((n0, e0), (n1, e1)) = (prev, curr);
    if !(e0 > 0.0 && e1 > 0.0) {
        return Err(Error::Undefined(format!("rate of non-positive errors {e0:e}, {e1:e}")));
    }
    if n1 <= n0 {
        return Err(Error::Undefined(format!("rate needs increasing N, got {n0} then {n1}")));
    }
    Ok(-2.0 * (e1 / e0).ln() / (n1 as f64 / n0 as f64).ln())
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mesh: String,
    pub h: f64,
    pub n: usize,
    pub iterations: usize,
    pub e_h1: f64,
    pub e_l2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ErrorReport {
    /// Errors and C(u_h) of the discrete solution `u` on `disc`.
    pub fn compute(
        mesh: impl Into<String>,
        disc: &Discretization,
        u: &[f64],
        iterations: usize,
        exact: &dyn ExactSolution,
    ) -> Result<Self> {
        Ok(Self {
            mesh: mesh.into(),
            h: disc.mesh().mesh_size(),
            n: disc.dof_count(),
            iterations,
            e_h1: error_h1(disc, u, exact)?,
            e_l2: error_l2(disc, u, exact)?,
            c1: constant_c(disc, u, LengthScale::MeshSize)?,
            c2: constant_c(disc, u, LengthScale::InvSqrtDofs)?,
        })
    }
}

pub const CSV_HEADER: &str = "mesh,h,N,it,e_h1,ecr_h1,e_l2,ecr_l2,c1,c2";

/// Rows ordered by increasing N with rates between consecutive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    /// `None` on the first row and where a rate is undefined.
    pub ecr_h1: Vec<Option<f64>>,
    pub ecr_l2: Vec<Option<f64>>,
}

impl ConvergenceTable {
    pub fn new(rows: Vec<ErrorReport>) -> Result<Self> {
        if let Some(w) = rows.windows(2).find(|w| w[1].n <= w[0].n) {
            return Err(Error::Config(format!(
                "refinement levels must have increasing N, got {} then {}",
                w[0].n, w[1].n
            )));
        }
        let rates = |f: fn(&ErrorReport) -> f64| -> Vec<Option<f64>> {
            std::iter::once(None)
                .chain(rows.windows(2).map(|w| ecr((w[0].n, f(&w[0])), (w[1].n, f(&w[1]))).ok()))
                .take(rows.len())
                .collect()
        };
        let ecr_h1 = rates(|r| r.e_h1);
        let ecr_l2 = rates(|r| r.e_l2);
        Ok(Self { rows, ecr_h1, ecr_l2 })
    }

    /// CSV text with [`CSV_HEADER`]; reals use 10 significant digits and
    /// undefined rates are empty fields.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{:.9e},{},{},{:.9e},{},{:.9e},{},{:.9e},{:.9e}",
                r.mesh,
                r.h,
                r.n,
                r.iterations,
                r.e_h1,
                opt(self.ecr_h1[i]),
                r.e_l2,
                opt(self.ecr_l2[i]),
                r.c1,
                r.c2
            );
        }
        s
    }
}

/// Uniform bucket grid over cell bounding boxes.
struct CellLocator {
    origin: Point2,
    size: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    cells: Vec<usize>,
}

impl CellLocator {
    fn new(mesh: &PolygonalMesh) -> Self {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in mesh.vertices() {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let area = ((hi.x - lo.x) * (hi.y - lo.y)).max(f64::MIN_POSITIVE);
        let size = (area / mesh.cell_count().max(1) as f64).sqrt().max(f64::MIN_POSITIVE);
        let nx = (((hi.x - lo.x) / size).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / size).ceil() as usize).max(1);
        let mut me = Self {
            origin: lo,
            size,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            cells: Vec::new(),
        };
        let ranges: Vec<_> = (0..mesh.cell_count())
            .map(|c| {
                let pts = mesh.cell_points(c);
                let (mut a, mut b) = (pts[0], pts[0]);
                for p in &pts {
                    a = Point2::new(a.x.min(p.x), a.y.min(p.y));
                    b = Point2::new(b.x.max(p.x), b.y.max(p.y));
                }
                let (i0, j0) = me.bucket(a);
                let (i1, j1) = me.bucket(b);
                (i0, j0, i1, j1)
            })
            .collect();
        for &(i0, j0, i1, j1) in &ranges {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    me.start[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 0..nx * ny {
            me.start[k + 1] += me.start[k];
        }
        let mut fill = me.start.clone();
        me.cells = vec![0; me.start[nx * ny]];
        for (c, &(i0, j0, i1, j1)) in ranges.iter().enumerate() {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    me.cells[fill[j * nx + i]] = c;
                    fill[j * nx + i] += 1;
                }
            }
        }
        me
    }

    fn bucket(&self, p: Point2) -> (usize, usize) {
        let clamp = |t: f64, n: usize| (t.floor().max(0.0) as usize).min(n - 1);
        (
            clamp((p.x - self.origin.x) / self.size, self.nx),
            clamp((p.y - self.origin.y) / self.size, self.ny),
        )
    }

    fn candidates(&self, i: usize, j: usize) -> &[usize] {
        let k = j * self.nx + i;
        &self.cells[self.start[k]..self.start[k + 1]]
    }
}

/// A discrete solution on a fine mesh evaluated through its per-cell
/// projections, used in place of an unknown exact solution.
pub struct ReferenceSolution {
    disc: Discretization,
    values: Vec<f64>,
    linears: Vec<CellLinear>,
    locator: CellLocator,
    domain: DomainDescriptor,
    iterations: usize,
}

impl ReferenceSolution {
    /// Wraps an already solved discrete function.
    pub fn from_solution(disc: Discretization, values: Vec<f64>, domain: DomainDescriptor, iterations: usize) -> Result<Self> {
        check_len(&disc, &values)?;
        let linears = cell_linears(&disc, &values);
        let locator = CellLocator::new(disc.mesh());
        Ok(Self {
            disc,
            values,
            linears,
            locator,
            domain,
            iterations,
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Index of the fine cell used to evaluate at `p`.
    ///
    /// Points inside the domain but outside the polygonal fine mesh (near
    /// curved boundaries) use the nearest cell.
    pub fn locate(&self, p: Point2) -> Result<usize> {
        let mesh = self.disc.mesh();
        let tol = 1e-12 * self.domain.length_scale();
        let (i, j) = self.locator.bucket(p);
        for &c in self.locator.candidates(i, j) {
            if convex_contains(self.disc.elements()[c].coords(), p, tol) {
                return Ok(c);
            }
        }
        if !self.domain.contains(p) && !on_straight_boundary(&self.domain, p, tol) {
            return Err(Error::Location(p.x, p.y));
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for jj in j.saturating_sub(1)..=(j + 1).min(self.locator.ny - 1) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.locator.nx - 1) {
                for &c in self.locator.candidates(ii, jj) {
                    let d = polygon_distance(&mesh.cell_points(c), p);
                    if d < best.0 {
                        best = (d, c);
                    }
                }
            }
        }
        if best.1 == usize::MAX {
            return Err(Error::Location(p.x, p.y));
        }
        Ok(best.1)
    }
}

fn on_straight_boundary(domain: &DomainDescriptor, p: Point2, tol: f64) -> bool {
    let poly = domain.straight_polygon();
    convex_contains(&poly, p, tol) && domain.circle().is_none_or(|(c, r)| p.dist(c) <= r + tol)
}

impl ExactSolution for ReferenceSolution {
    fn value(&self, p: Point2) -> Result<f64> {
        let c = self.locate(p)?;
        Ok(self.linears[c].eval(p))
    }

    fn gradient(&self, p: Point2) -> Result<[f64; 2]> {
        let c = self.locate(p)?;
        Ok(self.linears[c].grad)
    }
}

/// Mesh parameters of a fine-mesh reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineMeshSpec {
    pub target_dofs: usize,
    pub mode: SeedMode,
    pub lloyd_iterations: usize,
    pub rng_seed: u64,
}

/// Solves `problem` on a fine Voronoi mesh with damped Newton. Non-convergence
/// is an error.
pub fn reference_solution(
    problem: &TestProblem,
    spec: &FineMeshSpec,
    config: &FixedPointConfig,
) -> Result<ReferenceSolution> {
    let mesh = generate_voronoi(
        &problem.domain,
        spec.target_dofs / 2,
        spec.mode,
        spec.lloyd_iterations,
        spec.rng_seed,
    )?;
    let disc = Discretization::new(Arc::new(mesh))?;
    let rep = newton_solve(&disc, problem.boundary_fn.as_ref(), config)?;
    if !rep.converged {
        return Err(Error::NotConverged(format!(
            "reference solve on {} dofs stopped after {} iterations with update {:e}",
            disc.dof_count(),
            rep.iterations,
            rep.final_update_norm
        )));
    }
    ReferenceSolution::from_solution(disc, rep.solution.values, problem.domain.clone(), rep.iterations)
}

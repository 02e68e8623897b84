//! Global assembly and the fixed-point iteration for the discrete
//! minimal surface problem.
//!
//! Each outer step freezes the per-cell coefficient `f_h^E(w)` at the
//! previous iterate and solves the resulting linear problem
//! `sum_E a_h^E(u, v) / f_h^E(w) = 0` for all `v` vanishing on the boundary,
//! with `u = phi` at boundary vertices.

mod linear;

use std::sync::Arc;

use rayon::prelude::*;

pub use linear::{pcg, CsrMatrix, LinearSolverKind, SpdSolver};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::PolygonalMesh;
use crate::vem::LocalElement;

/// A mesh with its local elements and the global sparsity pattern.
pub struct Discretization {
    mesh: Arc<PolygonalMesh>,
    elements: Vec<LocalElement>,
    template: CsrMatrix,
    /// `slots[offsets[c] + a * n + b]` is the storage slot of local entry (a, b) of cell c.
    slots: Vec<usize>,
    offsets: Vec<usize>,
}

impl Discretization {
    pub fn new(mesh: Arc<PolygonalMesh>) -> Result<Self> {
        let elements = (0..mesh.cell_count())
            .into_par_iter()
            .map(|c| {
                LocalElement::new(&mesh.cell_points(c))
                    .map_err(|e| Error::Assembly(format!("cell {c}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;

        let nv = mesh.dof_count();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for cell in mesh.cells() {
            for &a in &cell.vertex_ids {
                rows[a].extend_from_slice(&cell.vertex_ids);
            }
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        let template = CsrMatrix::from_pattern(&rows);
        let mut offsets = Vec::with_capacity(mesh.cell_count() + 1);
        let mut slots = Vec::new();
        offsets.push(0);
        for cell in mesh.cells() {
            for &a in &cell.vertex_ids {
                for &b in &cell.vertex_ids {
                    slots.push(template.slot(a, b).expect("pattern covers the cell clique"));
                }
            }
            offsets.push(slots.len());
        }
        Ok(Self {
            mesh,
            elements,
            template,
            slots,
            offsets,
        })
    }

    pub fn mesh(&self) -> &PolygonalMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<PolygonalMesh> {
        &self.mesh
    }

    pub fn elements(&self) -> &[LocalElement] {
        &self.elements
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.dof_count()
    }

    /// Restriction of a global dof vector to cell `c`.
    pub fn local_values(&self, c: usize, u: &[f64]) -> Vec<f64> {
        self.mesh.cells()[c].vertex_ids.iter().map(|&v| u[v]).collect()
    }

    /// `f_h^E(w)` for every cell.
    pub fn cell_coefficients(&self, w: &[f64]) -> Vec<f64> {
        (0..self.elements.len())
            .into_par_iter()
            .map(|c| self.elements[c].f_h(&self.local_values(c, w)))
            .collect()
    }

    /// Discrete area functional `J_h(v) = sum_E |E| f_h^E(v)`.
    pub fn area_functional(&self, v: &[f64]) -> f64 {
        let f = self.cell_coefficients(v);
        area_from_coefficients(&self.elements, &f)
    }

    /// Global matrix `sum_E K_E / f_h^E(w)` before boundary elimination.
    pub fn assemble_linearized(&self, w: &[f64]) -> Result<CsrMatrix> {
        if w.len() != self.dof_count() {
            return Err(Error::Assembly(format!(
                "state has {} entries, mesh has {} vertices",
                w.len(),
                self.dof_count()
            )));
        }
        let f = self.cell_coefficients(w);
        Ok(self.assemble_with_coefficients(&f))
    }

    fn assemble_with_coefficients(&self, f: &[f64]) -> CsrMatrix {
        let mut m = self.template.clone();
        // serial scatter in cell order keeps the sums bitwise reproducible
        for (c, el) in self.elements.iter().enumerate() {
            let k = el.stiffness();
            let n = el.n_vertices();
            let w = 1.0 / f[c];
            let slots = &self.slots[self.offsets[c]..self.offsets[c + 1]];
            for a in 0..n {
                for b in 0..n {
                    m.values[slots[a * n + b]] += w * k[(a, b)];
                }
            }
        }
        m
    }
}

impl Discretization {
    /// Gradient `sum_E K_E v / f_E` and Hessian
    /// `sum_E (K_E - (K_E v)(K_E v)^T / (|E| f_E^2)) / f_E` of `J_h` at `v`.
    fn gradient_and_hessian(&self, v: &[f64]) -> (Vec<f64>, CsrMatrix) {
        let mut grad = vec![0.0; self.dof_count()];
        let mut hess = self.template.clone();
        let local: Vec<(Vec<f64>, f64)> = (0..self.elements.len())
            .into_par_iter()
            .map(|c| {
                let el = &self.elements[c];
                let x = self.local_values(c, v);
                let f = el.f_h(&x);
                let k = el.stiffness();
                let kv: Vec<f64> = (0..x.len())
                    .map(|a| (0..x.len()).map(|b| k[(a, b)] * x[b]).sum())
                    .collect();
                (kv, f)
            })
            .collect();
        for (c, (el, (kv, f))) in self.elements.iter().zip(&local).enumerate() {
            let k = el.stiffness();
            let n = el.n_vertices();
            let ids = &self.mesh.cells()[c].vertex_ids;
            let slots = &self.slots[self.offsets[c]..self.offsets[c + 1]];
            let s = 1.0 / (el.area() * f * f);
            for a in 0..n {
                grad[ids[a]] += kv[a] / f;
                for b in 0..n {
                    hess.values[slots[a * n + b]] += (k[(a, b)] - s * kv[a] * kv[b]) / f;
                }
            }
        }
        (grad, hess)
    }
}

fn area_from_coefficients(elements: &[LocalElement], f: &[f64]) -> f64 {
    elements.iter().zip(f).map(|(e, f)| e.area() * f).sum()
}

/// Elimination of the Dirichlet dofs: maps the full pattern to the
/// interior-interior block and moves boundary columns to the right-hand side.
struct DirichletReduction {
    /// Reduced index of each vertex, `usize::MAX` on the boundary.
    reduced_index: Vec<usize>,
    interior: Vec<usize>,
    matrix: CsrMatrix,
    /// Reduced slot for each full slot, `usize::MAX` for boundary columns.
    slot_map: Vec<usize>,
}

impl DirichletReduction {
    fn new(full: &CsrMatrix, boundary: &[bool]) -> Self {
        let mut reduced_index = vec![usize::MAX; boundary.len()];
        let mut interior = Vec::new();
        for (v, &b) in boundary.iter().enumerate() {
            if !b {
                reduced_index[v] = interior.len();
                interior.push(v);
            }
        }
        let rows: Vec<Vec<usize>> = interior
            .iter()
            .map(|&v| {
                full.row(v)
                    .0
                    .iter()
                    .filter(|&&j| !boundary[j])
                    .map(|&j| reduced_index[j])
                    .collect()
            })
            .collect();
        let matrix = CsrMatrix::from_pattern(&rows);
        let mut slot_map = vec![usize::MAX; full.nnz()];
        for (ri, &v) in interior.iter().enumerate() {
            let start = full.row_ptr[v];
            for (k, &j) in full.row(v).0.iter().enumerate() {
                if !boundary[j] {
                    slot_map[start + k] = matrix.slot(ri, reduced_index[j]).unwrap();
                }
            }
        }
        Self {
            reduced_index,
            interior,
            matrix,
            slot_map,
        }
    }

    /// Fills the reduced matrix and returns `-A_IB u_B`.
    fn reduce(&mut self, full: &CsrMatrix, u: &[f64]) -> Vec<f64> {
        self.matrix.values.iter_mut().for_each(|v| *v = 0.0);
        let mut rhs = vec![0.0; self.interior.len()];
        for (ri, &v) in self.interior.iter().enumerate() {
            let start = full.row_ptr[v];
            let (cols, vals) = full.row(v);
            for (k, (&j, &a)) in cols.iter().zip(vals).enumerate() {
                match self.slot_map[start + k] {
                    usize::MAX => rhs[ri] -= a * u[j],
                    s => self.matrix.values[s] = a,
                }
            }
        }
        rhs
    }
}

/// Vertex values of a discrete function bound to its mesh.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub mesh: Arc<PolygonalMesh>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    /// Threshold on `|u^{k+1} - u^k|_inf / |u^k|_inf`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub linear_solver: LinearSolverKind,
    /// Relative residual target of the CG solver.
    pub cg_tolerance: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 200,
            linear_solver: LinearSolverKind::Direct,
            cg_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DiscreteSolution,
    /// Number of linear solves performed.
    pub iterations: usize,
    pub converged: bool,
    pub final_update_norm: f64,
    /// Relative update after each linear solve.
    pub per_iteration_updates: Vec<f64>,
    /// `J_h` of each iterate.
    pub energies: Vec<f64>,
}

/// Picard iteration for the discrete minimal surface problem.
///
/// The first linearization uses the zero state, where every coefficient is 1,
/// so the first iterate is the discrete harmonic extension of the boundary
/// data. The update of that first solve is measured in absolute terms.
pub fn fixed_point_solve(
    disc: &Discretization,
    boundary_fn: &(dyn Fn(Point2) -> f64 + Sync),
    config: &FixedPointConfig,
) -> Result<SolveReport> {
    if !(config.tolerance > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", config.tolerance)));
    }
    let mesh = disc.mesh();
    let n = disc.dof_count();
    let mut lift = vec![0.0; n];
    for v in 0..n {
        if mesh.is_boundary(v) {
            let x = boundary_fn(mesh.vertices()[v]);
            if !x.is_finite() {
                return Err(Error::Config(format!("boundary data is not finite at vertex {v}")));
            }
            lift[v] = x;
        }
    }

    let mut reduction = DirichletReduction::new(&disc.template, mesh.boundary_flags());
    let mut solver = SpdSolver::new(config.linear_solver, config.cg_tolerance);
    let mut prev = vec![0.0; n];
    let mut coeff = vec![1.0; disc.elements.len()];
    let mut updates = Vec::new();
    let mut energies = Vec::new();
    let mut x = vec![0.0; reduction.interior.len()];

    for k in 1..=config.max_iterations {
        let full = disc.assemble_with_coefficients(&coeff);
        let rhs = reduction.reduce(&full, &lift);
        solver.solve(&reduction.matrix, &rhs, &mut x)?;

        let mut next = lift.clone();
        for (ri, &v) in reduction.interior.iter().enumerate() {
            next[v] = x[ri];
        }
        let diff = next.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = prev.iter().map(|a| a.abs()).fold(0.0, f64::max);
        let update = if scale > 0.0 { diff / scale } else { diff };
        updates.push(update);

        coeff = disc.cell_coefficients(&next);
        energies.push(area_from_coefficients(&disc.elements, &coeff));
        prev = next;

        if update < config.tolerance {
            return Ok(report(disc, prev, k, true, updates, energies));
        }
    }
    Ok(report(disc, prev, config.max_iterations, false, updates, energies))
}

/// Minimizes `J_h` by damped Newton, starting from the harmonic lift.
///
/// Converges to the same discrete solution as [`fixed_point_solve`] in far
/// fewer linear solves; used where only the solution matters, such as
/// fine-mesh references. `energies` and `per_iteration_updates` record the
/// Newton steps.
pub fn newton_solve(
    disc: &Discretization,
    boundary_fn: &(dyn Fn(Point2) -> f64 + Sync),
    config: &FixedPointConfig,
) -> Result<SolveReport> {
    let first = fixed_point_solve(
        disc,
        boundary_fn,
        &FixedPointConfig {
            max_iterations: 1,
            ..*config
        },
    )?;
    let mesh = disc.mesh();
    let mut u = first.solution.values;
    let mut energy = disc.area_functional(&u);
    let mut updates = first.per_iteration_updates;
    let mut energies = vec![energy];
    if first.converged {
        return Ok(report(disc, u, 1, true, updates, energies));
    }
    let mut reduction = DirichletReduction::new(&disc.template, mesh.boundary_flags());
    let mut solver = SpdSolver::new(config.linear_solver, config.cg_tolerance);
    let zero = vec![0.0; u.len()];
    let mut step = vec![0.0; reduction.interior.len()];

    for k in 2..=config.max_iterations {
        let (grad, hess) = disc.gradient_and_hessian(&u);
        reduction.reduce(&hess, &zero);
        let rhs: Vec<f64> = reduction.interior.iter().map(|&v| -grad[v]).collect();
        step.iter_mut().for_each(|x| *x = 0.0);
        solver.solve(&reduction.matrix, &rhs, &mut step)?;
        // directional derivative g . d, negative for a descent direction
        let slope: f64 = -rhs.iter().zip(&step).map(|(g, d)| g * d).sum::<f64>();

        let mut t = 1.0;
        let mut trial = u.clone();
        let accepted = loop {
            for (ri, &v) in reduction.interior.iter().enumerate() {
                trial[v] = u[v] + t * step[ri];
            }
            let e = disc.area_functional(&trial);
            if e <= energy + 1e-4 * t * slope || t < 1e-10 {
                break e;
            }
            t *= 0.5;
        };
        let diff = step.iter().map(|d| (t * d).abs()).fold(0.0, f64::max);
        let scale = u.iter().map(|a| a.abs()).fold(0.0, f64::max);
        let update = if scale > 0.0 { diff / scale } else { diff };
        u = trial;
        energy = accepted;
        updates.push(update);
        energies.push(energy);
        if update < config.tolerance {
            return Ok(report(disc, u, k, true, updates, energies));
        }
    }
    Ok(report(disc, u, config.max_iterations, false, updates, energies))
}

fn report(
    disc: &Discretization,
    values: Vec<f64>,
    iterations: usize,
    converged: bool,
    updates: Vec<f64>,
    energies: Vec<f64>,
) -> SolveReport {
    SolveReport {
        solution: DiscreteSolution {
            mesh: disc.mesh.clone(),
            values,
        },
        iterations,
        converged,
        final_update_norm: updates.last().copied().unwrap_or(f64::NAN),
        per_iteration_updates: updates,
        energies,
    }
}

impl Discretization {
    /// Interior residual `sum_E a_h^E(u, v_i) / f_h^E(w)` for each interior vertex `i`.
    pub fn interior_residual(&self, w: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let a = self.assemble_linearized(w)?;
        let r = a.mul_vec(u);
        Ok((0..self.dof_count())
            .filter(|&v| !self.mesh.is_boundary(v))
            .map(|v| r[v])
            .collect())
    }

    /// Reduced index of every vertex (`None` on the boundary).
    pub fn interior_numbering(&self) -> Vec<Option<usize>> {
        DirichletReduction::new(&self.template, self.mesh.boundary_flags())
            .reduced_index
            .into_iter()
            .map(|i| (i != usize::MAX).then_some(i))
            .collect()
    }
}

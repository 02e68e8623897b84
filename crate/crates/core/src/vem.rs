//! Lowest-order virtual element on a single polygon.
//!
//! Degrees of freedom are the vertex values. The elliptic projector onto
//! linear polynomials only needs boundary data: for `q` linear,
//! `int_E grad v . grad q = sum_e int_e v (grad q . n)`, and the trace of `v`
//! is linear on every edge, so the trapezoid rule is exact. The constant
//! mode is fixed by matching vertex averages. The stabilization is the plain
//! Euclidean product of the dof vectors of `(I - Pi) v`.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{Error, Result};
use crate::geometry::{cell_geometry, Point2};

/// `{1, (x - xE)/hE, (y - yE)/hE}` on a cell with centroid `xE` and diameter `hE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomialBasis {
    pub centroid: Point2,
    pub diameter: f64,
}

impl ScaledMonomialBasis {
    pub fn eval(&self, p: Point2) -> [f64; 3] {
        [
            1.0,
            (p.x - self.centroid.x) / self.diameter,
            (p.y - self.centroid.y) / self.diameter,
        ]
    }

    pub fn gradients(&self) -> [[f64; 2]; 3] {
        let s = 1.0 / self.diameter;
        [[0.0, 0.0], [s, 0.0], [0.0, s]]
    }

    /// Value at `p` of the polynomial with monomial coefficients `c`.
    pub fn eval_poly(&self, c: &[f64; 3], p: Point2) -> f64 {
        let m = self.eval(p);
        c[0] * m[0] + c[1] * m[1] + c[2] * m[2]
    }
}

/// Per-cell matrices of the lowest-order VEM Laplacian.
#[derive(Debug, Clone)]
pub struct LocalElement {
    coords: Vec<Point2>,
    basis: ScaledMonomialBasis,
    area: f64,
    /// 3 x n coefficients of the projector in the monomial basis.
    pi_star: DMatrix<f64>,
    /// n x n local stiffness.
    stiffness: DMatrix<f64>,
}

impl LocalElement {
    pub fn new(coords: &[Point2]) -> Result<Self> {
        let g = cell_geometry(coords)?;
        let n = coords.len();
        let basis = ScaledMonomialBasis {
            centroid: g.centroid,
            diameter: g.diameter,
        };
        let d = dof_matrix(coords, &basis);
        let b = rhs_matrix(coords, &basis);
        let gram: Matrix3<f64> = {
            let bd = &b * &d;
            Matrix3::from_fn(|i, j| bd[(i, j)])
        };
        // G = diag(1, |E|/h^2, |E|/h^2) up to the first row; a tiny determinant
        // relative to that scale means the polygon is (nearly) collinear
        let scale = g.area / (g.diameter * g.diameter);
        if !(gram.determinant().abs() > 1e-12 * scale * scale) {
            return Err(Error::DegeneratePolygon(format!(
                "singular projector system on a {n}-gon of area {:e}",
                g.area
            )));
        }
        let ginv = gram
            .try_inverse()
            .ok_or_else(|| Error::DegeneratePolygon("singular projector system".into()))?;
        let ginv = DMatrix::from_fn(3, 3, |i, j| ginv[(i, j)]);
        let pi_star = ginv * b;
        let mut el = Self {
            coords: coords.to_vec(),
            basis,
            area: g.area,
            pi_star,
            stiffness: DMatrix::zeros(n, n),
        };
        el.stiffness = el.consistency() + el.stabilization();
        Ok(el)
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Point2] {
        &self.coords
    }

    pub fn basis(&self) -> &ScaledMonomialBasis {
        &self.basis
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Point2 {
        self.basis.centroid
    }

    pub fn diameter(&self) -> f64 {
        self.basis.diameter
    }

    /// D: `D[i][a] = m_a(V_i)`.
    pub fn dof_matrix(&self) -> DMatrix<f64> {
        dof_matrix(&self.coords, &self.basis)
    }

    /// B: projector right-hand sides, first row fixes the constant.
    pub fn rhs_matrix(&self) -> DMatrix<f64> {
        rhs_matrix(&self.coords, &self.basis)
    }

    /// G = B D.
    pub fn gram(&self) -> DMatrix<f64> {
        self.rhs_matrix() * self.dof_matrix()
    }

    /// Pi*: the projector in monomial coefficients, G^-1 B.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.pi_star
    }

    /// Pi = D Pi*: the projector acting on dof vectors.
    pub fn projector_dofs(&self) -> DMatrix<f64> {
        self.dof_matrix() * &self.pi_star
    }

    /// S = (I - Pi)^T (I - Pi).
    pub fn stabilization(&self) -> DMatrix<f64> {
        let n = self.n_vertices();
        let r = DMatrix::identity(n, n) - self.projector_dofs();
        r.transpose() * r
    }

    /// Pi*^T (int grad m . grad m) Pi*.
    pub fn consistency(&self) -> DMatrix<f64> {
        let mut gt = DMatrix::zeros(3, 3);
        let s = self.area / (self.basis.diameter * self.basis.diameter);
        gt[(1, 1)] = s;
        gt[(2, 2)] = s;
        self.pi_star.transpose() * gt * &self.pi_star
    }

    /// K = consistency + stabilization.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Monomial coefficients of the projection of `v`.
    pub fn projected_linear(&self, v: &[f64]) -> [f64; 3] {
        debug_assert_eq!(v.len(), self.n_vertices());
        let mut c = [0.0; 3];
        for (a, ca) in c.iter_mut().enumerate() {
            *ca = self.pi_star.row(a).iter().zip(v).map(|(p, x)| p * x).sum();
        }
        c
    }

    /// Constant gradient of the projection of `v`.
    pub fn projected_gradient(&self, v: &[f64]) -> [f64; 2] {
        let c = self.projected_linear(v);
        [c[1] / self.basis.diameter, c[2] / self.basis.diameter]
    }

    /// S((I - Pi) v, (I - Pi) v).
    pub fn stab_energy(&self, v: &[f64]) -> f64 {
        let c = self.projected_linear(v);
        self.coords
            .iter()
            .zip(v)
            .map(|(&p, &x)| {
                let r = x - self.basis.eval_poly(&c, p);
                r * r
            })
            .sum()
    }

    /// `sqrt(1 + |grad Pi v|^2 + S((I - Pi) v, (I - Pi) v) / |E|)`, always >= 1.
    pub fn f_h(&self, v: &[f64]) -> f64 {
        let g = self.projected_gradient(v);
        (1.0 + g[0] * g[0] + g[1] * g[1] + self.stab_energy(v) / self.area).sqrt()
    }

    /// v^T K v.
    pub fn energy(&self, v: &[f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        x.dot(&(&self.stiffness * &x))
    }
}

fn dof_matrix(coords: &[Point2], basis: &ScaledMonomialBasis) -> DMatrix<f64> {
    DMatrix::from_fn(coords.len(), 3, |i, a| basis.eval(coords[i])[a])
}

fn rhs_matrix(coords: &[Point2], basis: &ScaledMonomialBasis) -> DMatrix<f64> {
    let n = coords.len();
    let mut b = DMatrix::zeros(3, n);
    let inv_h = 1.0 / basis.diameter;
    for i in 0..n {
        let prev = coords[(i + n - 1) % n];
        let next = coords[(i + 1) % n];
        b[(0, i)] = 1.0 / n as f64;
        // half of |e| n over the two edges touching V_i
        b[(1, i)] = 0.5 * inv_h * (next.y - prev.y);
        b[(2, i)] = 0.5 * inv_h * (prev.x - next.x);
    }
    b
}

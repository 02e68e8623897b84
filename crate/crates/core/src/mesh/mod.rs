//! Polygonal meshes: data model, Voronoi generation, quality audit and file I/O.

mod domain;
mod io;
mod voronoi;

use std::collections::HashMap;

pub use domain::DomainDescriptor;
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use voronoi::{generate_voronoi, voronoi_mesh_from_seeds, SeedMode};

use crate::error::{Error, Result};
use crate::geometry::{cell_geometry, point_segment_distance, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertex_ids: Vec<usize>,
    pub area: f64,
    pub centroid: Point2,
    pub diameter: f64,
}

/// Conforming polygonal mesh. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point2>,
    cells: Vec<Cell>,
    boundary: Vec<bool>,
    mesh_size: f64,
}

impl PolygonalMesh {
    /// Builds a mesh from vertex coordinates and CCW cell connectivity.
    ///
    /// When `boundary` is `None` the boundary vertices are the endpoints of
    /// edges that belong to exactly one cell.
    pub fn new(
        vertices: Vec<Point2>,
        cell_vertex_ids: Vec<Vec<usize>>,
        boundary: Option<Vec<bool>>,
    ) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
        }
        let mut cells = Vec::with_capacity(cell_vertex_ids.len());
        for (c, ids) in cell_vertex_ids.into_iter().enumerate() {
            if let Some(&bad) = ids.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} references vertex {bad} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
            let pts: Vec<Point2> = ids.iter().map(|&v| vertices[v]).collect();
            let g = cell_geometry(&pts).map_err(|e| Error::InvalidMesh(format!("cell {c}: {e}")))?;
            cells.push(Cell {
                vertex_ids: ids,
                area: g.area,
                centroid: g.centroid,
                diameter: g.diameter,
            });
        }
        let boundary = match boundary {
            Some(b) => {
                if b.len() != vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "{} boundary flags for {} vertices",
                        b.len(),
                        vertices.len()
                    )));
                }
                b
            }
            None => boundary_from_edges(vertices.len(), &cells),
        };
        let mesh_size = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            cells,
            boundary,
            mesh_size,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// h = max over cells of the cell diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Number of degrees of freedom N, one per vertex.
    pub fn dof_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point2> {
        self.cells[c].vertex_ids.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Undirected edges with the number of cells using each of them.
    pub fn edge_multiplicities(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for c in &self.cells {
            let n = c.vertex_ids.len();
            for i in 0..n {
                let (a, b) = (c.vertex_ids[i], c.vertex_ids[(i + 1) % n]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    /// Checks conformity: every edge is used once (boundary, both endpoints
    /// flagged) or twice in opposite directions (interior).
    pub fn check_edges(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (ci, c) in self.cells.iter().enumerate() {
            let n = c.vertex_ids.len();
            for i in 0..n {
                let (a, b) = (c.vertex_ids[i], c.vertex_ids[(i + 1) % n]);
                if a == b {
                    return Err(Error::InvalidMesh(format!("cell {ci} repeats vertex {a}")));
                }
                if directed.insert((a, b), ci).is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "directed edge ({a}, {b}) appears in two cells"
                    )));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) && !(self.boundary[a] && self.boundary[b]) {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) has one cell but an interior endpoint"
                )));
            }
        }
        Ok(())
    }

    pub fn quality_report(&self) -> MeshQualityReport {
        let mut min_edge: f64 = 1.0;
        let mut min_inradius: f64 = 1.0;
        for (c, cell) in self.cells.iter().enumerate() {
            let pts = self.cell_points(c);
            let n = pts.len();
            let mut shortest = f64::INFINITY;
            let mut inr = f64::INFINITY;
            for i in 0..n {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                shortest = shortest.min(a.dist(b));
                inr = inr.min(point_segment_distance(cell.centroid, a, b));
            }
            min_edge = min_edge.min(shortest / cell.diameter);
            min_inradius = min_inradius.min(inr / cell.diameter);
        }
        MeshQualityReport {
            min_edge_over_diameter: min_edge,
            min_inradius_over_diameter: min_inradius,
            cell_count: self.cells.len(),
            vertex_count: self.vertices.len(),
        }
    }
}

fn boundary_from_edges(nv: usize, cells: &[Cell]) -> Vec<bool> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for c in cells {
        let n = c.vertex_ids.len();
        for i in 0..n {
            let (a, b) = (c.vertex_ids[i], c.vertex_ids[(i + 1) % n]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut flags = vec![false; nv];
    for (&(a, b), &k) in &count {
        if k == 1 {
            flags[a] = true;
            flags[b] = true;
        }
    }
    flags
}

/// Shape-regularity proxies: shortest edge and centroid inradius, both
/// relative to the cell diameter, minimized over the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQualityReport {
    pub min_edge_over_diameter: f64,
    pub min_inradius_over_diameter: f64,
    pub cell_count: usize,
    pub vertex_count: usize,
}

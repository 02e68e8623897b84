//! Clipped Voronoi meshes.
//!
//! Each cell is computed independently by clipping the domain polygon with
//! the bisectors of nearby seeds, visited ring by ring on a bucket grid until
//! no farther seed can reach the cell. Curved domains are handled by a final
//! clip against the circle in which every arc is replaced by its chord.
//! Cell vertices are then merged into a conforming mesh by coordinate.

use std::collections::HashMap;

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::domain::{clip_half_plane, DomainDescriptor};
use super::PolygonalMesh;
use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, signed_area, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// Jittered hexagonal lattice relaxed by Lloyd iterations.
    Uniform,
    /// Independent uniformly distributed seeds, no relaxation.
    Random,
}

impl std::str::FromStr for SeedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SeedMode::Uniform),
            "random" => Ok(SeedMode::Random),
            other => Err(Error::Config(format!("unknown mesh mode `{other}` (expected uniform|random)"))),
        }
    }
}

/// Relative sliver threshold: cells below this fraction of the domain area are removed.
const SLIVER_FRACTION: f64 = 1e-14;
/// Relative vertex merge distance.
const MERGE_FRACTION: f64 = 1e-10;
/// Lloyd stops early once no seed moves more than this fraction of h.
const LLOYD_STALL: f64 = 1e-8;

/// Generates a clipped Voronoi mesh of `domain`. Deterministic in all arguments.
pub fn generate_voronoi(
    domain: &DomainDescriptor,
    target_seeds: usize,
    mode: SeedMode,
    lloyd_iterations: usize,
    rng_seed: u64,
) -> Result<PolygonalMesh> {
    if target_seeds < 4 {
        return Err(Error::MeshGeneration(format!(
            "at least 4 seeds are required, got {target_seeds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds = match mode {
        SeedMode::Uniform => {
            if lloyd_iterations == 0 {
                return Err(Error::MeshGeneration(
                    "uniform meshes need at least one Lloyd iteration".into(),
                ));
            }
            jittered_lattice(domain, target_seeds, &mut rng)
        }
        SeedMode::Random => (0..target_seeds).map(|_| domain.sample(&mut rng)).collect(),
    };
    if mode == SeedMode::Uniform {
        for _ in 0..lloyd_iterations {
            let cells = clipped_cells(domain, &seeds);
            let mut next = Vec::with_capacity(seeds.len());
            let mut moved: f64 = 0.0;
            let mut h: f64 = 0.0;
            for (s, cell) in seeds.iter().zip(&cells) {
                if cell.len() < 3 || signed_area(cell) <= 0.0 {
                    continue;
                }
                let c = polygon_centroid(cell);
                moved = moved.max(c.dist(*s));
                h = h.max(crate::geometry::diameter(cell));
                next.push(c);
            }
            let dropped = next.len() != seeds.len();
            seeds = next;
            if !dropped && moved < LLOYD_STALL * h {
                break;
            }
        }
    }
    voronoi_mesh_from_seeds(domain, &seeds)
}

/// Voronoi diagram of `seeds` clipped to `domain`, assembled into a conforming mesh.
/// Seeds whose clipped cells degenerate are discarded and the diagram recomputed.
pub fn voronoi_mesh_from_seeds(domain: &DomainDescriptor, seeds: &[Point2]) -> Result<PolygonalMesh> {
    let mut seeds: Vec<Point2> = dedup_seeds(seeds);
    let area_floor = SLIVER_FRACTION * domain.area();
    let merge_tol = MERGE_FRACTION * domain.length_scale();
    for _round in 0..8 {
        if seeds.len() < 2 {
            return Err(Error::MeshGeneration("fewer than two usable seeds".into()));
        }
        let cells = clipped_cells(domain, &seeds);
        let (vertices, ids) = merge_vertices(&cells, merge_tol);
        let bad: Vec<usize> = ids
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.len() < 3 || signed_area(&c.iter().map(|&v| vertices[v]).collect::<Vec<_>>()) < area_floor
            })
            .map(|(i, _)| i)
            .collect();
        if bad.is_empty() {
            return PolygonalMesh::new(vertices, ids, None);
        }
        let mut keep = vec![true; seeds.len()];
        for i in bad {
            keep[i] = false;
        }
        seeds = seeds
            .into_iter()
            .zip(keep)
            .filter_map(|(s, k)| k.then_some(s))
            .collect();
    }
    Err(Error::MeshGeneration(
        "degenerate Voronoi cells persist after removing their seeds".into(),
    ))
}

fn dedup_seeds(seeds: &[Point2]) -> Vec<Point2> {
    let mut seen = std::collections::HashSet::new();
    seeds
        .iter()
        .copied()
        .filter(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
        .collect()
}

fn jittered_lattice<R: Rng>(domain: &DomainDescriptor, target: usize, rng: &mut R) -> Vec<Point2> {
    let (lo, hi) = domain.bounding_box();
    // hexagonal lattice: one seed per sqrt(3)/2 s^2
    let s = (2.0 * domain.area() / (3f64.sqrt() * target as f64)).sqrt();
    let dy = 0.5 * 3f64.sqrt() * s;
    let jitter = 0.1 * s;
    let mut out = Vec::with_capacity(target + target / 8);
    let mut j = 0usize;
    loop {
        let y = lo.y + (j as f64 + 0.5) * dy;
        if y >= hi.y {
            break;
        }
        let shift = if j.is_multiple_of(2) { 0.25 } else { 0.75 };
        let mut i = 0usize;
        loop {
            let x = lo.x + (i as f64 + shift) * s;
            if x >= hi.x {
                break;
            }
            let p = Point2::new(
                x + rng.random_range(-jitter..jitter),
                y + rng.random_range(-jitter..jitter),
            );
            if domain.contains(p) {
                out.push(p);
            }
            i += 1;
        }
        j += 1;
    }
    out
}

/// Bucket grid over the seeds, stored CSR-style.
struct SeedGrid {
    origin: Point2,
    size: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<u32>,
}

impl SeedGrid {
    fn new(seeds: &[Point2], lo: Point2, hi: Point2) -> Self {
        let area = ((hi.x - lo.x) * (hi.y - lo.y)).max(f64::MIN_POSITIVE);
        // about two seeds per bucket
        let size = (2.0 * area / seeds.len() as f64).sqrt();
        let nx = (((hi.x - lo.x) / size).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / size).ceil() as usize).max(1);
        let bucket = |p: Point2| -> usize {
            let bx = (((p.x - lo.x) / size) as usize).min(nx - 1);
            let by = (((p.y - lo.y) / size) as usize).min(ny - 1);
            by * nx + bx
        };
        let mut count = vec![0usize; nx * ny + 1];
        for p in seeds {
            count[bucket(*p) + 1] += 1;
        }
        for k in 0..nx * ny {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut items = vec![0u32; seeds.len()];
        for (i, p) in seeds.iter().enumerate() {
            let b = bucket(*p);
            items[fill[b]] = i as u32;
            fill[b] += 1;
        }
        Self {
            origin: lo,
            size,
            nx,
            ny,
            start: count,
            items,
        }
    }

    fn coords(&self, p: Point2) -> (i64, i64) {
        let bx = (((p.x - self.origin.x) / self.size).floor() as i64).clamp(0, self.nx as i64 - 1);
        let by = (((p.y - self.origin.y) / self.size).floor() as i64).clamp(0, self.ny as i64 - 1);
        (bx, by)
    }

    fn bucket(&self, bx: i64, by: i64) -> &[u32] {
        if bx < 0 || by < 0 || bx >= self.nx as i64 || by >= self.ny as i64 {
            return &[];
        }
        let b = by as usize * self.nx + bx as usize;
        &self.items[self.start[b]..self.start[b + 1]]
    }
}

fn clipped_cells(domain: &DomainDescriptor, seeds: &[Point2]) -> Vec<Vec<Point2>> {
    let base = domain.straight_polygon();
    let (mut lo, mut hi) = (base[0], base[0]);
    for p in base.iter().chain(seeds) {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let grid = SeedGrid::new(seeds, lo, hi);
    let circle = domain.circle();
    (0..seeds.len())
        .into_par_iter()
        .map(|i| match circle {
            Some((c, r)) => {
                // a half-plane just outside the tangent nearest the seed keeps
                // boundary cells small during the ring search; it must not touch
                // the circle or it would add a chord vertex
                let d = seeds[i] - c;
                let len = d.norm();
                let start = if len > 0.0 {
                    let n = d * (1.0 / len);
                    clip_half_plane(&base, n, n.dot(c) + r + grid.size)
                } else {
                    base.clone()
                };
                clip_disk(&voronoi_cell(&start, seeds, &grid, i), c, r)
            }
            None => voronoi_cell(&base, seeds, &grid, i),
        })
        .collect()
}

fn voronoi_cell(base: &[Point2], seeds: &[Point2], grid: &SeedGrid, i: usize) -> Vec<Point2> {
    let p = seeds[i];
    let mut poly = base.to_vec();
    let (bx, by) = grid.coords(p);
    let max_ring = grid.nx.max(grid.ny) as i64;
    for ring in 0..=max_ring {
        for dy in -ring..=ring {
            for dx in -ring..=ring {
                if dx.abs().max(dy.abs()) != ring {
                    continue;
                }
                for &j in grid.bucket(bx + dx, by + dy) {
                    let j = j as usize;
                    if j == i {
                        continue;
                    }
                    let q = seeds[j];
                    let d = q - p;
                    let offset = d.dot((p + q) * 0.5);
                    if poly.iter().any(|v| d.dot(*v) > offset) {
                        poly = clip_half_plane(&poly, d, offset);
                        if poly.is_empty() {
                            return poly;
                        }
                    }
                }
            }
        }
        // seeds outside the visited rings are at least ring * size away; their
        // bisectors cannot cut a cell of radius below half that distance
        let radius = poly.iter().map(|v| v.dist(p)).fold(0.0, f64::max);
        if ring as f64 * grid.size >= 2.0 * radius {
            break;
        }
    }
    poly
}

/// Intersects a convex CCW polygon with a disk, replacing every boundary arc
/// by its chord. Points created on the circle are projected onto it exactly.
fn clip_disk(poly: &[Point2], c: Point2, r: f64) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    let on_circle = |p: Point2| {
        let d = p - c;
        c + d * (r / d.norm())
    };
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        if a.dist(c) <= r {
            out.push(a);
        }
        let e = b - a;
        let f = a - c;
        let qa = e.dot(e);
        if qa == 0.0 {
            continue;
        }
        let qb = 2.0 * f.dot(e);
        let qc = f.dot(f) - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        // numerically stable roots
        let q = -0.5 * (qb + qb.signum() * sq);
        let (mut t0, mut t1) = (q / qa, qc / q);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        for t in [t0, t1] {
            if t > 0.0 && t < 1.0 {
                out.push(on_circle(a + e * t));
            }
        }
    }
    out
}

/// Merges cell vertices closer than `tol` and returns global coordinates and
/// per-cell vertex ids with consecutive repeats removed.
fn merge_vertices(cells: &[Vec<Point2>], tol: f64) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let mut vertices: Vec<Point2> = Vec::new();
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut ids = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut local: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = buckets.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if vertices[v].dist(p) <= tol {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                let v = vertices.len() - 1;
                buckets.entry((kx, ky)).or_default().push(v);
                v
            });
            if local.last() != Some(&v) {
                local.push(v);
            }
        }
        while local.len() > 1 && local.first() == local.last() {
            local.pop();
        }
        ids.push(local);
    }
    (vertices, ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_symmetric_seeds_give_four_squares() {
        let d = DomainDescriptor::unit_square();
        let seeds = [
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.75, 0.75),
            Point2::new(0.25, 0.75),
        ];
        let m = voronoi_mesh_from_seeds(&d, &seeds).unwrap();
        assert_eq!(m.cell_count(), 4);
        for c in m.cells() {
            assert_eq!(c.vertex_ids.len(), 4);
            assert!((c.area - 0.25).abs() < 1e-15);
            assert!((c.diameter - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        }
        assert_eq!(m.dof_count(), 9);
        m.check_edges().unwrap();
        // only the center is interior
        assert_eq!(m.boundary_flags().iter().filter(|&&b| !b).count(), 1);
    }

    #[test]
    fn disk_clip_replaces_arcs_with_chords() {
        let sq = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let out = clip_disk(&sq, Point2::new(0.0, 0.0), 1.0);
        // quarter disk -> triangle (0,0), (1,0), (0,1)
        assert_eq!(out.len(), 3);
        assert!((signed_area(&out) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_visits_far_seeds_when_needed() {
        // two distant seeds: each cell is half the square
        let d = DomainDescriptor::unit_square();
        let seeds = [Point2::new(0.1, 0.5), Point2::new(0.9, 0.5)];
        let m = voronoi_mesh_from_seeds(&d, &seeds).unwrap();
        assert_eq!(m.cell_count(), 2);
        assert!((m.cells()[0].area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("uniform".parse::<SeedMode>().unwrap(), SeedMode::Uniform);
        assert_eq!("random".parse::<SeedMode>().unwrap(), SeedMode::Random);
        assert!("hex".parse::<SeedMode>().is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = DomainDescriptor::unit_square();
        assert!(generate_voronoi(&d, 3, SeedMode::Random, 0, 1).is_err());
        assert!(generate_voronoi(&d, 10, SeedMode::Uniform, 0, 1).is_err());
    }
}

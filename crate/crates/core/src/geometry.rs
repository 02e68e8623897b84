//! Planar primitives: points, polygon measures and polygon quadrature.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Shoelace signed area; positive for counter-clockwise ordering.
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for i in 0..n {
        twice += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * twice
}

/// Area centroid of a simple polygon with non-zero signed area.
pub fn polygon_centroid(pts: &[Point2]) -> Point2 {
    let n = pts.len();
    // shift to the first vertex to limit cancellation on small cells far from the origin
    let o = pts[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let c = p.cross(q);
        a += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
}

/// Largest pairwise vertex distance.
pub fn diameter(pts: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Point2,
    pub diameter: f64,
}

/// Area, centroid and diameter of a counter-clockwise polygon.
pub fn cell_geometry(pts: &[Point2]) -> Result<CellGeometry> {
    if pts.len() < 3 {
        return Err(Error::TooFewVertices(pts.len()));
    }
    let area = signed_area(pts);
    if !(area > 0.0) {
        return Err(Error::Orientation(area));
    }
    Ok(CellGeometry {
        area,
        centroid: polygon_centroid(pts),
        diameter: diameter(pts),
    })
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Inclusive point-in-convex-polygon test for a CCW polygon, with an
/// absolute slack `tol` on each edge.
pub fn convex_contains(pts: &[Point2], p: Point2, tol: f64) -> bool {
    let n = pts.len();
    (0..n).all(|i| {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        len == 0.0 || e.cross(p - a) >= -tol * len
    })
}

/// Distance from `p` to a polygon region (zero inside).
pub fn polygon_distance(pts: &[Point2], p: Point2) -> f64 {
    if convex_contains(pts, p, 0.0) {
        return 0.0;
    }
    let n = pts.len();
    (0..n)
        .map(|i| point_segment_distance(p, pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

// Symmetric 6-point rule on the reference triangle, exact for degree 4.
// Barycentric orbit (a, a, 1 - 2a) with weights relative to the triangle area.
#[allow(clippy::excessive_precision)]
const ORBITS: [(f64, f64); 2] = [
    (0.445_948_490_915_964_886, 0.223_381_589_678_011_466),
    (0.091_576_213_509_770_743, 0.109_951_743_655_321_868),
];

/// Quadrature nodes and weights of the degree-4 rule on triangle `(a, b, c)`.
pub fn triangle_quadrature(a: Point2, b: Point2, c: Point2) -> [(Point2, f64); 6] {
    let area = 0.5 * (b - a).cross(c - a);
    let mut out = [(Point2::default(), 0.0); 6];
    let mut k = 0;
    for &(s, w) in &ORBITS {
        let t = 1.0 - 2.0 * s;
        for (l0, l1, l2) in [(t, s, s), (s, t, s), (s, s, t)] {
            let p = Point2::new(
                l0 * a.x + l1 * b.x + l2 * c.x,
                l0 * a.y + l1 * b.y + l2 * c.y,
            );
            out[k] = (p, w * area);
            k += 1;
        }
    }
    out
}

/// Fan-triangulates the polygon from `apex` and yields the degree-4 nodes of
/// every sub-triangle. Valid when the polygon is star-shaped with respect to `apex`.
pub fn polygon_quadrature(pts: &[Point2], apex: Point2) -> impl Iterator<Item = (Point2, f64)> + '_ {
    let n = pts.len();
    (0..n).flat_map(move |i| triangle_quadrature(apex, pts[i], pts[(i + 1) % n]))
}

/// Integrates `f` over a polygon star-shaped with respect to `apex`.
pub fn integrate_polygon<F: FnMut(Point2) -> f64>(pts: &[Point2], apex: Point2, mut f: F) -> f64 {
    polygon_quadrature(pts, apex).map(|(p, w)| w * f(p)).sum()
}

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// A convex computational domain. Curved pieces of the boundary are exact
/// circles; meshes approximate them by chords.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainDescriptor {
    Rectangle {
        min: Point2,
        max: Point2,
    },
    Disk {
        center: Point2,
        radius: f64,
    },
    /// `{ p : |p - center| < radius and normal . p > offset }` with unit `normal`.
    DiskSector {
        center: Point2,
        radius: f64,
        normal: Point2,
        offset: f64,
    },
}

impl DomainDescriptor {
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let d = DomainDescriptor::Rectangle {
            min: Point2::new(x0, y0),
            max: Point2::new(x1, y1),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        DomainDescriptor::Rectangle {
            min: Point2::new(0.0, 0.0),
            max: Point2::new(1.0, 1.0),
        }
    }

    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        let d = DomainDescriptor::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    /// Disk cut by the half-plane `normal . p > offset`; `normal` is normalized here.
    pub fn disk_sector(center: Point2, radius: f64, normal: Point2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) {
            return Err(Error::InvalidDomain("chord normal must be non-zero".into()));
        }
        let d = DomainDescriptor::DiskSector {
            center,
            radius,
            normal: normal * (1.0 / len),
            offset: offset / len,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DomainDescriptor::Rectangle { min, max } => {
                if !(min.is_finite() && max.is_finite() && max.x > min.x && max.y > min.y) {
                    return Err(Error::InvalidDomain(format!(
                        "empty rectangle [{}, {}] x [{}, {}]",
                        min.x, max.x, min.y, max.y
                    )));
                }
            }
            DomainDescriptor::Disk { center, radius } => {
                if !(center.is_finite() && radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidDomain(format!("bad disk radius {radius}")));
                }
            }
            DomainDescriptor::DiskSector {
                center,
                radius,
                normal,
                offset,
            } => {
                if !(center.is_finite() && radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidDomain(format!("bad disk radius {radius}")));
                }
                let d = offset - normal.dot(center);
                if !(d.abs() < radius) || !offset.is_finite() {
                    return Err(Error::InvalidDomain(
                        "chord line does not cut the disk".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Exact area of the (possibly curved) domain.
    pub fn area(&self) -> f64 {
        match *self {
            DomainDescriptor::Rectangle { min, max } => (max.x - min.x) * (max.y - min.y),
            DomainDescriptor::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            DomainDescriptor::DiskSector {
                center,
                radius,
                normal,
                offset,
            } => {
                // signed distance of the chord from the center, measured along `normal`
                let d = offset - normal.dot(center);
                radius * radius * (d / radius).acos() - d * (radius * radius - d * d).sqrt()
            }
        }
    }

    pub fn is_curved(&self) -> bool {
        !matches!(self, DomainDescriptor::Rectangle { .. })
    }

    pub fn circle(&self) -> Option<(Point2, f64)> {
        match *self {
            DomainDescriptor::Rectangle { .. } => None,
            DomainDescriptor::Disk { center, radius } | DomainDescriptor::DiskSector { center, radius, .. } => {
                Some((center, radius))
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match *self {
            DomainDescriptor::Rectangle { min, max } => {
                p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y
            }
            DomainDescriptor::Disk { center, radius } => p.dist(center) < radius,
            DomainDescriptor::DiskSector {
                center,
                radius,
                normal,
                offset,
            } => p.dist(center) < radius && normal.dot(p) > offset,
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        match *self {
            DomainDescriptor::Rectangle { min, max } => (min, max),
            DomainDescriptor::Disk { center, radius } => (
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            ),
            DomainDescriptor::DiskSector { .. } => {
                let poly = self.straight_polygon();
                let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in poly {
                    lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                // the straight polygon is the disk box clipped by the chord; tighten to the disk
                let (c, r) = self.circle().unwrap();
                (
                    Point2::new(lo.x.max(c.x - r), lo.y.max(c.y - r)),
                    Point2::new(hi.x.min(c.x + r), hi.y.min(c.y + r)),
                )
            }
        }
    }

    pub fn length_scale(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.dist(hi)
    }

    /// Convex CCW polygon bounded by the straight constraints of the domain.
    /// For curved domains it encloses the disk with a margin, so only the
    /// straight sides of the result are true domain boundary.
    pub fn straight_polygon(&self) -> Vec<Point2> {
        match *self {
            DomainDescriptor::Rectangle { min, max } => vec![
                min,
                Point2::new(max.x, min.y),
                max,
                Point2::new(min.x, max.y),
            ],
            DomainDescriptor::Disk { center, radius } => box_around(center, 1.25 * radius),
            DomainDescriptor::DiskSector {
                center,
                radius,
                normal,
                offset,
            } => {
                let sq = box_around(center, 1.25 * radius);
                clip_half_plane(&sq, normal * -1.0, -offset)
            }
        }
    }

    /// Samples a point uniformly in the domain by rejection.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point2 {
        let (lo, hi) = self.bounding_box();
        loop {
            let p = Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if self.contains(p) {
                return p;
            }
        }
    }
}

fn box_around(c: Point2, half: f64) -> Vec<Point2> {
    vec![
        Point2::new(c.x - half, c.y - half),
        Point2::new(c.x + half, c.y - half),
        Point2::new(c.x + half, c.y + half),
        Point2::new(c.x - half, c.y + half),
    ]
}

/// Sutherland-Hodgman clip of a convex CCW polygon by `{ p : normal . p <= offset }`.
pub(crate) fn clip_half_plane(poly: &[Point2], normal: Point2, offset: f64) -> Vec<Point2> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = normal.dot(a) - offset;
        let db = normal.dot(b) - offset;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

//! Benchmark minimal surface problems.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::DomainDescriptor;

pub type ScalarField = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub struct TestProblem {
    pub name: String,
    pub domain: DomainDescriptor,
    pub boundary_fn: ScalarField,
    pub exact: Option<ScalarField>,
    pub exact_grad: Option<VectorField>,
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl TestProblem {
    fn analytic(
        name: &str,
        domain: DomainDescriptor,
        u: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Point2) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        let u: ScalarField = Arc::new(u);
        Self {
            name: name.to_string(),
            domain,
            boundary_fn: u.clone(),
            exact: Some(u),
            exact_grad: Some(Arc::new(grad)),
        }
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some() && self.exact_grad.is_some()
    }
}

/// `u = sqrt(cosh^2 y - x^2)` on `(0.25, 0.75)^2`.
pub fn concus() -> TestProblem {
    TestProblem::analytic(
        "concus",
        DomainDescriptor::rectangle(0.25, 0.25, 0.75, 0.75).unwrap(),
        |p| (p.y.cosh().powi(2) - p.x * p.x).sqrt(),
        |p| {
            let u = (p.y.cosh().powi(2) - p.x * p.x).sqrt();
            [-p.x / u, p.y.cosh() * p.y.sinh() / u]
        },
    )
}

const CATENOID_A: f64 = 0.75;
const CATENOID_B: f64 = 4.0;

/// Catenoid `u = a log((b + sqrt(b^2 - a^2)) / (r + sqrt(r^2 - a^2)))` on
/// `{|x| < 4, x > 1}` with `a = 0.75`, `b = 4`.
pub fn catenoid() -> TestProblem {
    let (a, b) = (CATENOID_A, CATENOID_B);
    let top = b + (b * b - a * a).sqrt();
    TestProblem::analytic(
        "catenoid",
        DomainDescriptor::disk_sector(Point2::new(0.0, 0.0), b, Point2::new(1.0, 0.0), 1.0).unwrap(),
        move |p| {
            let r = p.norm();
            a * (top / (r + (r * r - a * a).sqrt())).ln()
        },
        move |p| {
            // du/dr = -a / sqrt(r^2 - a^2)
            let r = p.norm();
            let s = -a / ((r * r - a * a).sqrt() * r);
            [s * p.x, s * p.y]
        },
    )
}

/// Scherk's fifth surface `u = asin(sinh x sinh y)` on `(-0.8, 0.8)^2`.
pub fn scherk() -> TestProblem {
    TestProblem::analytic(
        "scherk",
        DomainDescriptor::rectangle(-0.8, -0.8, 0.8, 0.8).unwrap(),
        |p| (p.x.sinh() * p.y.sinh()).asin(),
        |p| {
            let s = p.x.sinh() * p.y.sinh();
            let d = 1.0 / (1.0 - s * s).sqrt();
            [p.x.cosh() * p.y.sinh() * d, p.x.sinh() * p.y.cosh() * d]
        },
    )
}

/// Patch of the Schwarz D surface: `phi = 0` on `x = 0` and `y = 0`, `phi = x`
/// on `y = 1`, `phi = y` on `x = 1`. All four clauses are the trace of `x y`.
pub fn schwarz_patch() -> TestProblem {
    TestProblem {
        name: "schwarz".into(),
        domain: DomainDescriptor::unit_square(),
        boundary_fn: Arc::new(|p| p.x * p.y),
        exact: None,
        exact_grad: None,
    }
}

/// Unit disk with `phi = x^2`.
pub fn disk_x2() -> TestProblem {
    TestProblem {
        name: "disk".into(),
        domain: DomainDescriptor::disk(Point2::new(0.0, 0.0), 1.0).unwrap(),
        boundary_fn: Arc::new(|p| p.x * p.x),
        exact: None,
        exact_grad: None,
    }
}

/// `c_0(x) = x`; `c_{n+1}` is `c_n(3x)/2` on the left third, `1/2` on the
/// middle third and `1/2 + c_n(3x - 2)/2` on the right third.
pub fn cantor_iterate(n: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(x));
    }
    Ok(cantor_unchecked(n, x))
}

fn cantor_unchecked(n: u32, x: f64) -> f64 {
    if n == 0 {
        x
    } else if x < 1.0 / 3.0 {
        0.5 * cantor_unchecked(n - 1, 3.0 * x)
    } else if x <= 2.0 / 3.0 {
        0.5
    } else {
        0.5 + 0.5 * cantor_unchecked(n - 1, 3.0 * x - 2.0)
    }
}

/// How the Cantor iterate is laid out on the four sides of the unit square.
/// Both patterns are continuous at the corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CantorPattern {
    /// bottom `c(x)`, right `1 - c(y)`, top `1 - c(x)`, left `c(y)`: each
    /// side is the reflection of its neighbour.
    #[default]
    Mirror,
    /// bottom `c(x)`, left `c(y)`, top and right `1`.
    Diagonal,
}

impl std::str::FromStr for CantorPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(CantorPattern::Mirror),
            "diagonal" => Ok(CantorPattern::Diagonal),
            other => Err(Error::Config(format!(
                "unknown cantor pattern `{other}` (expected mirror|diagonal)"
            ))),
        }
    }
}

const CANTOR_LEVEL: u32 = 4;

/// Unit square with fourth-Cantor-iterate boundary data.
pub fn cantor_problem(pattern: CantorPattern) -> TestProblem {
    let side_value = move |p: Point2| -> f64 {
        let x = p.x.clamp(0.0, 1.0);
        let y = p.y.clamp(0.0, 1.0);
        let c = |t: f64| cantor_unchecked(CANTOR_LEVEL, t);
        // nearest side decides which clause applies
        let d = [y, 1.0 - x, 1.0 - y, x];
        let side = (0..4).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        match (pattern, side) {
            (CantorPattern::Mirror, 0) => c(x),
            (CantorPattern::Mirror, 1) => 1.0 - c(y),
            (CantorPattern::Mirror, 2) => 1.0 - c(x),
            (CantorPattern::Mirror, _) => c(y),
            (CantorPattern::Diagonal, 0) => c(x),
            (CantorPattern::Diagonal, 3) => c(y),
            (CantorPattern::Diagonal, _) => 1.0,
        }
    };
    TestProblem {
        name: "cantor".into(),
        domain: DomainDescriptor::unit_square(),
        boundary_fn: Arc::new(side_value),
        exact: None,
        exact_grad: None,
    }
}

/// Looks a problem up by its CLI name.
pub fn by_name(name: &str, pattern: CantorPattern) -> Result<TestProblem> {
    match name {
        "concus" => Ok(concus()),
        "catenoid" => Ok(catenoid()),
        "scherk" => Ok(scherk()),
        "schwarz" => Ok(schwarz_patch()),
        "disk" => Ok(disk_x2()),
        "cantor" => Ok(cantor_problem(pattern)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_values() {
        assert_eq!(cantor_iterate(4, 0.0).unwrap(), 0.0);
        assert_eq!(cantor_iterate(4, 1.0).unwrap(), 1.0);
        assert_eq!(cantor_iterate(4, 0.5).unwrap(), 0.5);
        // c4(1/9) = c3(1/3) / 2 = 1/4
        assert!((cantor_iterate(4, 1.0 / 9.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(cantor_iterate(4, 1.5), Err(Error::OutOfRange(_))));
        assert!(cantor_iterate(4, -0.1).is_err());
    }

    #[test]
    fn cantor_is_monotone() {
        for n in 0..=6 {
            let mut last = 0.0;
            for k in 0..=10_000 {
                let v = cantor_iterate(n, k as f64 / 10_000.0).unwrap();
                assert!(v >= last, "n={n} k={k}");
                last = v;
            }
        }
    }

    #[test]
    fn cantor_patterns_are_continuous_at_corners() {
        for pattern in [CantorPattern::Mirror, CantorPattern::Diagonal] {
            let p = cantor_problem(pattern);
            let phi = &p.boundary_fn;
            let eps = 1e-12;
            for (cx, cy) in [(0.0f64, 0.0f64), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
                let along_x = phi(Point2::new((cx - eps).abs(), cy));
                let along_y = phi(Point2::new(cx, (cy - eps).abs()));
                assert!((along_x - along_y).abs() < 1e-9, "{pattern:?} at ({cx},{cy})");
            }
        }
    }

    #[test]
    fn schwarz_corners() {
        let p = schwarz_patch();
        let phi = &p.boundary_fn;
        assert_eq!(phi(Point2::new(1.0, 1.0)), 1.0);
        for c in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            assert_eq!(phi(Point2::new(c.0, c.1)), 0.0);
        }
        assert_eq!(phi(Point2::new(0.3, 1.0)), 0.3);
        assert_eq!(phi(Point2::new(1.0, 0.7)), 0.7);
    }

    #[test]
    fn catenoid_vanishes_on_outer_arc() {
        let p = catenoid();
        let u = p.exact.as_ref().unwrap();
        for t in [0.0, 0.3, -0.9] {
            let q = Point2::new(4.0 * f64::cos(t), 4.0 * f64::sin(t));
            assert!(u(q).abs() < 1e-15);
        }
    }

    #[test]
    fn scherk_symmetries() {
        let p = scherk();
        let u = p.exact.as_ref().unwrap();
        assert_eq!(u(Point2::new(0.4, 0.0)), 0.0);
        assert_eq!(u(Point2::new(0.0, -0.7)), 0.0);
        for (x, y) in [(0.3, 0.5), (0.79, -0.2), (-0.6, 0.8)] {
            assert!((u(Point2::new(-x, y)) + u(Point2::new(x, y))).abs() < 1e-15);
        }
        let s = 0.8f64.sinh();
        assert!((s - 0.888_105_982_187_623).abs() < 1e-14);
        assert!(s * s < 1.0);
    }

    #[test]
    fn lookup() {
        for name in ["concus", "catenoid", "scherk", "schwarz", "disk", "cantor"] {
            assert_eq!(by_name(name, CantorPattern::Mirror).unwrap().name, name);
        }
        assert!(matches!(by_name("helicoid", CantorPattern::Mirror), Err(Error::UnknownProblem(_))));
    }
}

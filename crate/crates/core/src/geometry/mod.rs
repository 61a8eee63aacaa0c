//! Polygonal geometry on the unit flat torus.
//!
//! Curves are stored *lifted*: vertices are planar points that are never
//! wrapped, and each curve carries the integer period vector by which its lift
//! closes up. Wrapping into `[0,1)²` only happens for distance queries and I/O.

mod covering;
mod curvature;
mod curve;
mod distance;
mod region;
pub mod shapes;
pub mod snapshot;

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use covering::{density_ratio, hausdorff_gap, neighborhood_area, DensityReport};
pub use curvature::{curvature_profile, region_curvature_profile, CurvatureProfile};
pub use curve::{ClosedCurve, LatticeSymmetry, MIN_VERTICES};
pub use distance::{signed_distance, DistanceOracle, NearestSegment};
pub use region::RegionBoundary;

/// Distance from `{0, ±2π}` beyond which a turning number is rejected.
pub const TURNING_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curve has {found} vertices, at least {required} are required")]
    TooFewVertices { found: usize, required: usize },
    #[error("degenerate edge {edge} (zero length) in curve")]
    DegenerateEdge { edge: usize },
    #[error("turning number {value} is not within {TURNING_TOLERANCE} of 0 or ±2π")]
    BadTurningNumber { value: f64 },
    #[error("period vectors do not sum to zero: ({n1}, {n2})")]
    UnbalancedPeriods { n1: i64, n2: i64 },
    #[error("inconsistent orientation: raw signed area {raw} cannot describe a set on the torus")]
    InconsistentOrientation { raw: f64 },
    #[error("enclosed area {area} is not in (0, 1)")]
    DegenerateArea { area: f64 },
    #[error("region has no boundary curves")]
    EmptyRegion,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

/// A planar vector / lifted point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-d cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Clockwise rotation by 90°. For a curve with the region on its left this
    /// turns the tangent into the outward normal.
    #[inline]
    pub fn perp_right(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    #[inline]
    pub fn perp_left(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            self
        }
    }

    /// Componentwise representative in `[-1/2, 1/2)`.
    #[inline]
    pub fn wrap_centered(self) -> Vec2 {
        Vec2::new(wrap_centered(self.x), wrap_centered(self.y))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[inline]
pub(crate) fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[inline]
pub(crate) fn wrap_centered(v: f64) -> f64 {
    v - (v + 0.5).floor()
}

/// A point of the torus, canonically wrapped into `[0,1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint {
            x: wrap_unit(x),
            y: wrap_unit(y),
        }
    }

    pub fn from_lifted(p: Vec2) -> Self {
        Self::new(p.x, p.y)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Shortest representative of `b - a`, each component in `[-1/2, 1/2)`.
/// Its Euclidean norm is the torus distance between the points.
pub fn torus_displacement(a: TorusPoint, b: TorusPoint) -> Vec2 {
    (b.as_vec() - a.as_vec()).wrap_centered()
}

pub fn torus_distance(a: TorusPoint, b: TorusPoint) -> f64 {
    torus_displacement(a, b).norm()
}

/// Integer translation closing the lift of a curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodVector {
    pub n1: i64,
    pub n2: i64,
}

impl PeriodVector {
    pub const ZERO: PeriodVector = PeriodVector { n1: 0, n2: 0 };

    pub const fn new(n1: i64, n2: i64) -> Self {
        PeriodVector { n1, n2 }
    }

    pub fn is_zero(&self) -> bool {
        self.n1 == 0 && self.n2 == 0
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.n1 as f64, self.n2 as f64)
    }

    pub fn length(&self) -> f64 {
        self.as_vec().norm()
    }

    pub fn gcd(&self) -> i64 {
        gcd(self.n1.abs(), self.n2.abs())
    }

    /// Sign-normalised representative: first nonzero component positive.
    pub fn canonical(&self) -> PeriodVector {
        if self.n1 < 0 || (self.n1 == 0 && self.n2 < 0) {
            PeriodVector::new(-self.n1, -self.n2)
        } else {
            *self
        }
    }
}

impl Neg for PeriodVector {
    type Output = PeriodVector;
    fn neg(self) -> PeriodVector {
        PeriodVector::new(-self.n1, -self.n2)
    }
}

impl Add for PeriodVector {
    type Output = PeriodVector;
    fn add(self, o: PeriodVector) -> PeriodVector {
        PeriodVector::new(self.n1 + o.n1, self.n2 + o.n2)
    }
}

pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum over the 9 nearest periodic images, independent of the
    /// centred-wrap formula.
    fn brute_displacement(a: TorusPoint, b: TorusPoint) -> Vec2 {
        let mut best = Vec2::new(f64::INFINITY, 0.0);
        for i in -1..=1 {
            for j in -1..=1 {
                let d = b.as_vec() + Vec2::new(i as f64, j as f64) - a.as_vec();
                if d.norm() < best.norm() {
                    best = d;
                }
            }
        }
        best
    }

    #[test]
    fn displacement_examples() {
        let p = TorusPoint::new(0.1, 0.1);
        assert_eq!(torus_displacement(p, p), Vec2::ZERO);

        let d = torus_displacement(TorusPoint::new(0.9, 0.0), TorusPoint::new(0.0, 0.0));
        assert!((d.x - 0.1).abs() < 1e-15 && d.y == 0.0);

        let a = TorusPoint::new(0.25, 0.75);
        let b = TorusPoint::new(0.75, 0.25);
        let d = torus_displacement(a, b);
        assert!((d.x.abs() - 0.5).abs() < 1e-15 && (d.y.abs() - 0.5).abs() < 1e-15);
        assert!((d.norm() - brute_displacement(a, b).norm()).abs() < 1e-15);
        assert!((d.norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wrapping_is_canonical() {
        let p = TorusPoint::new(-1e-18, 1.0);
        assert!(p.x() >= 0.0 && p.x() < 1.0);
        assert_eq!(p.y(), 0.0);
        assert_eq!(TorusPoint::new(2.25, -0.75).as_vec(), Vec2::new(0.25, 0.25));
    }

    #[test]
    fn canonical_period() {
        assert_eq!(PeriodVector::new(-1, 0).canonical(), PeriodVector::new(1, 0));
        assert_eq!(PeriodVector::new(0, -1).canonical(), PeriodVector::new(0, 1));
        assert_eq!(PeriodVector::new(2, -4).gcd(), 2);
    }

    proptest::proptest! {
        #[test]
        fn displacement_matches_brute_force(ax in 0.0f64..1.0, ay in 0.0f64..1.0,
                                            bx in 0.0f64..1.0, by in 0.0f64..1.0) {
            let a = TorusPoint::new(ax, ay);
            let b = TorusPoint::new(bx, by);
            let d = torus_displacement(a, b);
            proptest::prop_assert!(d.x >= -0.5 && d.x < 0.5 && d.y >= -0.5 && d.y < 0.5);
            proptest::prop_assert!((d.norm() - brute_displacement(a, b).norm()).abs() < 1e-12);
        }
    }
}

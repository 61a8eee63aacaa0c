use serde::{Deserialize, Serialize};

use super::{GeometryError, PeriodVector, Vec2, TURNING_TOLERANCE};

/// Fewest vertices a curve may have; the curvature stencils need at least this.
pub const MIN_VERTICES: usize = 8;

/// Oriented closed polygon on the torus, stored by its lift.
///
/// Vertex `i + len` is vertex `i` translated by the period vector, so the
/// closing edge runs from the last vertex to `vertices[0] + period`.
/// `orientation = +1` means the enclosed set lies to the left of the
/// traversal direction; `-1` means it lies to the right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    vertices: Vec<Vec2>,
    period: PeriodVector,
    orientation: i8,
}

impl ClosedCurve {
    pub fn new(
        vertices: Vec<Vec2>,
        period: PeriodVector,
        orientation: i8,
    ) -> Result<Self, GeometryError> {
        if vertices.len() < MIN_VERTICES {
            return Err(GeometryError::TooFewVertices {
                found: vertices.len(),
                required: MIN_VERTICES,
            });
        }
        if orientation != 1 && orientation != -1 {
            return Err(GeometryError::InvalidArgument(format!(
                "orientation must be ±1, got {orientation}"
            )));
        }
        let curve = ClosedCurve {
            vertices,
            period,
            orientation,
        };
        for i in 0..curve.len() {
            let e = curve.edge_vector(i);
            if !(e.norm() > 0.0) || !e.x.is_finite() || !e.y.is_finite() {
                return Err(GeometryError::DegenerateEdge { edge: i });
            }
        }
        Ok(curve)
    }

    /// Positively oriented (region on the left) curve.
    pub fn positive(vertices: Vec<Vec2>, period: PeriodVector) -> Result<Self, GeometryError> {
        Self::new(vertices, period, 1)
    }

    pub(crate) fn from_raw(vertices: Vec<Vec2>, period: PeriodVector) -> Self {
        ClosedCurve {
            vertices,
            period,
            orientation: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn period(&self) -> PeriodVector {
        self.period
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn is_contractible(&self) -> bool {
        self.period.is_zero()
    }

    /// Lifted vertex for any integer index.
    #[inline]
    pub fn lifted(&self, i: isize) -> Vec2 {
        let n = self.len() as isize;
        let k = i.div_euclid(n);
        let r = i.rem_euclid(n) as usize;
        self.vertices[r] + self.period.as_vec() * (k as f64)
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (lifted).
    #[inline]
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let a = self.vertices[i];
        let b = if i + 1 == self.len() {
            self.vertices[0] + self.period.as_vec()
        } else {
            self.vertices[i + 1]
        };
        (a, b)
    }

    #[inline]
    pub fn edge_vector(&self, i: usize) -> Vec2 {
        let (a, b) = self.edge(i);
        b - a
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.edge_vector(i).norm()).collect()
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_vector(i).norm()).sum()
    }

    /// Signed exterior angle at every vertex, in `(-π, π]`.
    pub fn turning_angles(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = self.edge_vector((i + n - 1) % n);
                let next = self.edge_vector(i);
                prev.cross(next).atan2(prev.dot(next))
            })
            .collect()
    }

    /// Total signed turning of the traversal, without validation.
    pub fn raw_turning_number(&self) -> f64 {
        self.turning_angles().iter().sum()
    }

    /// Total signed turning, required to be near `0` or `±2π`.
    pub fn turning_number(&self) -> Result<f64, GeometryError> {
        let t = self.raw_turning_number();
        let two_pi = 2.0 * std::f64::consts::PI;
        let dist = [0.0, two_pi, -two_pi]
            .iter()
            .map(|c| (t - c).abs())
            .fold(f64::INFINITY, f64::min);
        if dist > TURNING_TOLERANCE {
            return Err(GeometryError::BadTurningNumber { value: t });
        }
        Ok(t)
    }

    /// Nearest element of `{-1, 0, 1}` to `turning_number / 2π`.
    pub fn winding_class(&self) -> Result<i32, GeometryError> {
        let t = self.turning_number()?;
        Ok((t / (2.0 * std::f64::consts::PI)).round() as i32)
    }

    /// Green's-theorem contribution of this curve to the enclosed area,
    /// including the correction that makes it independent of the starting
    /// vertex. Only the sum over a whole region, taken mod 1, is meaningful.
    pub(crate) fn area_term(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            s += a.cross(b);
        }
        0.5 * (s + self.vertices[0].cross(self.period.as_vec()))
    }

    /// Same geometric curve traversed backwards.
    pub fn reversed(&self) -> ClosedCurve {
        let mut v = self.vertices.clone();
        v.reverse();
        ClosedCurve {
            vertices: v,
            period: -self.period,
            orientation: -self.orientation,
        }
    }

    /// Curve re-traversed so that the enclosed set is on the left.
    pub fn region_oriented(&self) -> ClosedCurve {
        if self.orientation == 1 {
            self.clone()
        } else {
            let mut r = self.reversed();
            r.orientation = 1;
            r
        }
    }

    pub fn translated(&self, t: Vec2) -> ClosedCurve {
        ClosedCurve {
            vertices: self.vertices.iter().map(|&p| p + t).collect(),
            period: self.period,
            orientation: self.orientation,
        }
    }

    /// Image under a symmetry of the square lattice. Orientation-reversing
    /// maps also reverse the traversal so the enclosed set stays on the
    /// same side.
    pub fn transformed(&self, sym: LatticeSymmetry) -> ClosedCurve {
        let m = sym.matrix();
        let apply = |p: Vec2| {
            Vec2::new(
                m[0][0] as f64 * p.x + m[0][1] as f64 * p.y,
                m[1][0] as f64 * p.x + m[1][1] as f64 * p.y,
            )
        };
        let period = PeriodVector::new(
            m[0][0] * self.period.n1 + m[0][1] * self.period.n2,
            m[1][0] * self.period.n1 + m[1][1] * self.period.n2,
        );
        let mapped = ClosedCurve {
            vertices: self.vertices.iter().map(|&p| apply(p)).collect(),
            period,
            orientation: self.orientation,
        };
        if sym.determinant() < 0 {
            let mut r = mapped.reversed();
            r.orientation = self.orientation;
            r
        } else {
            mapped
        }
    }

    /// Outward unit normal at each vertex (chord direction rotated clockwise),
    /// assuming the enclosed set is on the left.
    pub fn vertex_normals(&self) -> Vec<Vec2> {
        let n = self.len() as isize;
        (0..n)
            .map(|i| (self.lifted(i + 1) - self.lifted(i - 1)).perp_right().normalized())
            .collect()
    }

    /// Half the sum of the two adjacent edge lengths at each vertex.
    pub fn dual_lengths(&self) -> Vec<f64> {
        let e = self.edge_lengths();
        let n = e.len();
        (0..n).map(|i| 0.5 * (e[(i + n - 1) % n] + e[i])).collect()
    }

    /// Arithmetic mean of the vertices.
    pub fn vertex_mean(&self) -> Vec2 {
        let s = self.vertices.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        s * (1.0 / self.len() as f64)
    }

    /// `n` vertices at equal arclength along the polygon, starting at vertex 0.
    pub fn resample(&self, n: usize) -> Result<ClosedCurve, GeometryError> {
        if n < MIN_VERTICES {
            return Err(GeometryError::TooFewVertices {
                found: n,
                required: MIN_VERTICES,
            });
        }
        let lengths = self.edge_lengths();
        let total: f64 = lengths.iter().sum();
        let spacing = total / n as f64;
        let mut out = Vec::with_capacity(n);
        out.push(self.vertices[0]);
        let mut edge = 0usize;
        let mut edge_start = 0.0;
        for k in 1..n {
            let target = k as f64 * spacing;
            while edge + 1 < lengths.len() && edge_start + lengths[edge] < target {
                edge_start += lengths[edge];
                edge += 1;
            }
            let (a, b) = self.edge(edge);
            let t = ((target - edge_start) / lengths[edge]).clamp(0.0, 1.0);
            out.push(a + (b - a) * t);
        }
        ClosedCurve::new(out, self.period, self.orientation)
    }

    pub(crate) fn set_orientation(&mut self, orientation: i8) {
        self.orientation = orientation;
    }
}

/// The eight symmetries of the square lattice `ℤ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeSymmetry {
    Identity,
    Rotate90,
    Rotate180,
    Rotate270,
    ReflectX,
    ReflectY,
    SwapAxes,
    SwapAxesNegated,
}

impl LatticeSymmetry {
    pub const ALL: [LatticeSymmetry; 8] = [
        LatticeSymmetry::Identity,
        LatticeSymmetry::Rotate90,
        LatticeSymmetry::Rotate180,
        LatticeSymmetry::Rotate270,
        LatticeSymmetry::ReflectX,
        LatticeSymmetry::ReflectY,
        LatticeSymmetry::SwapAxes,
        LatticeSymmetry::SwapAxesNegated,
    ];

    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            LatticeSymmetry::Identity => [[1, 0], [0, 1]],
            LatticeSymmetry::Rotate90 => [[0, -1], [1, 0]],
            LatticeSymmetry::Rotate180 => [[-1, 0], [0, -1]],
            LatticeSymmetry::Rotate270 => [[0, 1], [-1, 0]],
            LatticeSymmetry::ReflectX => [[-1, 0], [0, 1]],
            LatticeSymmetry::ReflectY => [[1, 0], [0, -1]],
            LatticeSymmetry::SwapAxes => [[0, 1], [1, 0]],
            LatticeSymmetry::SwapAxesNegated => [[0, -1], [-1, 0]],
        }
    }

    pub fn determinant(self) -> i64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use std::f64::consts::PI;

    #[test]
    fn circle_turning_numbers() {
        let c = shapes::circle(Vec2::new(0.5, 0.5), 0.2, 512);
        assert!((c.turning_number().unwrap() - 2.0 * PI).abs() < 1e-9);
        assert!((c.reversed().turning_number().unwrap() + 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn graph_curve_turns_zero_and_is_long() {
        let c = shapes::graph_curve(|x| 0.05 * (2.0 * PI * x).sin(), 0.5, 1024, true);
        assert_eq!(c.period(), PeriodVector::new(1, 0));
        assert!(c.turning_number().unwrap().abs() < 1e-9);
        assert!(c.perimeter() >= 1.0 - 1e-6);
    }

    #[test]
    fn closure_uses_period() {
        let c = shapes::graph_curve(|_| 0.0, 0.3, 16, true);
        let (a, b) = c.edge(15);
        assert!((b - a).norm() - 1.0 / 16.0 < 1e-15);
        assert_eq!(c.lifted(16), c.vertices()[0] + Vec2::new(1.0, 0.0));
        assert_eq!(c.lifted(-1), c.vertices()[15] - Vec2::new(1.0, 0.0));
    }

    #[test]
    fn rejects_short_and_degenerate_curves() {
        let v: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64 * 0.1, 0.0)).collect();
        assert!(matches!(
            ClosedCurve::positive(v, PeriodVector::new(1, 0)),
            Err(GeometryError::TooFewVertices { .. })
        ));
        let mut v: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64 * 0.1, 0.0)).collect();
        v[3] = v[2];
        assert!(matches!(
            ClosedCurve::positive(v, PeriodVector::new(1, 0)),
            Err(GeometryError::DegenerateEdge { edge: 2 })
        ));
    }

    #[test]
    fn bad_turning_number_is_rejected() {
        // a circle traversed twice turns by 4π
        let v: Vec<Vec2> = (0..64)
            .map(|i| {
                let t = 4.0 * PI * i as f64 / 64.0;
                Vec2::new(0.5 + 0.2 * t.cos(), 0.5 + 0.2 * t.sin())
            })
            .collect();
        let c = ClosedCurve::positive(v, PeriodVector::ZERO).unwrap();
        assert!(matches!(
            c.turning_number(),
            Err(GeometryError::BadTurningNumber { .. })
        ));
        // a figure eight turns by 0 although it is contractible
        let v: Vec<Vec2> = (0..64)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 64.0;
                Vec2::new(0.5 + 0.2 * t.sin(), 0.5 + 0.1 * (2.0 * t).sin())
            })
            .collect();
        let c = ClosedCurve::positive(v, PeriodVector::ZERO).unwrap();
        assert!(c.turning_number().unwrap().abs() < 1e-9);
        assert!(matches!(
            crate::geometry::RegionBoundary::new(vec![c]),
            Err(GeometryError::BadTurningNumber { .. })
        ));
    }


    #[test]
    fn resample_circle() {
        let c = shapes::circle(Vec2::new(0.3, 0.6), 0.2, 512);
        let r = c.resample(256).unwrap();
        assert_eq!(r.len(), 256);
        assert!(((r.perimeter() - c.perimeter()) / c.perimeter()).abs() < 1e-4);
        assert!(matches!(c.resample(7), Err(GeometryError::TooFewVertices { .. })));
    }

    #[test]
    fn resample_uniform_is_nearly_identity() {
        let c = shapes::circle(Vec2::new(0.3, 0.6), 0.2, 128);
        let r = c.resample(128).unwrap();
        let spacing = c.perimeter() / 128.0;
        for (a, b) in c.vertices().iter().zip(r.vertices()) {
            assert!((*a - *b).norm() <= spacing);
        }
        assert_eq!(r.period(), c.period());
        assert_eq!(r.orientation(), c.orientation());
    }

    #[test]
    fn resample_preserves_period_and_bounds_perimeter_change() {
        let c = shapes::graph_curve(|x| 0.04 * (4.0 * PI * x).sin(), 0.4, 300, false);
        let r = c.resample(200).unwrap();
        assert_eq!(r.period(), c.period());
        let l = c.perimeter();
        let rel = ((r.perimeter() - l) / l).abs();
        assert!(rel <= (l / 200.0).powi(2), "relative change {rel}");
    }

    #[test]
    fn symmetries_preserve_turning() {
        let c = shapes::circle(Vec2::new(0.3, 0.6), 0.2, 64);
        for s in LatticeSymmetry::ALL {
            let t = c.transformed(s).turning_number().unwrap();
            assert!((t - 2.0 * PI).abs() < 1e-9, "{s:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn reversal_negates_turning(r in 0.05f64..0.3, n in 8usize..200, cx in 0.0f64..1.0) {
            let c = shapes::circle(Vec2::new(cx, 0.5), r, n);
            let t = c.turning_number().unwrap();
            let tr = c.reversed().turning_number().unwrap();
            proptest::prop_assert!((t + tr).abs() < 1e-9);
            proptest::prop_assert!((t - 2.0 * PI).abs() < 1e-6);
        }

        #[test]
        fn periodic_graphs_have_length_at_least_one(a in 0.0f64..0.1, k in 1u32..4,
                                                    n in 16usize..300, up in proptest::bool::ANY) {
            let c = shapes::graph_curve(move |x| a * (2.0 * PI * k as f64 * x).sin(), 0.5, n, up);
            let t = c.turning_number().unwrap();
            proptest::prop_assert!(t.abs() < 1e-6);
            proptest::prop_assert!(c.perimeter() >= 1.0 - 1e-6);
        }
    }
}

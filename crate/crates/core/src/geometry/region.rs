use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ClosedCurve, GeometryError, LatticeSymmetry, PeriodVector, Vec2};

/// Areas closer than this to 0 or 1 are treated as degenerate.
const AREA_EPS: f64 = 1e-12;

/// A set `E ⊂ 𝕋²` described by its boundary curves, all stored with the set
/// on their left.
///
/// The whole torus and the empty set have no boundary; they are represented
/// by an empty curve list and an area of exactly 1 or 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    curves: Vec<ClosedCurve>,
    area: f64,
}

impl RegionBoundary {
    pub fn new(curves: Vec<ClosedCurve>) -> Result<Self, GeometryError> {
        if curves.is_empty() {
            return Err(GeometryError::EmptyRegion);
        }
        let curves: Vec<ClosedCurve> = curves.iter().map(|c| c.region_oriented()).collect();
        let total = curves
            .iter()
            .fold(PeriodVector::ZERO, |acc, c| acc + c.period());
        if !total.is_zero() {
            return Err(GeometryError::UnbalancedPeriods {
                n1: total.n1,
                n2: total.n2,
            });
        }
        for c in &curves {
            let t = c.turning_number()?;
            let contractible_turn = t.abs() > PI;
            if contractible_turn != c.is_contractible() {
                return Err(GeometryError::BadTurningNumber { value: t });
            }
        }
        let area = measure_area(&curves)?;
        Ok(RegionBoundary { curves, area })
    }

    pub fn full_torus() -> Self {
        RegionBoundary {
            curves: Vec::new(),
            area: 1.0,
        }
    }

    pub fn empty_set() -> Self {
        RegionBoundary {
            curves: Vec::new(),
            area: 0.0,
        }
    }

    /// Rebuild from curves already known to be region-oriented, skipping the
    /// turning-number checks. Used by the steppers on every inner iterate.
    pub(crate) fn from_oriented(curves: Vec<ClosedCurve>) -> Result<Self, GeometryError> {
        let area = measure_area(&curves)?;
        Ok(RegionBoundary { curves, area })
    }

    pub fn curves(&self) -> &[ClosedCurve] {
        &self.curves
    }

    pub fn into_curves(self) -> Vec<ClosedCurve> {
        self.curves
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Enclosed torus area, recomputed from the curves.
    pub fn enclosed_area(&self) -> Result<f64, GeometryError> {
        if self.curves.is_empty() {
            return Ok(self.area);
        }
        measure_area(&self.curves)
    }

    pub fn perimeter(&self) -> f64 {
        self.curves.iter().map(|c| c.perimeter()).sum()
    }

    pub fn component_count(&self) -> usize {
        self.curves.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.curves.iter().map(|c| c.len()).sum()
    }

    pub fn is_full(&self) -> bool {
        self.curves.is_empty() && self.area == 1.0
    }

    pub fn is_empty_set(&self) -> bool {
        self.curves.is_empty() && self.area == 0.0
    }

    /// The closure of `𝕋² \ E`: the same curves traversed backwards.
    pub fn complement(&self) -> RegionBoundary {
        if self.curves.is_empty() {
            return RegionBoundary {
                curves: Vec::new(),
                area: 1.0 - self.area,
            };
        }
        let curves: Vec<ClosedCurve> = self
            .curves
            .iter()
            .map(|c| {
                let mut r = c.reversed();
                r.set_orientation(1);
                r
            })
            .collect();
        RegionBoundary {
            area: 1.0 - self.area,
            curves,
        }
    }

    pub fn translated(&self, t: Vec2) -> RegionBoundary {
        RegionBoundary {
            curves: self.curves.iter().map(|c| c.translated(t)).collect(),
            area: self.area,
        }
    }

    pub fn transformed(&self, sym: LatticeSymmetry) -> RegionBoundary {
        RegionBoundary {
            curves: self.curves.iter().map(|c| c.transformed(sym)).collect(),
            area: self.area,
        }
    }

    /// Every curve resampled to `n` equally spaced vertices.
    pub fn resampled(&self, n: usize) -> Result<RegionBoundary, GeometryError> {
        let curves = self
            .curves
            .iter()
            .map(|c| c.resample(n))
            .collect::<Result<Vec<_>, _>>()?;
        RegionBoundary::from_oriented(curves)
    }

    /// Every curve resampled so its spacing is close to `spacing`
    /// (at least the minimum vertex count).
    pub fn resampled_to_spacing(&self, spacing: f64) -> Result<RegionBoundary, GeometryError> {
        let curves = self
            .curves
            .iter()
            .map(|c| {
                let n = ((c.perimeter() / spacing).round() as usize).max(super::MIN_VERTICES);
                c.resample(n)
            })
            .collect::<Result<Vec<_>, _>>()?;
        RegionBoundary::from_oriented(curves)
    }
}

/// Area from Green's theorem on the lifts, reduced mod 1.
fn measure_area(curves: &[ClosedCurve]) -> Result<f64, GeometryError> {
    let raw: f64 = curves.iter().map(|c| c.area_term()).sum();
    let all_contractible = curves.iter().all(|c| c.is_contractible());
    if all_contractible && raw.abs() >= 1.0 {
        return Err(GeometryError::InconsistentOrientation { raw });
    }
    let area = raw - raw.floor();
    if !(AREA_EPS..=1.0 - AREA_EPS).contains(&area) {
        return Err(GeometryError::DegenerateArea { area });
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn disk_area_and_perimeter() {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.2, 512).unwrap();
        let p = 2.0 * PI * 0.2;
        assert!(((e.perimeter() - p) / p).abs() < 2e-5);
        let a = PI * 0.04;
        assert!(((e.area() - a) / a).abs() < 1e-4);
    }

    #[test]
    fn strip_area_and_perimeter() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        assert!((e.area() - 0.3).abs() < 1e-14);
        assert!((e.perimeter() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn area_independent_of_starting_vertex_and_lift() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let shifted: Vec<ClosedCurve> = e
            .curves()
            .iter()
            .map(|c| {
                let mut v = c.vertices().to_vec();
                v.rotate_left(5);
                let n = v.len();
                let p = c.period().as_vec();
                for q in v.iter_mut().skip(n - 5) {
                    *q += p;
                }
                ClosedCurve::new(v, c.period(), 1).unwrap().translated(Vec2::new(3.0, -2.0))
            })
            .collect();
        let f = RegionBoundary::new(shifted).unwrap();
        assert!((f.area() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn seam_disk_area() {
        let e = shapes::disk(Vec2::new(0.95, 0.5), 0.2, 512).unwrap();
        assert!((e.area() - PI * 0.04).abs() < 1e-4);
    }

    #[test]
    fn complement_areas_sum_to_one() {
        for e in [
            shapes::disk(Vec2::new(0.3, 0.7), 0.2, 256).unwrap(),
            shapes::strip(0.1, 0.45, 64).unwrap(),
            shapes::perturbed_strip(0.2, 0.5, 0.02, 2, 256).unwrap(),
        ] {
            let c = e.complement();
            assert!((c.enclosed_area().unwrap() + e.area() - 1.0).abs() < 1e-12);
            assert!((c.area() + e.area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unbalanced_periods_rejected() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let one = e.curves()[0].clone();
        assert!(matches!(
            RegionBoundary::new(vec![one]),
            Err(GeometryError::UnbalancedPeriods { n1: 1, n2: 0 })
        ));
        assert!(matches!(
            RegionBoundary::new(vec![]),
            Err(GeometryError::EmptyRegion)
        ));
    }

    #[test]
    fn translation_and_symmetry_invariance() {
        let e = shapes::perturbed_disk(Vec2::new(0.4, 0.6), 0.25, 0.02, 3, 256).unwrap();
        let t = e.translated(Vec2::new(0.37, -0.81));
        assert!((t.area() - e.area()).abs() < 1e-12);
        assert!((t.perimeter() - e.perimeter()).abs() < 1e-12);
        for s in LatticeSymmetry::ALL {
            let f = RegionBoundary::new(e.transformed(s).into_curves()).unwrap();
            assert!((f.area() - e.area()).abs() < 1e-12, "{s:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn translation_invariance(dx in -2.0f64..2.0, dy in -2.0f64..2.0, lo in 0.05f64..0.4, w in 0.05f64..0.5) {
            let e = shapes::perturbed_strip(lo, lo + w, 0.01, 3, 128).unwrap();
            let t = RegionBoundary::new(e.translated(Vec2::new(dx, dy)).into_curves()).unwrap();
            proptest::prop_assert!((t.area() - e.area()).abs() < 1e-12);
            proptest::prop_assert!((t.perimeter() - e.perimeter()).abs() < 1e-12);
            proptest::prop_assert!((e.area() - w).abs() < 1e-12);
        }
    }
}

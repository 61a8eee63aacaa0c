use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{torus_point, CatalogError, ClassificationResult, ReferenceKind, Verdict};
use crate::geometry::{
    shapes, torus_distance, ClosedCurve, PeriodVector, RegionBoundary, TorusPoint, Vec2,
};

/// One straight strip: normal coordinate of its lower edge and its width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripBand {
    pub offset: f64,
    pub width: f64,
}

/// Canonical disk, complement-of-disk or strip configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub kind: ReferenceKind,
    pub count: usize,
    /// common radius (disk kinds)
    pub radius: Option<f64>,
    /// disk centers (disk kinds)
    pub centers: Vec<TorusPoint>,
    /// primitive strip direction (strips)
    pub period: Option<PeriodVector>,
    /// strips sorted by offset (strips)
    pub strips: Vec<StripBand>,
    /// component area minus reference component area, per component
    pub area_mismatch: Vec<f64>,
}

impl ReferenceConfig {
    pub fn disks(centers: Vec<TorusPoint>, radius: f64) -> Result<Self, CatalogError> {
        check_disks(&centers, radius)?;
        Ok(ReferenceConfig {
            kind: ReferenceKind::Disks,
            count: centers.len(),
            radius: Some(radius),
            area_mismatch: vec![0.0; centers.len()],
            centers,
            period: None,
            strips: Vec::new(),
        })
    }

    pub fn complement_disks(centers: Vec<TorusPoint>, radius: f64) -> Result<Self, CatalogError> {
        let mut r = Self::disks(centers, radius)?;
        r.kind = ReferenceKind::ComplementDisks;
        Ok(r)
    }

    pub fn strips(period: PeriodVector, mut strips: Vec<StripBand>) -> Result<Self, CatalogError> {
        let period = period.canonical();
        if period.is_zero() || period.gcd() != 1 {
            return Err(CatalogError::Overlap(format!(
                "strip direction ({}, {}) is not primitive",
                period.n1, period.n2
            )));
        }
        let spacing = 1.0 / period.length();
        for s in strips.iter_mut() {
            s.offset = s.offset.rem_euclid(spacing);
        }
        strips.sort_by(|a, b| a.offset.partial_cmp(&b.offset).unwrap());
        for (i, s) in strips.iter().enumerate() {
            if !(s.width > 0.0) {
                return Err(CatalogError::Overlap(format!("strip {i} has width {}", s.width)));
            }
            let next = if i + 1 < strips.len() {
                strips[i + 1].offset
            } else {
                strips[0].offset + spacing
            };
            if s.offset + s.width >= next {
                return Err(CatalogError::Overlap(format!(
                    "strip {i} (offset {}, width {}) reaches the next strip at {next}",
                    s.offset, s.width
                )));
            }
        }
        Ok(ReferenceConfig {
            kind: ReferenceKind::Strips,
            count: strips.len(),
            radius: None,
            centers: Vec::new(),
            period: Some(period),
            area_mismatch: vec![0.0; strips.len()],
            strips,
        })
    }

    /// Unit normal to the strips (to the left of the period direction) and
    /// the spacing of parallel closed geodesics in that direction.
    fn strip_frame(&self) -> (Vec2, f64) {
        let v = self.period.unwrap_or(PeriodVector::new(1, 0));
        (v.as_vec().normalized().perp_left(), 1.0 / v.length())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let tp = TorusPoint::from_lifted(p);
        match self.kind {
            ReferenceKind::Disks | ReferenceKind::ComplementDisks => {
                let r = self.radius.unwrap_or(0.0);
                let in_disk = self.centers.iter().any(|&c| torus_distance(tp, c) < r);
                in_disk == (self.kind == ReferenceKind::Disks)
            }
            ReferenceKind::Strips => {
                let (nu, spacing) = self.strip_frame();
                let s = p.dot(nu);
                self.strips
                    .iter()
                    .any(|b| (s - b.offset).rem_euclid(spacing) < b.width)
            }
        }
    }

    /// Torus distance from `p` to the reference boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let tp = TorusPoint::from_lifted(p);
        match self.kind {
            ReferenceKind::Disks | ReferenceKind::ComplementDisks => {
                let r = self.radius.unwrap_or(0.0);
                self.centers
                    .iter()
                    .map(|&c| (torus_distance(tp, c) - r).abs())
                    .fold(f64::INFINITY, f64::min)
            }
            ReferenceKind::Strips => {
                let (nu, spacing) = self.strip_frame();
                let s = p.dot(nu);
                let circ = |x: f64| {
                    let u = x.rem_euclid(spacing);
                    u.min(spacing - u)
                };
                self.strips
                    .iter()
                    .map(|b| circ(s - b.offset).min(circ(s - b.offset - b.width)))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let d = self.boundary_distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            ReferenceKind::Disks => self.count as f64 * PI * self.radius.unwrap_or(0.0).powi(2),
            ReferenceKind::ComplementDisks => {
                1.0 - self.count as f64 * PI * self.radius.unwrap_or(0.0).powi(2)
            }
            ReferenceKind::Strips => {
                let len = self.period.map_or(1.0, |p| p.length());
                self.strips.iter().map(|b| b.width * len).sum()
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.kind {
            ReferenceKind::Disks | ReferenceKind::ComplementDisks => {
                self.count as f64 * 2.0 * PI * self.radius.unwrap_or(0.0)
            }
            ReferenceKind::Strips => 2.0 * self.count as f64 * self.period.map_or(1.0, |p| p.length()),
        }
    }

    /// Polygonal boundary with `n` vertices per curve.
    pub fn to_region(&self, n: usize) -> Result<RegionBoundary, CatalogError> {
        match self.kind {
            ReferenceKind::Disks | ReferenceKind::ComplementDisks => {
                let centers: Vec<Vec2> = self.centers.iter().map(|c| c.as_vec()).collect();
                let e = shapes::disks(&centers, self.radius.unwrap_or(0.0), n)?;
                Ok(if self.kind == ReferenceKind::Disks {
                    e
                } else {
                    e.complement()
                })
            }
            ReferenceKind::Strips => {
                let period = self.period.unwrap_or(PeriodVector::new(1, 0));
                let (nu, _) = self.strip_frame();
                let mut curves: Vec<ClosedCurve> = Vec::new();
                for b in &self.strips {
                    let e = shapes::slanted_strip(period, nu * b.offset, b.width, n)?;
                    curves.extend(e.into_curves());
                }
                Ok(RegionBoundary::new(curves)?)
            }
        }
    }
}

fn check_disks(centers: &[TorusPoint], r: f64) -> Result<(), CatalogError> {
    if !(r > 0.0) || 2.0 * r >= 1.0 {
        return Err(CatalogError::Overlap(format!("radius {r} does not fit on the torus")));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d = torus_distance(centers[i], centers[j]);
            if d <= 2.0 * r {
                return Err(CatalogError::Overlap(format!(
                    "disks {i} and {j} at distance {d} with radius {r}"
                )));
            }
        }
    }
    Ok(())
}

/// Signed area and area centroid of a contractible polygon.
pub(crate) fn polygon_moments(c: &ClosedCurve) -> (f64, Vec2) {
    let mut a = 0.0;
    let mut m = Vec2::ZERO;
    let o = c.vertices()[0];
    for i in 0..c.len() {
        let (p, q) = c.edge(i);
        let (p, q) = (p - o, q - o);
        let w = p.cross(q);
        a += w;
        m += (p + q) * w;
    }
    let a = 0.5 * a;
    (a, o + m * (1.0 / (6.0 * a)))
}

/// Area-matched canonical configuration for a classified set.
pub fn build_reference(
    result: &ClassificationResult,
    region: &RegionBoundary,
) -> Result<ReferenceConfig, CatalogError> {
    let m = region.area();
    match result.verdict {
        Verdict::Unclassified => Err(CatalogError::Unclassified),
        Verdict::Disks { count } | Verdict::ComplementDisks { count } => {
            let holes = matches!(result.verdict, Verdict::ComplementDisks { .. });
            let mut centers = Vec::with_capacity(count);
            let mut areas = Vec::with_capacity(count);
            for c in region.curves() {
                // holes are traversed clockwise; measure them the other way
                let curve = if holes { c.reversed() } else { c.clone() };
                let (a, centroid) = polygon_moments(&curve);
                centers.push(torus_point(centroid));
                areas.push(a);
            }
            let total = if holes { 1.0 - m } else { m };
            let r = (total / (PI * count as f64)).sqrt();
            let mut cfg = if holes {
                ReferenceConfig::complement_disks(centers, r)?
            } else {
                ReferenceConfig::disks(centers, r)?
            };
            cfg.area_mismatch = areas.iter().map(|a| a - PI * r * r).collect();
            Ok(cfg)
        }
        Verdict::Strips { period, .. } => {
            let v = period.canonical();
            let nu = v.as_vec().normalized().perp_left();
            let spacing = 1.0 / v.length();
            // normal coordinate of each curve (edge-length weighted mean)
            let mut items: Vec<(f64, bool, usize)> = Vec::new();
            for (i, c) in region.curves().iter().enumerate() {
                let mut s = 0.0;
                let mut w = 0.0;
                for k in 0..c.len() {
                    let (a, b) = c.edge(k);
                    let l = (b - a).norm();
                    s += l * ((a + b) * 0.5).dot(nu);
                    w += l;
                }
                let lower = c.period().canonical() == c.period();
                items.push(((s / w).rem_euclid(spacing), lower, i));
            }
            items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let start = items
                .iter()
                .position(|it| it.1)
                .ok_or_else(|| CatalogError::Overlap("no lower strip boundary".into()))?;
            items.rotate_left(start);
            let mut bands = Vec::new();
            let mut mismatch = Vec::new();
            for pair in items.chunks(2) {
                if pair.len() != 2 || !pair[0].1 || pair[1].1 {
                    return Err(CatalogError::Overlap(
                        "strip boundaries do not alternate lower/upper".into(),
                    ));
                }
                let cl = &region.curves()[pair[0].2];
                let cu = &region.curves()[pair[1].2];
                let a = RegionBoundary::new(vec![cl.clone(), cu.clone()])?.area();
                let width = a / v.length();
                let lo = pair[0].0;
                let hi = lo + (pair[1].0 - lo).rem_euclid(spacing);
                let mid = 0.5 * (lo + hi);
                bands.push(StripBand {
                    offset: mid - 0.5 * width,
                    width,
                });
                mismatch.push(0.0);
            }
            let mut cfg = ReferenceConfig::strips(v, bands)?;
            cfg.area_mismatch = mismatch;
            Ok(cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{classify, enumerate_catalog, DEFAULT_EPSILON0};

    fn reference_of(e: &RegionBoundary) -> ReferenceConfig {
        let cat = enumerate_catalog(e.area(), 6.0).unwrap();
        let res = classify(e, DEFAULT_EPSILON0, &cat).unwrap();
        build_reference(&res, e).unwrap()
    }

    #[test]
    fn wavy_strip_reference() {
        let e = shapes::perturbed_strip(0.2, 0.5, 0.005, 1, 512).unwrap();
        let r = reference_of(&e);
        assert_eq!(r.kind, ReferenceKind::Strips);
        assert_eq!(r.period, Some(PeriodVector::new(1, 0)));
        assert_eq!(r.count, 1);
        assert!((r.strips[0].width - 0.3).abs() < 1e-12);
        assert!((r.strips[0].offset - 0.2).abs() < 1e-3);
        assert!((r.area() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn equal_disks_reference() {
        let r0 = (0.1 / PI).sqrt();
        let e = shapes::disks(&[Vec2::new(0.25, 0.25), Vec2::new(0.75, 0.75)], r0, 1024).unwrap();
        let r = reference_of(&e);
        assert_eq!(r.kind, ReferenceKind::Disks);
        assert!((r.radius.unwrap() - (e.area() / 2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((r.radius.unwrap() - r0).abs() < 1e-5);
        assert!(torus_distance(r.centers[0], TorusPoint::new(0.25, 0.25)) < 1e-12);
    }

    #[test]
    fn unequal_disks_get_equal_radii() {
        let (r1, r2) = ((0.08 / PI).sqrt(), (0.12 / PI).sqrt());
        let c1 = shapes::circle(Vec2::new(0.25, 0.25), r1, 1024);
        let c2 = shapes::circle(Vec2::new(0.75, 0.75), r2, 1024);
        let e = RegionBoundary::new(vec![c1, c2]).unwrap();
        let res = ClassificationResult {
            verdict: Verdict::Disks { count: 2 },
            ..classify(&e, 10.0, &enumerate_catalog(e.area(), 6.0).unwrap()).unwrap()
        };
        let r = build_reference(&res, &e).unwrap();
        assert!((r.radius.unwrap() - (0.1 / PI).sqrt()).abs() < 1e-5);
        assert!((r.area_mismatch[0] + 0.02).abs() < 1e-4);
        assert!((r.area_mismatch[1] - 0.02).abs() < 1e-4);
    }

    #[test]
    fn hole_reference() {
        let e = shapes::complement_disk(Vec2::new(0.4, 0.6), 0.15, 512).unwrap();
        let r = reference_of(&e);
        assert_eq!(r.kind, ReferenceKind::ComplementDisks);
        assert!(torus_distance(r.centers[0], TorusPoint::new(0.4, 0.6)) < 1e-12);
        assert!(!r.contains(Vec2::new(0.4, 0.6)));
        assert!(r.contains(Vec2::new(0.9, 0.1)));
    }

    #[test]
    fn overlapping_disks_rejected() {
        let c = vec![TorusPoint::new(0.1, 0.1), TorusPoint::new(0.3, 0.1)];
        assert!(matches!(ReferenceConfig::disks(c, 0.15), Err(CatalogError::Overlap(_))));
        let s = vec![StripBand { offset: 0.1, width: 0.5 }, StripBand { offset: 0.5, width: 0.2 }];
        assert!(ReferenceConfig::strips(PeriodVector::new(1, 0), s).is_err());
    }

    #[test]
    fn slanted_strip_distances() {
        let r = ReferenceConfig::strips(
            PeriodVector::new(1, 1),
            vec![StripBand { offset: 0.1, width: 0.2 }],
        )
        .unwrap();
        let poly = r.to_region(64).unwrap();
        assert!((poly.area() - r.area()).abs() < 1e-12);
        assert!((poly.perimeter() - r.perimeter()).abs() < 1e-12);
        let o = crate::geometry::DistanceOracle::new(&poly);
        for k in 0..100 {
            let p = Vec2::new((k as f64 * 0.618).fract(), (k as f64 * 0.377).fract());
            assert!((o.signed_distance(p) - r.signed_distance(p)).abs() < 1e-12);
        }
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DistanceOracle, GeometryError, RegionBoundary, Vec2};
use crate::catalog::ReferenceConfig;

/// Area of `{x : sd_E(x) ≤ r}` on an `n × n` grid.
///
/// Each cell contributes the fraction of a straight level line crossing it
/// at the distance measured at its center, which is exact for axis-aligned
/// boundaries and second-order accurate otherwise.
pub fn neighborhood_area(region: &RegionBoundary, r: f64, n: usize) -> Result<f64, GeometryError> {
    if !(r >= 0.0 && r < 0.5) {
        return Err(GeometryError::InvalidArgument(format!(
            "neighborhood radius {r} outside [0, 1/2)"
        )));
    }
    if n == 0 {
        return Err(GeometryError::InvalidArgument("grid size 0".into()));
    }
    if region.curves().is_empty() {
        return Ok(region.area());
    }
    let oracle = DistanceOracle::new(region);
    let h = 1.0 / n as f64;
    let band = r + 2.0 * h;
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = (j as f64 + 0.5) * h;
            (0..n)
                .map(|i| {
                    let p = Vec2::new((i as f64 + 0.5) * h, y);
                    let sd = oracle.signed_distance_clamped(p, band);
                    (0.5 + (r - sd) / h).clamp(0.0, 1.0)
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total * h * h)
}

/// Largest observed `ℋ¹(∂E ∩ D_ρ(x)) / ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub max_ratio: f64,
    pub center: Vec2,
    pub radius: f64,
    pub centers_sampled: usize,
    pub radii: Vec<f64>,
}

/// Boundary density ratio over a `samples × samples` grid of centers and
/// dyadic radii `1/2, 1/4, …` down to `4/n`. Lengths inside each disk are
/// computed exactly by clipping every segment image against the circle.
pub fn density_ratio(
    region: &RegionBoundary,
    samples: usize,
    n: usize,
) -> Result<DensityReport, GeometryError> {
    if samples == 0 {
        return Err(GeometryError::InvalidArgument(
            "density ratio needs at least one sample center".into(),
        ));
    }
    let min_radius = 4.0 / n as f64;
    let mut radii = Vec::new();
    let mut rho = 0.5;
    while rho >= min_radius - 1e-15 {
        radii.push(rho);
        rho *= 0.5;
    }
    if radii.is_empty() {
        return Err(GeometryError::InvalidArgument(format!(
            "grid size {n} leaves no admissible radius"
        )));
    }
    let mut segs = Vec::with_capacity(region.vertex_count());
    for c in region.curves() {
        for i in 0..c.len() {
            let (a, b) = c.edge(i);
            segs.push((a, b));
        }
    }
    let hs = 1.0 / samples as f64;
    let best = (0..samples * samples)
        .into_par_iter()
        .map(|k| {
            let center = Vec2::new(
                ((k % samples) as f64 + 0.5) * hs,
                ((k / samples) as f64 + 0.5) * hs,
            );
            let mut best = (0.0f64, center, radii[0], k);
            for &rho in &radii {
                let len: f64 = segs
                    .iter()
                    .map(|&(a, b)| periodic_length_in_disk(a, b, center, rho))
                    .sum();
                if len / rho > best.0 {
                    best = (len / rho, center, rho, k);
                }
            }
            best
        })
        // ties go to the lowest center index so the result is reproducible
        .reduce(
            || (0.0, Vec2::ZERO, radii[0], usize::MAX),
            |x, y| if y.0 > x.0 || (y.0 == x.0 && y.3 < x.3) { y } else { x },
        );
    Ok(DensityReport {
        max_ratio: best.0,
        center: best.1,
        radius: best.2,
        centers_sampled: samples * samples,
        radii,
    })
}

/// Length of the part of the segment `ab` (all periodic images) within
/// distance `rho ≤ 1/2` of `c`. For such radii the planar disks around the
/// lattice images of `c` have disjoint interiors, so summing is exact.
pub(crate) fn periodic_length_in_disk(a: Vec2, b: Vec2, c: Vec2, rho: f64) -> f64 {
    let m = (a + b) * 0.5;
    let base = Vec2::new((c.x - m.x).round(), (c.y - m.y).round());
    let mut total = 0.0;
    for i in -1..=1 {
        for j in -1..=1 {
            let s = base + Vec2::new(i as f64, j as f64);
            total += segment_length_in_disk(a + s, b + s, c, rho);
        }
    }
    total
}

fn segment_length_in_disk(a: Vec2, b: Vec2, c: Vec2, rho: f64) -> f64 {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sq();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - rho * rho;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 || qa == 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * qa.sqrt()
    }
}

/// `sup { dist(x, ∂E_ref) : x ∈ E Δ E_ref }`, sampled on densified boundary
/// vertices of `E` and on the centers of an `n × n` grid.
pub fn hausdorff_gap(region: &RegionBoundary, reference: &ReferenceConfig, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut worst = 0.0f64;
    for c in region.curves() {
        for i in 0..c.len() {
            let (a, b) = c.edge(i);
            let pieces = ((b - a).norm() / h).ceil().max(1.0) as usize;
            for s in 0..pieces {
                let p = a + (b - a) * (s as f64 / pieces as f64);
                worst = worst.max(reference.boundary_distance(p));
            }
        }
    }
    let oracle = DistanceOracle::new(region);
    let grid_worst = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = (j as f64 + 0.5) * h;
            let mut w = 0.0f64;
            for i in 0..n {
                let p = Vec2::new((i as f64 + 0.5) * h, y);
                if oracle.contains(p) != reference.contains(p) {
                    w = w.max(reference.boundary_distance(p));
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    worst.max(grid_worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use std::f64::consts::PI;

    #[test]
    fn disk_neighborhood() {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.2, 1024).unwrap();
        let a = neighborhood_area(&e, 0.05, 512).unwrap();
        assert!((a - PI * 0.0625).abs() < 1e-3, "{a}");
    }

    #[test]
    fn strip_neighborhood() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let a = neighborhood_area(&e, 0.05, 256).unwrap();
        assert!((a - 0.4).abs() < 1e-12, "{a}");
        let a0 = neighborhood_area(&e, 0.0, 256).unwrap();
        assert!((a0 - 0.3).abs() < 1e-12, "{a0}");
    }

    #[test]
    fn segment_clipping() {
        let c = Vec2::new(0.5, 0.5);
        let l = segment_length_in_disk(Vec2::new(0.0, 0.5), Vec2::new(1.0, 0.5), c, 0.2);
        assert!((l - 0.4).abs() < 1e-14);
        let l = segment_length_in_disk(Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.5), c, 0.2);
        assert!((l - 0.2).abs() < 1e-14);
        let l = segment_length_in_disk(Vec2::new(0.0, 0.9), Vec2::new(1.0, 0.9), c, 0.2);
        assert_eq!(l, 0.0);
        // periodic image across the seam
        let l = periodic_length_in_disk(Vec2::new(0.0, 0.05), Vec2::new(1.0, 0.05), Vec2::new(0.5, 0.95), 0.2);
        assert!((l - 2.0 * (0.04f64 - 0.01).sqrt()).abs() < 1e-14);
    }

    /// Analytic oracle for a horizontal strip: chords of the two lines.
    fn strip_density(lo: f64, hi: f64, samples: usize, radii: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for j in 0..samples {
            let y = (j as f64 + 0.5) / samples as f64;
            for &rho in radii {
                let mut len = 0.0;
                for line in [lo, hi] {
                    for k in -1..=1 {
                        let d = (line + k as f64 - y).abs();
                        if d < rho {
                            len += 2.0 * (rho * rho - d * d).sqrt();
                        }
                    }
                }
                best = best.max(len / rho);
            }
        }
        best
    }

    #[test]
    fn strip_density_matches_chords() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let rep = density_ratio(&e, 8, 256).unwrap();
        let oracle = strip_density(0.2, 0.5, 8, &rep.radii);
        assert!((rep.max_ratio - oracle).abs() < 1e-12);
        assert!(rep.max_ratio <= 4.0 + 1e-12);
        assert!(density_ratio(&e, 0, 256).is_err());
    }

    #[test]
    fn circle_density_is_bounded() {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.25, 512).unwrap();
        let rep = density_ratio(&e, 8, 256).unwrap();
        let p = e.perimeter();
        assert!(rep.max_ratio.is_finite());
        for &rho in &rep.radii {
            assert!(rep.max_ratio >= 0.0 && (rep.radius != rho || rep.max_ratio <= p / rho + 1e-12));
        }
    }
}

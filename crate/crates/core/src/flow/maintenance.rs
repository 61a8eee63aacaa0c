//! Shared machinery of the steppers: normal-offset frames, area projection,
//! topology checks and vertex spacing.

use super::FlowError;
use crate::geometry::{ClosedCurve, DistanceOracle, PeriodVector, RegionBoundary, Vec2};

/// Vertices and outward normals of `E_k`, fixed during one step.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub base: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub period: PeriodVector,
}

impl Frame {
    pub fn of(region: &RegionBoundary) -> Vec<Frame> {
        region
            .curves()
            .iter()
            .map(|c| Frame {
                base: c.vertices().to_vec(),
                normals: c.vertex_normals(),
                period: c.period(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn positions(&self, psi: &[f64]) -> Vec<Vec2> {
        self.base
            .iter()
            .zip(&self.normals)
            .zip(psi)
            .map(|((&p, &nu), &s)| p + nu * s)
            .collect()
    }
}

/// Offsets stored per curve.
pub(crate) type Offsets = Vec<Vec<f64>>;

pub(crate) fn zero_offsets(frames: &[Frame]) -> Offsets {
    frames.iter().map(|f| vec![0.0; f.len()]).collect()
}

pub(crate) fn build_region(frames: &[Frame], psi: &Offsets) -> Result<RegionBoundary, FlowError> {
    let curves = frames
        .iter()
        .zip(psi)
        .map(|(f, s)| ClosedCurve::from_raw(f.positions(s), f.period))
        .collect();
    Ok(RegionBoundary::from_oriented(curves)?)
}

/// Lifted neighbor positions `(q[i-1], q[i+1])` of a closed lifted polygon.
#[inline]
pub(crate) fn neighbors(q: &[Vec2], period: Vec2, i: usize) -> (Vec2, Vec2) {
    let n = q.len();
    let prev = if i == 0 { q[n - 1] - period } else { q[i - 1] };
    let next = if i + 1 == n { q[0] + period } else { q[i + 1] };
    (prev, next)
}

/// Turning angle at `b` over the mean adjacent edge length.
#[inline]
pub(crate) fn local_curvature(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let e0 = b - a;
    let e1 = c - b;
    let angle = e0.cross(e1).atan2(e0.dot(e1));
    angle / (0.5 * (e0.norm() + e1.norm()))
}

/// Curvature and dual length at every vertex of a lifted polygon.
pub(crate) fn curvature_and_weights(q: &[Vec2], period: Vec2) -> (Vec<f64>, Vec<f64>) {
    (0..q.len())
        .map(|i| {
            let (a, c) = neighbors(q, period, i);
            let b = q[i];
            (local_curvature(a, b, c), 0.5 * ((b - a).norm() + (c - b).norm()))
        })
        .unzip()
}

/// `∂(area)/∂ψ_i`: the normal times half the rotated neighbor chord.
pub(crate) fn area_gradient(q: &[Vec2], normals: &[Vec2], period: Vec2) -> Vec<f64> {
    (0..q.len())
        .map(|i| {
            let (a, c) = neighbors(q, period, i);
            normals[i].dot((c - a).perp_right()) * 0.5
        })
        .collect()
}

/// Adds a common offset to every vertex so that the area equals `target`
/// to round-off. Returns the rebuilt region.
pub(crate) fn shift_to_area(
    frames: &[Frame],
    psi: &mut Offsets,
    target: f64,
) -> Result<RegionBoundary, FlowError> {
    let mut region = build_region(frames, psi)?;
    for _ in 0..12 {
        let diff = region.area() - target;
        if diff.abs() <= 1e-15 {
            break;
        }
        let slope: f64 = frames
            .iter()
            .zip(psi.iter())
            .map(|(f, s)| {
                let q = f.positions(s);
                area_gradient(&q, &f.normals, f.period.as_vec()).iter().sum::<f64>()
            })
            .sum();
        if !(slope.abs() > 0.0) {
            break;
        }
        let c = -diff / slope;
        psi.iter_mut().flatten().for_each(|v| *v += c);
        let next = build_region(frames, psi)?;
        let improved = (next.area() - target).abs() < diff.abs();
        region = next;
        if !improved {
            break;
        }
    }
    Ok(region)
}

/// Region moved along its own vertex normals by a uniform amount so that its
/// area equals `target`.
pub fn project_area(region: &RegionBoundary, target: f64) -> Result<RegionBoundary, FlowError> {
    if region.curves().is_empty() {
        return Ok(region.clone());
    }
    let frames = Frame::of(region);
    let mut psi = zero_offsets(&frames);
    shift_to_area(&frames, &mut psi, target)
}

/// Smallest distance between two segments in the plane.
fn segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let point_seg = |p: Vec2, s: Vec2, e: Vec2| {
        let v = e - s;
        let t = ((p - s).dot(v) / v.norm_sq()).clamp(0.0, 1.0);
        (p - (s + v * t)).norm()
    };
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_seg(a, c, d)
        .min(point_seg(b, c, d))
        .min(point_seg(c, a, b))
        .min(point_seg(d, a, b))
}

/// Fails when two boundary pieces that are not neighbors along a curve come
/// within `threshold` of each other, which includes any crossing.
pub fn topology_check(region: &RegionBoundary, threshold: f64) -> Result<(), FlowError> {
    let oracle = DistanceOracle::new(region);
    let curves = region.curves();
    // arclength of the start of every edge
    let starts: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            c.edge_lengths()
                .iter()
                .map(|l| {
                    let s = acc;
                    acc += l;
                    s
                })
                .collect()
        })
        .collect();
    for (ci, c) in curves.iter().enumerate() {
        let total = c.perimeter();
        for e in 0..c.len() {
            let (a, b) = c.edge(e);
            let mid = (a + b) * 0.5;
            let half = 0.5 * (b - a).norm();
            for hit in oracle.segments_within(mid, half + threshold) {
                if hit.curve == ci {
                    let gap = (starts[ci][hit.segment] - starts[ci][e]).abs();
                    let gap = gap.min(total - gap);
                    if gap < 3.0 * threshold + 2.0 * half + c.edge_vector(hit.segment).norm() {
                        continue;
                    }
                }
                let (p, q) = curves[hit.curve].edge(hit.segment);
                let shift = Vec2::new(
                    (mid.x - 0.5 * (p.x + q.x)).round(),
                    (mid.y - 0.5 * (p.y + q.y)).round(),
                );
                let d = segment_distance(a, b, p + shift, q + shift);
                if d < threshold {
                    return Err(FlowError::Topology {
                        distance: d,
                        threshold,
                        curves: (ci, hit.curve),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Resamples every curve whose edge lengths left `[0.5, 2] × spacing`.
/// Returns `None` when nothing needed doing.
pub(crate) fn maintain_spacing(
    region: &RegionBoundary,
    spacing: f64,
) -> Result<Option<RegionBoundary>, FlowError> {
    let mut changed = false;
    let mut curves = Vec::with_capacity(region.curves().len());
    for c in region.curves() {
        let lengths = c.edge_lengths();
        let lo = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = lengths.iter().cloned().fold(0.0, f64::max);
        if lo < 0.5 * spacing || hi > 2.0 * spacing {
            let n = ((c.perimeter() / spacing).round() as usize).max(crate::geometry::MIN_VERTICES);
            curves.push(c.resample(n)?);
            changed = true;
        } else {
            curves.push(c.clone());
        }
    }
    if !changed {
        return Ok(None);
    }
    Ok(Some(RegionBoundary::from_oriented(curves)?))
}

/// Topology check, then spacing repair with area re-projection.
pub(crate) fn finish_step(
    region: RegionBoundary,
    spacing: f64,
    area: f64,
    threshold: f64,
) -> Result<RegionBoundary, FlowError> {
    topology_check(&region, threshold)?;
    match maintain_spacing(&region, spacing)? {
        None => Ok(region),
        Some(r) => project_area(&r, area),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn area_projection_is_exact() {
        let e = shapes::disk(Vec2::new(0.3, 0.6), 0.2, 400).unwrap();
        let p = project_area(&e, 0.13).unwrap();
        assert!((p.area() - 0.13).abs() < 1e-14);
        let s = shapes::perturbed_strip(0.2, 0.5, 0.03, 2, 300).unwrap();
        let p = project_area(&s, 0.25).unwrap();
        assert!((p.area() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn area_gradient_matches_finite_differences() {
        let e = shapes::perturbed_disk(Vec2::new(0.5, 0.5), 0.2, 0.02, 3, 64).unwrap();
        let frames = Frame::of(&e);
        let f = &frames[0];
        let psi0 = vec![0.0; f.len()];
        let g = area_gradient(&f.positions(&psi0), &f.normals, f.period.as_vec());
        for i in [0usize, 7, 31] {
            let mut plus = zero_offsets(&frames);
            plus[0][i] = 1e-6;
            let mut minus = zero_offsets(&frames);
            minus[0][i] = -1e-6;
            let fd = (build_region(&frames, &plus).unwrap().area()
                - build_region(&frames, &minus).unwrap().area())
                / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8, "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn topology_detects_close_disks() {
        let far = shapes::disks(&[Vec2::new(0.25, 0.5), Vec2::new(0.75, 0.5)], 0.15, 400).unwrap();
        assert!(topology_check(&far, 0.01).is_ok());
        let near = shapes::disks(&[Vec2::new(0.3, 0.5), Vec2::new(0.605, 0.5)], 0.15, 400).unwrap();
        assert!(matches!(
            topology_check(&near, 0.01),
            Err(FlowError::Topology { curves: (0, 1), .. }) | Err(FlowError::Topology { curves: (1, 0), .. })
        ));
        // a disk touching its own periodic image
        let wrap = shapes::disk(Vec2::new(0.5, 0.5), 0.497, 2000).unwrap();
        assert!(topology_check(&wrap, 0.01).is_err());
        let strip = shapes::strip(0.2, 0.5, 300).unwrap();
        assert!(topology_check(&strip, 0.01).is_ok());
    }

    #[test]
    fn spacing_repair() {
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.2, 400).unwrap();
        let spacing = e.perimeter() / 400.0;
        assert!(maintain_spacing(&e, spacing).unwrap().is_none());
        let r = maintain_spacing(&e, spacing / 3.0).unwrap().unwrap();
        assert_eq!(r.curves()[0].len(), 1200);
    }
}

//! Generators for the test and benchmark shapes used throughout the crate.

use std::f64::consts::PI;

use super::{ClosedCurve, GeometryError, PeriodVector, RegionBoundary, Vec2};

/// Counter-clockwise regular `n`-gon inscribed in the circle.
pub fn circle(center: Vec2, r: f64, n: usize) -> ClosedCurve {
    polar_curve(center, n, |_| r)
}

/// Counter-clockwise polygon through `center + ρ(θ)(cos θ, sin θ)` at equally
/// spaced angles.
pub fn polar_curve(center: Vec2, n: usize, radius: impl Fn(f64) -> f64) -> ClosedCurve {
    let v = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let r = radius(t);
            center + Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect();
    ClosedCurve::from_raw(v, PeriodVector::ZERO)
}

/// Graph `y = base + f(x)` over one period. With `region_above` the curve
/// runs in `+x` (period `(1,0)`), otherwise in `-x` (period `(-1,0)`).
pub fn graph_curve(f: impl Fn(f64) -> f64, base: f64, n: usize, region_above: bool) -> ClosedCurve {
    let v = (0..n)
        .map(|i| {
            let x = if region_above {
                i as f64 / n as f64
            } else {
                1.0 - i as f64 / n as f64
            };
            Vec2::new(x, base + f(x))
        })
        .collect();
    let period = if region_above {
        PeriodVector::new(1, 0)
    } else {
        PeriodVector::new(-1, 0)
    };
    ClosedCurve::from_raw(v, period)
}

pub fn disk(center: Vec2, r: f64, n: usize) -> Result<RegionBoundary, GeometryError> {
    RegionBoundary::new(vec![checked(circle(center, r, n))?])
}

/// Equal disks; the caller is responsible for keeping them disjoint.
pub fn disks(centers: &[Vec2], r: f64, n: usize) -> Result<RegionBoundary, GeometryError> {
    let curves = centers
        .iter()
        .map(|&c| checked(circle(c, r, n)))
        .collect::<Result<Vec<_>, _>>()?;
    RegionBoundary::new(curves)
}

/// Torus minus a disk.
pub fn complement_disk(center: Vec2, r: f64, n: usize) -> Result<RegionBoundary, GeometryError> {
    Ok(disk(center, r, n)?.complement())
}

/// Horizontal strip `lo < y < hi`.
pub fn strip(lo: f64, hi: f64, n: usize) -> Result<RegionBoundary, GeometryError> {
    perturbed_strip(lo, hi, 0.0, 1, n)
}

/// Wavy strip between `lo + ε sin(2πkx)` and `hi + ε sin(2πkx)`. Both
/// boundaries carry the same perturbation, so the area stays `hi - lo`.
pub fn perturbed_strip(
    lo: f64,
    hi: f64,
    eps: f64,
    mode: u32,
    n: usize,
) -> Result<RegionBoundary, GeometryError> {
    let f = move |x: f64| eps * (2.0 * PI * mode as f64 * x).sin();
    RegionBoundary::new(vec![
        checked(graph_curve(f, lo, n, true))?,
        checked(graph_curve(f, hi, n, false))?,
    ])
}

/// Straight strip along the primitive direction `period`, bounded by the two
/// closed geodesics through `origin` and `origin + width · ν`, where `ν` is
/// the unit normal to the left of `period`.
pub fn slanted_strip(
    period: PeriodVector,
    origin: Vec2,
    width: f64,
    n: usize,
) -> Result<RegionBoundary, GeometryError> {
    if period.is_zero() || period.gcd() != 1 {
        return Err(GeometryError::InvalidArgument(format!(
            "strip direction ({}, {}) is not primitive",
            period.n1, period.n2
        )));
    }
    let v = period.as_vec();
    let nu = v.normalized().perp_left();
    let lower: Vec<Vec2> = (0..n).map(|i| origin + v * (i as f64 / n as f64)).collect();
    let top = origin + nu * width + v;
    let upper: Vec<Vec2> = (0..n).map(|i| top - v * (i as f64 / n as f64)).collect();
    RegionBoundary::new(vec![
        ClosedCurve::positive(lower, period)?,
        ClosedCurve::positive(upper, -period)?,
    ])
}

/// Polar graph `r + ε cos(kθ)` around `center`.
pub fn perturbed_disk(
    center: Vec2,
    r: f64,
    eps: f64,
    mode: u32,
    n: usize,
) -> Result<RegionBoundary, GeometryError> {
    let c = polar_curve(center, n, move |t| r + eps * (mode as f64 * t).cos());
    RegionBoundary::new(vec![checked(c)?])
}

/// Axis-aligned ellipse with semi-axes `a` (along x) and `b`, sampled at
/// equally spaced parameter values.
pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> Result<RegionBoundary, GeometryError> {
    let v = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            center + Vec2::new(a * t.cos(), b * t.sin())
        })
        .collect();
    RegionBoundary::new(vec![ClosedCurve::positive(v, PeriodVector::ZERO)?])
}

fn checked(c: ClosedCurve) -> Result<ClosedCurve, GeometryError> {
    ClosedCurve::new(c.vertices().to_vec(), c.period(), 1)
}

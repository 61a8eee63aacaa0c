use serde::{Deserialize, Serialize};

use super::{ClosedCurve, GeometryError, RegionBoundary, MIN_VERTICES};

/// Per-vertex discrete curvature of one curve or of a whole boundary.
///
/// For a region, the vertices of all curves are concatenated in order and
/// `starts[i]` is the index of the first vertex of curve `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub kappa: Vec<f64>,
    pub weights: Vec<f64>,
    pub mean: f64,
    pub deviation_l2_sq: f64,
    pub starts: Vec<usize>,
}

impl CurvatureProfile {
    fn from_parts(kappa: Vec<f64>, weights: Vec<f64>, starts: Vec<usize>) -> Self {
        let total: f64 = weights.iter().sum();
        let mean = if total > 0.0 {
            kappa.iter().zip(&weights).map(|(k, w)| k * w).sum::<f64>() / total
        } else {
            0.0
        };
        let deviation_l2_sq = kappa
            .iter()
            .zip(&weights)
            .map(|(k, w)| w * (k - mean) * (k - mean))
            .sum();
        CurvatureProfile {
            kappa,
            weights,
            mean,
            deviation_l2_sq,
            starts,
        }
    }

    /// Slice of curvatures belonging to curve `i`.
    pub fn component(&self, i: usize) -> &[f64] {
        let end = self.starts.get(i + 1).copied().unwrap_or(self.kappa.len());
        &self.kappa[self.starts[i]..end]
    }

    pub fn max_abs(&self) -> f64 {
        self.kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Turning angle at each vertex divided by the mean of the two adjacent
/// edge lengths. Positive where the curve bends towards the enclosed set.
pub(crate) fn vertex_curvatures(curve: &ClosedCurve) -> (Vec<f64>, Vec<f64>) {
    let angles = curve.turning_angles();
    let dual = curve.dual_lengths();
    let kappa = angles.iter().zip(&dual).map(|(a, d)| a / d).collect();
    (kappa, dual)
}

pub fn curvature_profile(curve: &ClosedCurve) -> Result<CurvatureProfile, GeometryError> {
    if curve.len() < MIN_VERTICES {
        return Err(GeometryError::TooFewVertices {
            found: curve.len(),
            required: MIN_VERTICES,
        });
    }
    let oriented = curve.region_oriented();
    let (kappa, weights) = vertex_curvatures(&oriented);
    Ok(CurvatureProfile::from_parts(kappa, weights, vec![0]))
}

/// Profile of the whole boundary; the mean and deviation pool every curve.
pub fn region_curvature_profile(region: &RegionBoundary) -> Result<CurvatureProfile, GeometryError> {
    let mut kappa = Vec::with_capacity(region.vertex_count());
    let mut weights = Vec::with_capacity(region.vertex_count());
    let mut starts = Vec::with_capacity(region.component_count());
    for c in region.curves() {
        if c.len() < MIN_VERTICES {
            return Err(GeometryError::TooFewVertices {
                found: c.len(),
                required: MIN_VERTICES,
            });
        }
        starts.push(kappa.len());
        let (k, w) = vertex_curvatures(c);
        kappa.extend(k);
        weights.extend(w);
    }
    Ok(CurvatureProfile::from_parts(kappa, weights, starts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shapes, Vec2};
    use std::f64::consts::PI;

    /// `∫ (κ - κ̄)² ds` for the polar graph `r(θ) = r0 + a cos(kθ)` by
    /// composite Simpson quadrature of the analytic curvature.
    fn polar_deviation(r0: f64, a: f64, k: f64) -> f64 {
        let n = 20000;
        let f = |t: f64| {
            let r = r0 + a * (k * t).cos();
            let r1 = -a * k * (k * t).sin();
            let r2 = -a * k * k * (k * t).cos();
            let speed = (r * r + r1 * r1).sqrt();
            let kap = (r * r + 2.0 * r1 * r1 - r * r2) / speed.powi(3);
            (kap, speed)
        };
        let simpson = |g: &dyn Fn(f64) -> f64| {
            let hstep = 2.0 * PI / n as f64;
            let mut s = g(0.0) + g(2.0 * PI);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * g(i as f64 * hstep);
            }
            s * hstep / 3.0
        };
        let len = simpson(&|t| f(t).1);
        let mean = simpson(&|t| f(t).0 * f(t).1) / len;
        simpson(&|t| {
            let (kap, sp) = f(t);
            (kap - mean).powi(2) * sp
        })
    }

    #[test]
    fn circle_curvature() {
        let c = shapes::circle(Vec2::new(0.5, 0.5), 0.25, 512);
        let p = curvature_profile(&c).unwrap();
        for k in &p.kappa {
            assert!((k - 4.0).abs() < 1e-3);
        }
        assert!(p.deviation_l2_sq <= 1e-4);
        let r = curvature_profile(&c.reversed()).unwrap();
        assert!((r.mean - 4.0).abs() < 1e-3);
    }

    #[test]
    fn strip_curvature_vanishes() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let p = region_curvature_profile(&e).unwrap();
        assert!(p.max_abs() < 1e-12);
        assert!(p.mean.abs() < 1e-12);
        assert_eq!(p.starts, vec![0, 64]);
    }

    #[test]
    fn perturbed_circle_deviation_matches_quadrature() {
        let oracle = polar_deviation(0.25, 0.01, 3.0);
        let e = shapes::perturbed_disk(Vec2::new(0.5, 0.5), 0.25, 0.01, 3, 1024).unwrap();
        let p = region_curvature_profile(&e).unwrap();
        assert!(oracle > 0.0);
        assert!(((p.deviation_l2_sq - oracle) / oracle).abs() < 1e-2, "{} vs {}", p.deviation_l2_sq, oracle);
    }

    #[test]
    fn weighted_mean_is_consistent() {
        let e = shapes::perturbed_disk(Vec2::new(0.5, 0.5), 0.2, 0.02, 2, 128).unwrap();
        let p = region_curvature_profile(&e).unwrap();
        let tw: f64 = p.weights.iter().sum();
        assert!((tw - e.perimeter()).abs() < 1e-12);
        let kw: f64 = p.kappa.iter().zip(&p.weights).map(|(k, w)| k * w).sum();
        // turning angles telescope to the turning number
        assert!((kw - 2.0 * PI).abs() < 1e-9);
        assert!((p.mean - kw / tw).abs() < 1e-12);
    }

    #[test]
    fn wavy_strip_deviation_matches_quadrature() {
        // graph y = ε sin(2πkx): κ = y''/(1+y'²)^{3/2}, ds = √(1+y'²) dx, and
        // the mean over both boundaries is zero
        let (eps, k) = (0.02, 2.0);
        let w = 2.0 * PI * k;
        let g = |x: f64| {
            let d1 = eps * w * (w * x).cos();
            let d2 = -eps * w * w * (w * x).sin();
            d2 * d2 / (1.0 + d1 * d1).powf(2.5)
        };
        let n = 20000;
        let h = 1.0 / n as f64;
        let mut s = g(0.0) + g(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        let exact = 2.0 * s * h / 3.0;
        let e = shapes::perturbed_strip(0.2, 0.5, eps, 2, 512).unwrap();
        let p = region_curvature_profile(&e).unwrap();
        assert!(p.mean.abs() < 1e-12);
        assert!(((p.deviation_l2_sq - exact) / exact).abs() < 1e-2, "{} vs {exact}", p.deviation_l2_sq);
    }
}

use serde::{Deserialize, Serialize};

use super::{
    reference_perimeter, CatalogEntry, CatalogError, PerimeterCatalog, ReferenceKind,
};
use crate::geometry::{region_curvature_profile, ClosedCurve, PeriodVector, RegionBoundary, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Disks { count: usize },
    ComplementDisks { count: usize },
    Strips { count: usize, period: PeriodVector },
    Unclassified,
}

impl Verdict {
    pub fn kind(&self) -> Option<ReferenceKind> {
        match self {
            Verdict::Disks { .. } => Some(ReferenceKind::Disks),
            Verdict::ComplementDisks { .. } => Some(ReferenceKind::ComplementDisks),
            Verdict::Strips { .. } => Some(ReferenceKind::Strips),
            Verdict::Unclassified => None,
        }
    }

    pub fn count(&self) -> usize {
        match *self {
            Verdict::Disks { count }
            | Verdict::ComplementDisks { count }
            | Verdict::Strips { count, .. } => count,
            Verdict::Unclassified => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub deviation_l2_sq: f64,
    pub perimeter: f64,
    /// `P(E)` minus the perimeter of the matched configuration
    pub perimeter_gap: f64,
    /// largest `max|f| + max|f'|` over the height functions of the
    /// components above their fitted reference circle or line
    pub graph_norm: Option<f64>,
    /// configuration the set was matched to; for unclassified sets the
    /// catalog entry nearest in perimeter
    pub matched_entry: Option<CatalogEntry>,
    /// whether the matched configuration is an entry of the catalog (it may
    /// exceed the perimeter cap or fail the placement test)
    pub in_catalog: bool,
}

/// Quantitative stability check: the perimeter gap to the catalog against
/// the curvature deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub gap: f64,
    pub deviation: f64,
    pub ratio: f64,
}

/// Both gap and deviation below this count as an exact critical set.
const EXACT_TOL: f64 = 1e-12;
/// Largest gap tolerated at zero deviation.
const GAP_TOL: f64 = 1e-6;

pub fn perimeter_gap_bound_check(
    region: &RegionBoundary,
    catalog: &PerimeterCatalog,
) -> Result<GapCheck, CatalogError> {
    let deviation = region_curvature_profile(region)?.deviation_l2_sq;
    let p = region.perimeter();
    let gap = catalog
        .entries
        .iter()
        .map(|e| (p - e.perimeter).abs())
        .fold(f64::INFINITY, f64::min);
    if deviation <= EXACT_TOL {
        if gap > GAP_TOL {
            return Err(CatalogError::Contradiction { gap });
        }
        return Ok(GapCheck {
            gap,
            deviation,
            ratio: 0.0,
        });
    }
    Ok(GapCheck {
        gap,
        deviation,
        ratio: gap / deviation,
    })
}

pub fn classify(
    region: &RegionBoundary,
    epsilon0: f64,
    catalog: &PerimeterCatalog,
) -> Result<ClassificationResult, CatalogError> {
    let profile = region_curvature_profile(region)?;
    let deviation = profile.deviation_l2_sq;
    let perimeter = region.perimeter();
    if deviation > epsilon0 * epsilon0 || region.curves().is_empty() {
        let nearest = catalog.nearest(perimeter).copied();
        return Ok(ClassificationResult {
            verdict: Verdict::Unclassified,
            deviation_l2_sq: deviation,
            perimeter,
            perimeter_gap: nearest.map_or(f64::NAN, |e| perimeter - e.perimeter),
            graph_norm: None,
            matched_entry: nearest,
            in_catalog: nearest.is_some(),
        });
    }

    let classes = region
        .curves()
        .iter()
        .map(|c| c.winding_class())
        .collect::<Result<Vec<_>, _>>()?;
    if classes.iter().any(|&c| c != classes[0]) {
        return Err(CatalogError::MixedTurning(classes));
    }
    let count = region.curves().len();
    let m = region.area();
    let (verdict, graph_norm) = match classes[0] {
        1 => {
            let r = (m / (std::f64::consts::PI * count as f64)).sqrt();
            (Verdict::Disks { count }, disk_graph_norm(region.curves(), r))
        }
        -1 => {
            let r = ((1.0 - m) / (std::f64::consts::PI * count as f64)).sqrt();
            (
                Verdict::ComplementDisks { count },
                disk_graph_norm(region.curves(), r),
            )
        }
        _ => {
            let period = region.curves()[0].period().canonical();
            if region
                .curves()
                .iter()
                .any(|c| c.period().canonical() != period)
            {
                return Err(CatalogError::NonParallel(
                    region
                        .curves()
                        .iter()
                        .map(|c| (c.period().n1, c.period().n2))
                        .collect(),
                ));
            }
            let norm = region
                .curves()
                .iter()
                .map(|c| line_graph_norm(c, period))
                .fold(0.0, f64::max);
            (
                Verdict::Strips {
                    count: count / 2,
                    period,
                },
                norm,
            )
        }
    };
    let kind = verdict.kind().unwrap_or(ReferenceKind::Disks);
    let period = match verdict {
        Verdict::Strips { period, .. } => Some(period),
        _ => None,
    };
    let found = catalog.find(kind, verdict.count(), period).copied();
    let matched = found.unwrap_or(CatalogEntry {
        perimeter: reference_perimeter(kind, verdict.count(), period, m),
        kind,
        count: verdict.count(),
        period,
    });
    Ok(ClassificationResult {
        verdict,
        deviation_l2_sq: deviation,
        perimeter,
        perimeter_gap: perimeter - matched.perimeter,
        graph_norm: Some(graph_norm),
        matched_entry: Some(matched),
        in_catalog: found.is_some(),
    })
}

/// Weighted algebraic circle fit: minimises `Σ w (|p|² + D x + E y + F)²`.
fn fit_circle_center(c: &ClosedCurve) -> Vec2 {
    let w = c.dual_lengths();
    let o = c.vertex_mean();
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (p, &wi) in c.vertices().iter().zip(&w) {
        let q = *p - o;
        let row = [q.x, q.y, 1.0];
        let z = -(q.x * q.x + q.y * q.y);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += wi * row[i] * row[j];
            }
            rhs[i] += wi * row[i] * z;
        }
    }
    match solve3(a, rhs) {
        Some(s) => o + Vec2::new(-0.5 * s[0], -0.5 * s[1]),
        None => o,
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// `max|f| + max|f'|` of a height function sampled at the vertices, with
/// `f'` from centred differences against the tangential coordinate `s`.
fn c1_norm(f: &[f64], s: &[f64], period_len: f64) -> f64 {
    let n = f.len();
    let mut max_f = 0.0f64;
    let mut max_df = 0.0f64;
    for i in 0..n {
        max_f = max_f.max(f[i].abs());
        let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
        let mut ds = s[ip] - s[im];
        if i == 0 || i == n - 1 {
            ds = ds.rem_euclid(period_len);
        }
        if ds != 0.0 {
            max_df = max_df.max(((f[ip] - f[im]) / ds).abs());
        }
    }
    max_f + max_df
}

fn disk_graph_norm(curves: &[ClosedCurve], r: f64) -> f64 {
    curves
        .iter()
        .map(|c| {
            let center = fit_circle_center(c);
            let f: Vec<f64> = c.vertices().iter().map(|&p| (p - center).norm() - r).collect();
            // tangential coordinate: reference arclength r·θ, unwrapped
            let mut s = Vec::with_capacity(c.len());
            let mut acc = 0.0;
            let mut prev: Option<f64> = None;
            for &p in c.vertices() {
                let d = p - center;
                let th = d.y.atan2(d.x);
                if let Some(pt) = prev {
                    let mut dt = th - pt;
                    dt -= (dt / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
                    acc += dt;
                }
                prev = Some(th);
                s.push(r * acc);
            }
            let total = 2.0 * std::f64::consts::PI * r;
            c1_norm(&f, &s, total)
        })
        .fold(0.0, f64::max)
}

fn line_graph_norm(c: &ClosedCurve, period: PeriodVector) -> f64 {
    let t = period.as_vec().normalized();
    let nu = t.perp_left();
    let w = c.dual_lengths();
    let heights: Vec<f64> = c.vertices().iter().map(|p| p.dot(nu)).collect();
    let wsum: f64 = w.iter().sum();
    let mean = heights.iter().zip(&w).map(|(h, w)| h * w).sum::<f64>() / wsum;
    let f: Vec<f64> = heights.iter().map(|h| h - mean).collect();
    let s: Vec<f64> = c.vertices().iter().map(|p| p.dot(t)).collect();
    c1_norm(&f, &s, period.length())
}

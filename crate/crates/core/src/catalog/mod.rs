//! Critical-perimeter catalog and the near-critical set classifier.

mod classify;
mod reference;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{gcd, GeometryError, PeriodVector, TorusPoint, Vec2};

pub use classify::{classify, perimeter_gap_bound_check, ClassificationResult, GapCheck, Verdict};
pub use reference::{build_reference, ReferenceConfig, StripBand};

/// Default threshold on the curvature deviation (compared against its square).
pub const DEFAULT_EPSILON0: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("area {0} is not in (0, 1)")]
    InvalidArea(f64),
    #[error("perimeter cap {0} must be positive")]
    InvalidCap(f64),
    #[error("boundary components have different turning numbers {0:?}")]
    MixedTurning(Vec<i32>),
    #[error("boundary components are not parallel: periods {0:?}")]
    NonParallel(Vec<(i64, i64)>),
    #[error("cannot build a reference for an unclassified set")]
    Unclassified,
    #[error("reference components overlap: {0}")]
    Overlap(String),
    #[error("curvature deviation vanishes but the perimeter gap is {gap}")]
    Contradiction { gap: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Disks,
    ComplementDisks,
    Strips,
}

impl ReferenceKind {
    pub fn label(self) -> &'static str {
        match self {
            ReferenceKind::Disks => "disks",
            ReferenceKind::ComplementDisks => "cdisks",
            ReferenceKind::Strips => "strips",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub perimeter: f64,
    pub kind: ReferenceKind,
    pub count: usize,
    /// strip direction; `None` for disk configurations
    pub period: Option<PeriodVector>,
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let period = match self.period {
            Some(p) => format!("{},{}", p.n1, p.n2),
            None => "-".to_string(),
        };
        write!(
            f,
            "P={:.16e} kind={} count={} period={}",
            self.perimeter,
            self.kind.label(),
            self.count,
            period
        )
    }
}

/// Perimeters of all unions of equal disks, complements of equal disks and
/// parallel strips with total area `m` and perimeter at most `max_perimeter`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterCatalog {
    pub m: f64,
    pub max_perimeter: f64,
    pub entries: Vec<CatalogEntry>,
    /// disk counts whose placement attempt failed, with the reason
    pub dropped: Vec<String>,
}

/// Two perimeters closer than this are the same catalog value.
const VALUE_EPS: f64 = 1e-9;

/// Perimeter of `d` equal disks of total area `a`.
pub fn disk_perimeter(a: f64, d: usize) -> f64 {
    2.0 * (PI * a * d as f64).sqrt()
}

/// Centers of `d` equal disks on the lattice generated by `(1/d, s/d)`,
/// choosing the `s` with the largest minimal separation. Returns the centers
/// and that separation (including each center's own periodic images).
pub fn lattice_placement(d: usize) -> (Vec<Vec2>, f64) {
    let mut best: (Vec<Vec2>, f64) = (Vec::new(), -1.0);
    for s in 0..d.max(1) {
        let pts: Vec<Vec2> = (0..d)
            .map(|k| {
                Vec2::new(
                    (k as f64 / d as f64).fract(),
                    ((k * s) as f64 / d as f64).fract(),
                )
            })
            .collect();
        // the lattice is a group, so distances from the origin suffice
        let mut sep = 1.0f64;
        for p in pts.iter().skip(1) {
            sep = sep.min(p.wrap_centered().norm());
        }
        if sep > best.1 {
            best = (pts, sep);
        }
    }
    best
}

pub fn enumerate_catalog(m: f64, max_perimeter: f64) -> Result<PerimeterCatalog, CatalogError> {
    if !(m > 0.0 && m < 1.0) {
        return Err(CatalogError::InvalidArea(m));
    }
    if !(max_perimeter > 0.0) || !max_perimeter.is_finite() {
        return Err(CatalogError::InvalidCap(max_perimeter));
    }
    let cap = max_perimeter + VALUE_EPS;
    let mut entries = Vec::new();
    let mut dropped = Vec::new();

    for (kind, a) in [(ReferenceKind::Disks, m), (ReferenceKind::ComplementDisks, 1.0 - m)] {
        let mut d = 1;
        loop {
            let p = disk_perimeter(a, d);
            if p > cap {
                break;
            }
            let r = (a / (PI * d as f64)).sqrt();
            let (_, sep) = lattice_placement(d);
            if sep > 2.0 * r {
                entries.push(CatalogEntry {
                    perimeter: p,
                    kind,
                    count: d,
                    period: None,
                });
            } else {
                dropped.push(format!(
                    "{} d={d}: radius {r:.6} does not fit (lattice separation {sep:.6})",
                    kind.label()
                ));
            }
            d += 1;
        }
    }

    // one geodesic pair costs 2|(p,q)| ≤ M, so |p|, |q| ≤ M/2
    let bound = (max_perimeter / 2.0).floor() as i64;
    let mut directions: Vec<PeriodVector> = Vec::new();
    for p in 0..=bound {
        for q in -bound..=bound {
            let v = PeriodVector::new(p, q);
            if v.is_zero() || gcd(p, q) != 1 || v.canonical() != v {
                continue;
            }
            if 2.0 * v.length() <= cap {
                directions.push(v);
            }
        }
    }
    // among directions of equal length prefer larger p, then larger q
    directions.sort_by(|a, b| {
        (a.n1 * a.n1 + a.n2 * a.n2)
            .cmp(&(b.n1 * b.n1 + b.n2 * b.n2))
            .then(b.n1.cmp(&a.n1))
            .then(b.n2.cmp(&a.n2))
    });
    for v in directions {
        let mut l = 1;
        while 2.0 * l as f64 * v.length() <= cap {
            entries.push(CatalogEntry {
                perimeter: 2.0 * l as f64 * v.length(),
                kind: ReferenceKind::Strips,
                count: l,
                period: Some(v),
            });
            l += 1;
        }
    }

    // stable sort keeps the preferred representative first within a kind
    entries.sort_by(|a, b| {
        a.perimeter
            .partial_cmp(&b.perimeter)
            .unwrap()
            .then(a.kind.cmp(&b.kind))
    });
    let mut deduped: Vec<CatalogEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        let dup = deduped
            .iter()
            .any(|x| x.kind == e.kind && (x.perimeter - e.perimeter).abs() < VALUE_EPS);
        if !dup {
            deduped.push(e);
        }
    }
    Ok(PerimeterCatalog {
        m,
        max_perimeter,
        entries: deduped,
        dropped,
    })
}

impl PerimeterCatalog {
    /// Distinct perimeter values in increasing order.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for e in &self.entries {
            if v.last().map_or(true, |&l| e.perimeter - l >= VALUE_EPS) {
                v.push(e.perimeter);
            }
        }
        v
    }

    /// Half the smallest gap between distinct catalog values, or half the
    /// distance to the cap when there is a single value.
    pub fn delta0(&self) -> f64 {
        let v = self.values();
        let mut gap = f64::INFINITY;
        for w in v.windows(2) {
            gap = gap.min(w[1] - w[0]);
        }
        if !gap.is_finite() {
            gap = v.first().map_or(self.max_perimeter, |&p| self.max_perimeter - p);
        }
        0.5 * gap
    }

    /// Entry with the given shape, if present.
    pub fn find(
        &self,
        kind: ReferenceKind,
        count: usize,
        period: Option<PeriodVector>,
    ) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| {
            e.kind == kind
                && e.count == count
                && e.period.map(|p| p.canonical()) == period.map(|p| p.canonical())
        })
    }

    /// Smallest catalog value strictly above `p` (by more than the value
    /// tolerance).
    pub fn next_above(&self, p: f64) -> Option<f64> {
        self.values().into_iter().find(|&v| v > p + VALUE_EPS)
    }

    /// Entry minimising `|P(E) - P|`.
    pub fn nearest(&self, perimeter: f64) -> Option<&CatalogEntry> {
        self.entries.iter().min_by(|a, b| {
            (a.perimeter - perimeter)
                .abs()
                .partial_cmp(&(b.perimeter - perimeter).abs())
                .unwrap()
        })
    }

    /// One line per entry, in the export format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}

/// Perimeter of the canonical configuration of this shape with area `m`.
pub fn reference_perimeter(
    kind: ReferenceKind,
    count: usize,
    period: Option<PeriodVector>,
    m: f64,
) -> f64 {
    match kind {
        ReferenceKind::Disks => disk_perimeter(m, count),
        ReferenceKind::ComplementDisks => disk_perimeter(1.0 - m, count),
        ReferenceKind::Strips => 2.0 * count as f64 * period.map_or(1.0, |p| p.length()),
    }
}

pub(crate) fn torus_point(v: Vec2) -> TorusPoint {
    TorusPoint::from_lifted(v)
}

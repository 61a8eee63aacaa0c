//! Periodic cell-centered grids on the torus.

mod dissipation;
mod raster;
mod spectral;

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ClosedCurve, GeometryError, Vec2};

pub use dissipation::{mcf_dissipation, ms_dissipation, DissipationKind, DissipationReport};
pub use raster::rasterize;
pub use spectral::{dirichlet_energy, hm1_norm_sq, solve_poisson, PoissonSolution, SpectralSolver};

/// Smallest supported grid.
pub const MIN_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid size {0} must be a power of two and at least {MIN_GRID}")]
    InvalidGrid(usize),
    #[error("edge of length {length} exceeds two grid cells ({limit}); resample the curve")]
    UnderResolved { length: f64, limit: f64 },
    #[error("boundary crossings of the seam x = 0 do not alternate in direction")]
    SeamInconsistent,
    #[error("areas differ by {diff} (tolerance {tol})")]
    AreaMismatch { diff: f64, tol: f64 },
    #[error("grid sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("malformed grid dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `n × n` samples at the cell centers `((i + 1/2)/n, (j + 1/2)/n)`, stored
/// row-major with `j` (the y index) as the row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    n: usize,
    values: Vec<f64>,
    /// set by the Poisson solver, whose output has zero mean by construction
    pub mean_zero: bool,
}

pub(crate) fn check_grid(n: usize) -> Result<(), FieldError> {
    if n < MIN_GRID || !n.is_power_of_two() {
        return Err(FieldError::InvalidGrid(n));
    }
    Ok(())
}

impl GridField {
    pub fn zeros(n: usize) -> Result<Self, FieldError> {
        check_grid(n)?;
        Ok(GridField {
            n,
            values: vec![0.0; n * n],
            mean_zero: false,
        })
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self, FieldError> {
        check_grid(n)?;
        if values.len() != n * n {
            return Err(FieldError::Dump(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(GridField {
            n,
            values,
            mean_zero: false,
        })
    }

    /// Samples `f(x, y)` at the cell centers.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        check_grid(n)?;
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
        Ok(GridField {
            n,
            values,
            mean_zero: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// Value with periodic index wrapping.
    #[inline]
    pub fn get_wrapped(&self, i: i64, j: i64) -> f64 {
        let n = self.n as i64;
        self.values[(j.rem_euclid(n) * n + i.rem_euclid(n)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`, elementwise.
    pub fn difference(&self, other: &GridField) -> Result<GridField, FieldError> {
        if self.n != other.n {
            return Err(FieldError::SizeMismatch(self.n, other.n));
        }
        Ok(GridField {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            mean_zero: false,
        })
    }

    pub fn scaled(&self, s: f64) -> GridField {
        GridField {
            n: self.n,
            values: self.values.iter().map(|v| v * s).collect(),
            mean_zero: self.mean_zero,
        }
    }

    /// Cell-area-weighted `L¹` norm, `Σ |v| / n²`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / (self.n * self.n) as f64
    }

    /// Periodic tensor-product cubic Lagrange interpolation at `p`.
    pub fn interpolate(&self, p: Vec2) -> f64 {
        let n = self.n as f64;
        let u = p.x * n - 0.5;
        let v = p.y * n - 0.5;
        let (i0, tx) = (u.floor(), u - u.floor());
        let (j0, ty) = (v.floor(), v - v.floor());
        let wx = cubic_weights(tx);
        let wy = cubic_weights(ty);
        let (i0, j0) = (i0 as i64, j0 as i64);
        let mut s = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                row += wxa * self.get_wrapped(i0 - 1 + a as i64, j0 - 1 + b as i64);
            }
            s += wyb * row;
        }
        s
    }

    /// Text dump: header `grid <n>`, then one row of `n` values per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid {}", self.n);
        for j in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|i| format!("{:.16e}", self.get(i, j)))
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<GridField, FieldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| FieldError::Dump("empty input".into()))?;
        let n: usize = header
            .strip_prefix("grid ")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| FieldError::Dump(format!("bad header `{header}`")))?;
        let mut values = Vec::with_capacity(n * n);
        for l in lines {
            for tok in l.split_whitespace() {
                values.push(
                    tok.parse()
                        .map_err(|_| FieldError::Dump(format!("bad value `{tok}`")))?,
                );
            }
        }
        GridField::from_values(n, values)
    }
}

/// Lagrange weights for nodes `-1, 0, 1, 2` at offset `t ∈ [0,1)`.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Field values interpolated at every vertex of the curve.
pub fn sample_on_curve(field: &GridField, curve: &ClosedCurve) -> Vec<f64> {
    curve.vertices().iter().map(|&p| field.interpolate(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shapes, PeriodVector};
    use std::f64::consts::PI;

    #[test]
    fn grid_size_validation() {
        assert!(GridField::zeros(64).is_ok());
        assert_eq!(GridField::zeros(100), Err(FieldError::InvalidGrid(100)));
        assert_eq!(GridField::zeros(32), Err(FieldError::InvalidGrid(32)));
    }

    #[test]
    fn constant_field_samples() {
        let f = GridField::from_fn(64, |_, _| 2.5).unwrap();
        let c = shapes::circle(Vec2::new(0.3, 0.3), 0.2, 100);
        for v in sample_on_curve(&f, &c) {
            assert!((v - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn cosine_on_vertical_line() {
        let f = GridField::from_fn(256, |x, _| (2.0 * PI * x).cos()).unwrap();
        let v: Vec<Vec2> = (0..64).map(|k| Vec2::new(0.25, k as f64 / 64.0)).collect();
        let c = ClosedCurve::positive(v, PeriodVector::new(0, 1)).unwrap();
        for s in sample_on_curve(&f, &c) {
            assert!(s.abs() <= 1e-6);
        }
    }

    #[test]
    fn cosine_on_circle() {
        let f = GridField::from_fn(256, |x, _| (2.0 * PI * x).cos()).unwrap();
        let c = shapes::circle(Vec2::new(0.5, 0.5), 0.2, 300);
        for (p, s) in c.vertices().iter().zip(sample_on_curve(&f, &c)) {
            assert!((s - (2.0 * PI * p.x).cos()).abs() <= 1e-6);
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_wraps() {
        let f = GridField::from_fn(64, |x, y| (x * 7.0).sin() + y).unwrap();
        let h = 1.0 / 64.0;
        for (i, j) in [(0usize, 0usize), (5, 9), (63, 63)] {
            let p = Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            assert!((f.interpolate(p) - f.get(i, j)).abs() < 1e-13);
            assert!((f.interpolate(p + Vec2::new(1.0, -2.0)) - f.get(i, j)).abs() < 1e-13);
        }
    }

    #[test]
    fn dump_round_trip() {
        let f = GridField::from_fn(64, |x, y| x * y - 0.1).unwrap();
        let t = f.to_text();
        assert!(t.starts_with("grid 64\n"));
        let g = GridField::from_text(&t).unwrap();
        assert_eq!(f.values(), g.values());
        assert!(GridField::from_text("grid 64\n1 2 3\n").is_err());
    }
}

//! Plain-text curve snapshots.
//!
//! ```text
//! curve <id> period <n1> <n2> orient <±1>
//! <x> <y>
//! ...
//! ```
//!
//! Coordinates are lifted and written with 17 significant digits, so a
//! write/read round trip is lossless.

use std::fmt::Write;

use super::{ClosedCurve, GeometryError, PeriodVector, RegionBoundary, Vec2};

pub fn write_region(region: &RegionBoundary) -> String {
    let mut out = String::new();
    for (id, c) in region.curves().iter().enumerate() {
        write_curve(&mut out, id, c);
    }
    out
}

pub fn write_curve(out: &mut String, id: usize, c: &ClosedCurve) {
    let p = c.period();
    let _ = writeln!(
        out,
        "curve {id} period {} {} orient {}",
        p.n1,
        p.n2,
        if c.orientation() > 0 { "+1" } else { "-1" }
    );
    for v in c.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e}", v.x, v.y);
    }
}

/// Parse every curve in the text, in order of appearance.
pub fn read_curves(text: &str) -> Result<Vec<ClosedCurve>, GeometryError> {
    let bad = |line: usize, msg: &str| GeometryError::Snapshot(format!("line {}: {msg}", line + 1));
    let mut curves = Vec::new();
    let mut header: Option<(PeriodVector, i8)> = None;
    let mut verts: Vec<Vec2> = Vec::new();
    let mut flush = |header: &mut Option<(PeriodVector, i8)>, verts: &mut Vec<Vec2>| {
        if let Some((p, o)) = header.take() {
            curves.push(ClosedCurve::new(std::mem::take(verts), p, o));
        }
    };
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok[0] == "curve" {
            if tok.len() != 7 || tok[2] != "period" || tok[5] != "orient" {
                return Err(bad(ln, "expected `curve <id> period <n1> <n2> orient <±1>`"));
            }
            let n1 = tok[3].parse().map_err(|_| bad(ln, "bad period"))?;
            let n2 = tok[4].parse().map_err(|_| bad(ln, "bad period"))?;
            let o: i8 = tok[6].parse().map_err(|_| bad(ln, "bad orientation"))?;
            flush(&mut header, &mut verts);
            header = Some((PeriodVector::new(n1, n2), o));
        } else {
            if header.is_none() {
                return Err(bad(ln, "vertex before any curve header"));
            }
            if tok.len() != 2 {
                return Err(bad(ln, "expected `x y`"));
            }
            let x = tok[0].parse().map_err(|_| bad(ln, "bad coordinate"))?;
            let y = tok[1].parse().map_err(|_| bad(ln, "bad coordinate"))?;
            verts.push(Vec2::new(x, y));
        }
    }
    flush(&mut header, &mut verts);
    curves.into_iter().collect()
}

pub fn read_region(text: &str) -> Result<RegionBoundary, GeometryError> {
    RegionBoundary::new(read_curves(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn round_trip_is_lossless() {
        let e = shapes::perturbed_strip(0.2, 0.5, 0.013, 3, 97).unwrap();
        let text = write_region(&e);
        assert!(text.starts_with("curve 0 period 1 0 orient +1\n"));
        let f = read_region(&text).unwrap();
        assert_eq!(e, f);
        assert_eq!(write_region(&f), text);
    }

    #[test]
    fn malformed_input() {
        assert!(read_curves("0.1 0.2\n").is_err());
        assert!(read_curves("curve 0 period 1 orient +1\n").is_err());
        assert!(read_curves("curve 0 period 0 0 orient +1\n0.1 zz\n").is_err());
        // too few vertices
        assert!(read_curves("curve 0 period 0 0 orient +1\n0 0\n1 0\n").is_err());
    }
}

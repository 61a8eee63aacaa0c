use super::{check_grid, FieldError, GridField};
use crate::geometry::{DistanceOracle, RegionBoundary, Vec2};

/// Exact area fraction of every cell covered by the region.
///
/// Along each row the covered fraction changes only where boundary pieces
/// pass, so every piece (an edge clipped to one cell) deposits its share of
/// its own cell and a full `-dy` on every cell to its right. The row starts
/// from the covered length of the seam `x = 0` within that row.
pub fn rasterize(region: &RegionBoundary, n: usize) -> Result<GridField, FieldError> {
    check_grid(n)?;
    if region.curves().is_empty() {
        let v = if region.is_full() { 1.0 } else { 0.0 };
        return GridField::from_values(n, vec![v; n * n]);
    }
    let nf = n as f64;
    let limit = 2.0 / nf;
    let mut own = vec![0.0f64; n * n];
    let mut right = vec![0.0f64; n * n];
    let mut seam: Vec<(f64, bool)> = Vec::new();

    for c in region.curves() {
        // seam cells by vertex; the closing edge ends in the first vertex
        // shifted by the integer period, so rounding in the lift cannot make
        // one crossing count twice
        let cells: Vec<i64> = c.vertices().iter().map(|v| v.x.floor() as i64).collect();
        let wrap = cells[0] + c.period().n1;
        for e in 0..c.len() {
            let (a, b) = c.edge(e);
            let length = (b - a).norm();
            if length > limit {
                return Err(FieldError::UnderResolved { length, limit });
            }
            let (p, q) = (a * nf, b * nf);
            deposit_edge(p, q, n, &mut own, &mut right);
            let ka = cells[e];
            let kb = if e + 1 == c.len() { wrap } else { cells[e + 1] };
            let (k_lo, k_hi) = (ka.min(kb), ka.max(kb));
            for k in k_lo + 1..=k_hi {
                let x = k as f64 * nf;
                let t = if q.x != p.x { ((x - p.x) / (q.x - p.x)).clamp(0.0, 1.0) } else { 0.5 };
                let y = p.y + (q.y - p.y) * t;
                // region on the left: above the crossing iff moving in +x
                seam.push((y.rem_euclid(nf), kb > ka));
            }
        }
    }

    let base = seam_coverage(region, &mut seam, n)?;
    let mut values = vec![0.0f64; n * n];
    for j in 0..n {
        let mut run = base[j];
        for i in 0..n {
            run += right[j * n + i];
            values[j * n + i] = run + own[j * n + i];
        }
    }
    GridField::from_values(n, values)
}

/// Split the edge at every integer grid line and deposit each piece.
fn deposit_edge(p: Vec2, q: Vec2, n: usize, own: &mut [f64], right: &mut [f64]) {
    let d = q - p;
    let mut ts: Vec<f64> = Vec::with_capacity(8);
    ts.push(0.0);
    for (a, b) in [(p.x, q.x), (p.y, q.y)] {
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            let mut k = lo.floor() + 1.0;
            while k < hi {
                ts.push((k - a) / (b - a));
                k += 1.0;
            }
        }
    }
    ts.push(1.0);
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ni = n as i64;
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let s = p + d * t0;
        let e = p + d * t1;
        let mid = (s + e) * 0.5;
        let col = mid.x.floor();
        let row = mid.y.floor();
        let i = (col as i64).rem_euclid(ni) as usize;
        let j = (row as i64).rem_euclid(ni) as usize;
        let dy = e.y - s.y;
        own[j * n + i] -= dy * (1.0 - (mid.x - col));
        if i + 1 < n {
            right[j * n + i + 1] -= dy;
        }
    }
}

/// Covered length (in cell units) of the seam `x = 0` within each row.
fn seam_coverage(
    region: &RegionBoundary,
    seam: &mut [(f64, bool)],
    n: usize,
) -> Result<Vec<f64>, FieldError> {
    let nf = n as f64;
    let mut base = vec![0.0f64; n];
    if seam.is_empty() {
        let probe = Vec2::new(0.0, 0.5 / nf);
        let inside = DistanceOracle::new(region).contains(probe);
        if inside {
            base.iter_mut().for_each(|b| *b = 1.0);
        }
        return Ok(base);
    }
    seam.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in seam.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(FieldError::SeamInconsistent);
        }
    }
    if seam.len() % 2 != 0 || seam[0].1 == seam[seam.len() - 1].1 {
        return Err(FieldError::SeamInconsistent);
    }
    // covered intervals run from an entering crossing to the next one
    let mut add = |y0: f64, y1: f64| {
        let mut y = y0;
        while y < y1 {
            let j = y.floor();
            let top = (j + 1.0).min(y1);
            base[(j as usize).min(n - 1)] += top - y;
            y = top;
        }
    };
    let k = seam.len();
    for idx in 0..k {
        let (y, enters) = seam[idx];
        if !enters {
            continue;
        }
        let y_next = seam[(idx + 1) % k].0;
        if y_next > y {
            add(y, y_next);
        } else {
            add(y, nf);
            add(0.0, y_next);
        }
    }
    Ok(base)
}

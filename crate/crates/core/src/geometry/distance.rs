use super::{wrap_unit, RegionBoundary, TorusPoint, Vec2};

#[derive(Clone, Copy, Debug)]
struct Segment {
    /// start point wrapped into `[0,1)²`
    a: Vec2,
    /// `b - a` on the lift
    d: Vec2,
    curve: u32,
    index: u32,
    /// global index of the preceding and following segment on the same curve
    prev: u32,
    next: u32,
}

impl Segment {
    fn b(&self) -> Vec2 {
        self.a + self.d
    }

    /// Image shift bringing the segment next to `p`, from its midpoint.
    fn shift_towards(&self, p: Vec2) -> Vec2 {
        let m = self.a + self.d * 0.5;
        Vec2::new((p.x - m.x).round(), (p.y - m.y).round())
    }

    /// Closest point parameter and squared distance, over periodic images.
    fn closest(&self, p: Vec2) -> (f64, f64, Vec2) {
        let len_sq = self.d.norm_sq();
        let eval = |shift: Vec2| {
            let a = self.a + shift;
            let t = ((p - a).dot(self.d) / len_sq).clamp(0.0, 1.0);
            let q = a + self.d * t;
            ((p - q).norm_sq(), t, q)
        };
        if len_sq < 0.0625 {
            let (d2, t, q) = eval(self.shift_towards(p));
            return (t, d2, q);
        }
        let base = self.shift_towards(p);
        let mut best = (f64::INFINITY, 0.0, Vec2::ZERO);
        for i in -1..=1 {
            for j in -1..=1 {
                let r = eval(base + Vec2::new(i as f64, j as f64));
                if r.0 < best.0 {
                    best = r;
                }
            }
        }
        (best.1, best.0, best.2)
    }
}

/// Result of a nearest-boundary query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestSegment {
    pub distance: f64,
    pub curve: usize,
    /// edge index within the curve
    pub segment: usize,
    /// position along the edge in `[0,1]`
    pub t: f64,
    /// closest boundary point, in the same lift as the query point
    pub point: Vec2,
}

/// Periodic bucket grid over the boundary segments of a region, answering
/// distance, membership and signed-distance queries.
#[derive(Clone, Debug)]
pub struct DistanceOracle {
    segments: Vec<Segment>,
    g: usize,
    cell_start: Vec<u32>,
    cell_items: Vec<u32>,
    /// value returned for regions without boundary: `-1` full, `+1` empty
    no_boundary_sign: f64,
}

impl DistanceOracle {
    pub fn new(region: &RegionBoundary) -> Self {
        let mut segments = Vec::with_capacity(region.vertex_count());
        for (ci, c) in region.curves().iter().enumerate() {
            let base = segments.len() as u32;
            let n = c.len() as u32;
            for i in 0..c.len() {
                let (a, b) = c.edge(i);
                let wa = Vec2::new(wrap_unit(a.x), wrap_unit(a.y));
                let i = i as u32;
                segments.push(Segment {
                    a: wa,
                    d: b - a,
                    curve: ci as u32,
                    index: i,
                    prev: base + (i + n - 1) % n,
                    next: base + (i + 1) % n,
                });
            }
        }
        let g = ((segments.len() as f64).sqrt() * 2.0).clamp(4.0, 256.0) as usize;
        let gf = g as f64;
        let mut cells: Vec<Vec<u32>> = vec![Vec::new(); g * g];
        for (k, s) in segments.iter().enumerate() {
            let b = s.b();
            let (x0, x1) = (s.a.x.min(b.x), s.a.x.max(b.x));
            let (y0, y1) = (s.a.y.min(b.y), s.a.y.max(b.y));
            let i0 = (x0 * gf).floor() as i64;
            let i1 = (x1 * gf).floor() as i64;
            let j0 = (y0 * gf).floor() as i64;
            let j1 = (y1 * gf).floor() as i64;
            let gi = g as i64;
            for i in i0..=i1.min(i0 + gi - 1) {
                for j in j0..=j1.min(j0 + gi - 1) {
                    let ci = i.rem_euclid(gi) as usize;
                    let cj = j.rem_euclid(gi) as usize;
                    cells[cj * g + ci].push(k as u32);
                }
            }
        }
        let mut cell_start = Vec::with_capacity(g * g + 1);
        let mut cell_items = Vec::new();
        cell_start.push(0);
        for c in cells {
            cell_items.extend(c);
            cell_start.push(cell_items.len() as u32);
        }
        let no_boundary_sign = if region.is_full() { -1.0 } else { 1.0 };
        DistanceOracle {
            segments,
            g,
            cell_start,
            cell_items,
            no_boundary_sign,
        }
    }

    fn cell(&self, i: i64, j: i64) -> &[u32] {
        let g = self.g as i64;
        let k = (j.rem_euclid(g) * g + i.rem_euclid(g)) as usize;
        &self.cell_items[self.cell_start[k] as usize..self.cell_start[k + 1] as usize]
    }

    /// Nearest boundary point to `p`; `None` when the region has no boundary.
    pub fn nearest(&self, p: Vec2) -> Option<NearestSegment> {
        self.nearest_within(p, f64::INFINITY)
    }

    /// Nearest boundary point if it lies within `radius` of `p`.
    pub fn nearest_within(&self, p: Vec2, radius: f64) -> Option<NearestSegment> {
        let pw = Vec2::new(wrap_unit(p.x), wrap_unit(p.y));
        let (d2, k, t, q) = self.nearest_raw(pw, radius)?;
        let s = &self.segments[k as usize];
        Some(NearestSegment {
            distance: d2.sqrt(),
            curve: s.curve as usize,
            segment: s.index as usize,
            t,
            point: q + (p - pw),
        })
    }

    /// Squared distance, global segment index, edge parameter and closest
    /// point (in the wrapped frame of `pw`).
    fn nearest_raw(&self, pw: Vec2, radius: f64) -> Option<(f64, u32, f64, Vec2)> {
        if self.segments.is_empty() {
            return None;
        }
        let g = self.g as i64;
        let w = 1.0 / self.g as f64;
        let ci = (pw.x * self.g as f64).floor() as i64;
        let cj = (pw.y * self.g as f64).floor() as i64;
        let mut best: Option<(f64, u32, f64, Vec2)> = None;
        let visit = |cell: &[u32], best: &mut Option<(f64, u32, f64, Vec2)>| {
            for &k in cell {
                let (t, d2, q) = self.segments[k as usize].closest(pw);
                if best.map_or(true, |b| d2 < b.0) {
                    *best = Some((d2, k, t, q));
                }
            }
        };
        let mut r = 0i64;
        loop {
            if 2 * r + 1 > g {
                // the ring wraps onto itself: sweep everything once
                for j in 0..g {
                    for i in 0..g {
                        visit(self.cell(i, j), &mut best);
                    }
                }
                break;
            }
            if r == 0 {
                visit(self.cell(ci, cj), &mut best);
            } else {
                for i in (ci - r)..=(ci + r) {
                    visit(self.cell(i, cj - r), &mut best);
                    visit(self.cell(i, cj + r), &mut best);
                }
                for j in (cj - r + 1)..=(cj + r - 1) {
                    visit(self.cell(ci - r, j), &mut best);
                    visit(self.cell(ci + r, j), &mut best);
                }
            }
            // every unvisited cell is at least r·w away
            let reach = r as f64 * w;
            if best.is_some_and(|b| b.0.sqrt() <= reach) || reach > radius {
                break;
            }
            r += 1;
        }
        best.filter(|b| b.0.sqrt() <= radius)
    }

    /// Every boundary edge passing within `radius` of `p`, nearest point
    /// per edge. Meant for small radii; cost grows with `radius²`.
    pub fn segments_within(&self, p: Vec2, radius: f64) -> Vec<NearestSegment> {
        let pw = Vec2::new(wrap_unit(p.x), wrap_unit(p.y));
        let g = self.g as i64;
        let reach = ((radius * self.g as f64).ceil() as i64 + 1).min(g / 2);
        let ci = (pw.x * self.g as f64).floor() as i64;
        let cj = (pw.y * self.g as f64).floor() as i64;
        let mut seen: Vec<u32> = Vec::new();
        let mut out = Vec::new();
        for j in (cj - reach)..=(cj + reach) {
            for i in (ci - reach)..=(ci + reach) {
                for &k in self.cell(i, j) {
                    if seen.contains(&k) {
                        continue;
                    }
                    seen.push(k);
                    let s = &self.segments[k as usize];
                    let (t, d2, q) = s.closest(pw);
                    if d2.sqrt() <= radius {
                        out.push(NearestSegment {
                            distance: d2.sqrt(),
                            curve: s.curve as usize,
                            segment: s.index as usize,
                            t,
                            point: q + (p - pw),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |n| n.distance)
    }

    /// Membership by the nearest crossing of the vertical line through `p`
    /// above `p`, falling back to the horizontal line and then to the local
    /// normal at the nearest boundary point.
    pub fn contains(&self, p: Vec2) -> bool {
        if self.segments.is_empty() {
            return self.no_boundary_sign < 0.0;
        }
        let pw = Vec2::new(wrap_unit(p.x), wrap_unit(p.y));
        if let Some(inside) = self.line_crossing(pw, false) {
            return inside;
        }
        if let Some(inside) = self.line_crossing(pw, true) {
            return inside;
        }
        self.contains_by_normal(p)
    }

    /// Membership from the outward pseudo-normal at the nearest boundary point.
    pub fn contains_by_normal(&self, p: Vec2) -> bool {
        let pw = Vec2::new(wrap_unit(p.x), wrap_unit(p.y));
        let Some((_, k, t, q)) = self.nearest_raw(pw, f64::INFINITY) else {
            return self.no_boundary_sign < 0.0;
        };
        let s = &self.segments[k as usize];
        let normal = if t <= 0.0 {
            let prev = &self.segments[s.prev as usize];
            prev.d.normalized().perp_right() + s.d.normalized().perp_right()
        } else if t >= 1.0 {
            let next = &self.segments[s.next as usize];
            next.d.normalized().perp_right() + s.d.normalized().perp_right()
        } else {
            s.d.perp_right()
        };
        (pw - q).dot(normal) < 0.0
    }

    /// Nearest crossing along the vertical (or horizontal) line through `p`
    /// in the positive direction. Returns `None` when the line misses the
    /// boundary entirely.
    fn line_crossing(&self, p: Vec2, horizontal: bool) -> Option<bool> {
        // swap coordinates so the search always runs "upwards"
        let sw = |v: Vec2| if horizontal { Vec2::new(v.y, v.x) } else { v };
        let pp = sw(p);
        let gf = self.g as f64;
        let w = 1.0 / gf;
        let col = (pp.x * gf).floor() as i64;
        let row = (pp.y * gf).floor() as i64;
        let mut best: Option<(f64, f64)> = None;
        for t in 0..=self.g as i64 {
            let cell = if horizontal {
                self.cell(row + t, col)
            } else {
                self.cell(col, row + t)
            };
            for &k in cell {
                let s = &self.segments[k as usize];
                let a = sw(s.a);
                let d = sw(s.d);
                if d.x == 0.0 {
                    continue;
                }
                let b = a + d;
                let (lo, hi) = (a.x.min(b.x), a.x.max(b.x));
                // half-open straddle rule on the image containing pp.x
                for kx in [-1.0, 0.0, 1.0] {
                    let x = pp.x - kx;
                    if lo < x && x <= hi {
                        let y = a.y + d.y * (x - a.x) / d.x;
                        let mut dy = (y - pp.y).rem_euclid(1.0);
                        if dy >= 1.0 {
                            dy = 0.0;
                        }
                        if best.map_or(true, |bb| dy < bb.0) {
                            best = Some((dy, d.x));
                        }
                    }
                }
            }
            let top = (row + t + 1) as f64 * w - pp.y;
            if let Some(bb) = best {
                if bb.0 <= top {
                    break;
                }
            }
        }
        // the region lies to the left of each edge; with the crossing above
        // p, an edge running in -x has the region below it
        best.map(|(_, dx)| if horizontal { dx > 0.0 } else { dx < 0.0 })
    }

    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self.nearest(p) {
            None => self.no_boundary_sign * f64::INFINITY,
            Some(n) => {
                if n.distance == 0.0 {
                    0.0
                } else if self.contains(p) {
                    -n.distance
                } else {
                    n.distance
                }
            }
        }
    }

    /// Signed distance when `|sd| ≤ radius`, otherwise `±radius` with the
    /// correct sign, which is all a band computation needs.
    pub fn signed_distance_clamped(&self, p: Vec2, radius: f64) -> f64 {
        let d = self.nearest_within(p, radius).map_or(radius, |n| n.distance);
        if d == 0.0 {
            0.0
        } else if self.contains(p) {
            -d
        } else {
            d
        }
    }
}

/// `dist(p, E) - dist(p, 𝕋² \ E)`: negative inside, positive outside.
pub fn signed_distance(region: &RegionBoundary, p: TorusPoint) -> f64 {
    DistanceOracle::new(region).signed_distance(p.as_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shapes, torus_distance};

    #[test]
    fn disk_at_origin() {
        let e = shapes::disk(Vec2::new(0.0, 0.0), 0.25, 1024).unwrap();
        let o = DistanceOracle::new(&e);
        assert!((o.signed_distance(Vec2::new(0.5, 0.0)) - 0.25).abs() < 1e-5);
        assert!((o.signed_distance(Vec2::new(0.9, 0.0)) + 0.15).abs() < 1e-5);
        assert!((signed_distance(&e, TorusPoint::new(0.9, 0.0)) + 0.15).abs() < 1e-5);
    }

    #[test]
    fn strip_midline() {
        let e = shapes::strip(0.2, 0.5, 64).unwrap();
        let o = DistanceOracle::new(&e);
        assert!((o.signed_distance(Vec2::new(0.7, 0.35)) + 0.15).abs() < 1e-14);
        assert!((o.signed_distance(Vec2::new(0.7, 0.85)) - 0.35).abs() < 1e-14);
        assert!((o.signed_distance(Vec2::new(0.7, 0.05)) - 0.15).abs() < 1e-14);
    }

    #[test]
    fn vertical_strip_uses_horizontal_fallback() {
        let e = shapes::strip(0.2, 0.5, 64)
            .unwrap()
            .transformed(crate::geometry::LatticeSymmetry::SwapAxes);
        let o = DistanceOracle::new(&e);
        assert!(o.contains(Vec2::new(0.3, 0.123)));
        assert!(!o.contains(Vec2::new(0.7, 0.5)));
    }

    #[test]
    fn complement_flips_sign() {
        let e = shapes::disk(Vec2::new(0.4, 0.6), 0.2, 512).unwrap();
        let c = e.complement();
        let (oe, oc) = (DistanceOracle::new(&e), DistanceOracle::new(&c));
        for k in 0..200 {
            let p = Vec2::new((k as f64 * 0.618034).fract(), (k as f64 * 0.414214).fract());
            let (a, b) = (oe.signed_distance(p), oc.signed_distance(p));
            assert!((a + b).abs() < 1e-14);
        }
    }

    /// Brute force over every segment and the 9 nearest images.
    fn brute_distance(e: &RegionBoundary, p: Vec2) -> f64 {
        let tp = TorusPoint::from_lifted(p);
        let mut best = f64::INFINITY;
        for c in e.curves() {
            for i in 0..c.len() {
                let (a, b) = c.edge(i);
                for s in 0..=64 {
                    let q = a + (b - a) * (s as f64 / 64.0);
                    best = best.min(torus_distance(tp, TorusPoint::from_lifted(q)));
                }
            }
        }
        best
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn matches_brute_force_and_normal_route(px in 0.0f64..1.0, py in 0.0f64..1.0,
                                                 cx in 0.0f64..1.0, amp in 0.0f64..0.04) {
            let e = shapes::perturbed_disk(Vec2::new(cx, 0.5), 0.22, amp, 3, 128).unwrap();
            let o = DistanceOracle::new(&e);
            let p = Vec2::new(px, py);
            let d = o.distance(p);
            let bf = brute_distance(&e, p);
            proptest::prop_assert!(d <= bf + 1e-12 && bf - d < 1e-4);
            if d > 1e-9 {
                proptest::prop_assert_eq!(o.contains(p), o.contains_by_normal(p));
            }
        }

        #[test]
        fn signed_distance_is_lipschitz(px in 0.0f64..1.0, py in 0.0f64..1.0,
                                        dx in -0.05f64..0.05, dy in -0.05f64..0.05) {
            let e = shapes::perturbed_strip(0.3, 0.6, 0.03, 2, 128).unwrap();
            let o = DistanceOracle::new(&e);
            let p = Vec2::new(px, py);
            let q = p + Vec2::new(dx, dy);
            let gap = (o.signed_distance(p) - o.signed_distance(q)).abs();
            proptest::prop_assert!(gap <= Vec2::new(dx, dy).norm() + 1e-9);
        }
    }
}

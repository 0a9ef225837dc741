//! Nearest sets of two polytopes from their vertices, avoiding Dykstra's
//! scheme, which crawls when the polytopes meet at a shallow angle.
//!
//! For `v ≠ 0`, `E` is the face of `A` exposed by `v` intersected with the
//! face of `B` exposed by `−v`, shifted back by `v`. If either face is a
//! vertex, that vertex is `E`; in the plane both faces are collinear
//! segments and `E` is their overlap. For `v = 0` in the plane, `E = A ∩ B`
//! is found by clipping one polygon against the other.

use crate::point::Point;
use crate::sets::ConvexSet;

/// Exact `(v, E)` for two polygons given by their vertices, or `None` if
/// either is degenerate (a point or a segment).
pub(crate) fn planar_nearest_set(a: &[Point], b: &[Point]) -> Option<(Point, ConvexSet)> {
    let (ha, hb) = (ccw_hull(a), ccw_hull(b));
    if ha.len() < 3 || hb.len() < 3 {
        return None;
    }
    let clipped = clip(&ha, &hb);
    if !clipped.is_empty() {
        let e = ConvexSet::vpolytope(clipped.into_iter().map(Point::from).collect()).ok()?;
        return Some((Point::zeros(2), e));
    }
    let v = Point::from(polygon_gap(&ha, &hb));
    let scale = a.iter().chain(b).map(Point::norm).fold(1.0, f64::max);
    let e = exposed_overlap(a, b, &v, 1e-9 * scale)?;
    Some((v, e))
}

/// `E` for two polytopes in any dimension from an iteratively found `v`.
/// Only trusted when `v` is clearly nonzero and one of the exposed faces is
/// a vertex (or, in the plane, when the faces are collinear segments).
pub(crate) fn exposed_nearest_set(a: &[Point], b: &[Point], v: &Point) -> Option<ConvexSet> {
    let scale = a.iter().chain(b).map(Point::norm).fold(1.0, f64::max);
    if v.norm() <= 1e-6 * scale {
        return None;
    }
    exposed_overlap(a, b, v, 1e-8 * scale)
}

fn exposed_overlap(a: &[Point], b: &[Point], v: &Point, tau: f64) -> Option<ConvexSet> {
    let u = v * (1.0 / v.norm());
    let top = a
        .iter()
        .map(|p| p.dot(&u))
        .fold(f64::NEG_INFINITY, f64::max);
    let bottom = b.iter().map(|p| p.dot(&u)).fold(f64::INFINITY, f64::min);
    let fa: Vec<Point> = a
        .iter()
        .filter(|p| p.dot(&u) >= top - tau)
        .cloned()
        .collect();
    let fb: Vec<Point> = b
        .iter()
        .filter(|p| p.dot(&u) <= bottom + tau)
        .map(|p| p - v)
        .collect();
    if fa.len() == 1 {
        return ConvexSet::vpolytope(fa).ok();
    }
    if fb.len() == 1 {
        return ConvexSet::vpolytope(fb).ok();
    }
    if v.dim() != 2 {
        return None;
    }
    let w = Point::from([-u[1], u[0]]);
    let span = |pts: &[Point]| {
        pts.iter()
            .map(|p| p.dot(&w))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                (lo.min(t), hi.max(t))
            })
    };
    let ((alo, ahi), (blo, bhi)) = (span(&fa), span(&fb));
    let (lo, hi) = (alo.max(blo), ahi.min(bhi));
    if lo > hi + tau {
        return None;
    }
    let base = &u * top;
    ConvexSet::vpolytope(vec![base.axpy(lo, &w), base.axpy(hi.max(lo), &w)]).ok()
}

type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (monotone chain).
fn ccw_hull(pts: &[Point]) -> Vec<P2> {
    let mut p: Vec<P2> = pts.iter().map(|q| [q[0], q[1]]).collect();
    p.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<P2> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn closest_on_segment(p: P2, s0: P2, s1: P2) -> P2 {
    let d = [s1[0] - s0[0], s1[1] - s0[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - s0[0]) * d[0] + (p[1] - s0[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    [s0[0] + t * d[0], s0[1] + t * d[1]]
}

/// Shortest `b − a` between two disjoint convex polygons; it is attained at
/// a vertex of one of them.
fn polygon_gap(a: &[P2], b: &[P2]) -> P2 {
    let mut best = [f64::INFINITY; 2];
    let mut consider = |d: P2| {
        if d[0].hypot(d[1]) < best[0].hypot(best[1]) {
            best = d;
        }
    };
    for (from, to, sign) in [(a, b, 1.0), (b, a, -1.0)] {
        for &p in from {
            for i in 0..to.len() {
                let q = closest_on_segment(p, to[i], to[(i + 1) % to.len()]);
                consider([sign * (q[0] - p[0]), sign * (q[1] - p[1])]);
            }
        }
    }
    best
}

/// Sutherland–Hodgman clipping of `subject` by the convex polygon `clipper`
/// (both counter-clockwise). Degenerate clippers (points, segments) give `[]`.
fn clip(subject: &[P2], clipper: &[P2]) -> Vec<P2> {
    if clipper.len() < 3 {
        return Vec::new();
    }
    let mut out = subject.to_vec();
    for i in 0..clipper.len() {
        let (e0, e1) = (clipper[i], clipper[(i + 1) % clipper.len()]);
        let input = std::mem::take(&mut out);
        if input.is_empty() {
            break;
        }
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (cross(e0, e1, p), cross(e0, e1, q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

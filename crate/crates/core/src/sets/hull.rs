//! Nearest point of a finite point cloud's convex hull (Wolfe's minimum-norm-point
//! scheme). The Frank–Wolfe gap `|w|² − min_i <w, q_i>` certifies optimality.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::point::Point;

const WEIGHT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct HullProjection {
    pub point: Point,
    /// Frank–Wolfe duality gap at termination.
    #[cfg_attr(not(test), allow(dead_code))]
    pub gap: f64,
}

/// Project `x` onto conv(`vertices`). `tol` bounds the distance between the
/// returned point and the exact projection: the loop stops once the gap is
/// at most `tol² / 2`.
pub(crate) fn project_onto_hull(
    vertices: &[Point],
    x: &Point,
    tol: f64,
    cap: usize,
) -> Result<HullProjection> {
    wolfe(vertices, x, tol, cap, None)
}

/// Whether `dist(x, conv(vertices)) <= tol`. Stops as soon as the iterate
/// (an upper bound) or its separating plane (a lower bound) decides.
pub(crate) fn hull_contains(vertices: &[Point], x: &Point, tol: f64, cap: usize) -> Result<bool> {
    Ok(wolfe(vertices, x, tol, cap, Some(tol))?.point.dist(x) <= tol)
}

fn wolfe(
    vertices: &[Point],
    x: &Point,
    tol: f64,
    cap: usize,
    decide: Option<f64>,
) -> Result<HullProjection> {
    debug_assert!(!vertices.is_empty());
    let q: Vec<Point> = vertices.iter().map(|v| v - x).collect();
    let scale = q
        .iter()
        .map(Point::norm_sq)
        .fold(f64::MIN_POSITIVE, f64::max);
    let gap_target = (0.5 * tol * tol).max(1e-15 * scale);

    let start = (0..q.len())
        .min_by(|&i, &j| q[i].norm_sq().total_cmp(&q[j].norm_sq()))
        .unwrap();
    let mut support = vec![start];
    let mut lambda = vec![1.0];
    let mut w = q[start].clone();
    let mut gap = f64::INFINITY;

    for _ in 0..cap {
        let ww = w.norm_sq();
        let (j, wq) = q
            .iter()
            .enumerate()
            .map(|(i, qi)| (i, w.dot(qi)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        gap = (ww - wq).max(0.0);
        if let Some(t) = decide {
            let norm = ww.sqrt();
            if norm <= t || wq > t * norm {
                return Ok(finish(x, w, gap, scale));
            }
        }
        if gap <= gap_target || support.contains(&j) {
            return Ok(finish(x, w, gap, scale));
        }
        support.push(j);
        lambda.push(0.0);

        // Minor cycle: move to the affine minimizer, dropping vertices whose
        // weights would go negative.
        loop {
            let alpha = affine_min_norm(&q, &support);
            if alpha.iter().all(|&a| a > WEIGHT_FLOOR) {
                lambda = alpha;
                w = combine(&q, &support, &lambda);
                break;
            }
            let mut theta = 1.0_f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= WEIGHT_FLOOR && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut kept_s = Vec::with_capacity(support.len());
            let mut kept_l = Vec::with_capacity(support.len());
            for (s, l) in support.iter().zip(&lambda) {
                if *l > WEIGHT_FLOOR {
                    kept_s.push(*s);
                    kept_l.push(*l);
                }
            }
            if kept_s.is_empty() {
                // Rounding removed everything; keep the heaviest vertex.
                let best = lambda
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                kept_s.push(support[best]);
                kept_l.push(1.0);
            }
            let total: f64 = kept_l.iter().sum();
            kept_l.iter_mut().for_each(|l| *l /= total);
            support = kept_s;
            lambda = kept_l;
            w = combine(&q, &support, &lambda);
            if support.len() == 1 {
                break;
            }
        }
        // Each major step strictly shortens w in exact arithmetic; when it
        // stops doing so, the remaining gap is rounding noise.
        if w.norm_sq() >= ww {
            return Ok(finish(x, w, gap, scale));
        }
    }
    if gap <= gap_target.max(1e-12 * scale) {
        return Ok(finish(x, w, gap, scale));
    }
    Err(Error::non_convergent("convex hull projection", cap as u64))
}

fn finish(x: &Point, w: Point, gap: f64, scale: f64) -> HullProjection {
    // Inside the hull the residual is pure rounding noise.
    if w.norm_sq() <= 1e-28 * scale.max(1.0) {
        return HullProjection {
            point: x.clone(),
            gap,
        };
    }
    HullProjection { point: x + &w, gap }
}

fn combine(q: &[Point], support: &[usize], lambda: &[f64]) -> Point {
    let mut out = Point::zeros(q[0].dim());
    for (s, l) in support.iter().zip(lambda) {
        out = out.axpy(*l, &q[*s]);
    }
    out
}

/// Weights of the minimum-norm point of aff{q_s : s in support}.
fn affine_min_norm(q: &[Point], support: &[usize]) -> Vec<f64> {
    if support.len() == 1 {
        return vec![1.0];
    }
    let d = q[0].dim();
    let base = &q[support[0]];
    let k = support.len() - 1;
    let mut dmat = DMatrix::<f64>::zeros(d, k);
    for (col, s) in support[1..].iter().enumerate() {
        for r in 0..d {
            dmat[(r, col)] = q[*s][r] - base[r];
        }
    }
    let rhs = -DVector::from_column_slice(base.as_slice());
    let beta = dmat
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(k));
    let mut alpha = Vec::with_capacity(support.len());
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::from([-1.0, 0.0]),
            Point::from([1.0, 0.0]),
            Point::from([1.0, 1.0]),
            Point::from([-1.0, 1.0]),
        ]
    }

    #[test]
    fn clamps_to_top_edge() {
        let p = project_onto_hull(&square(), &Point::from([0.0, 2.0]), 1e-10, 1000).unwrap();
        assert!(p.point.dist(&Point::from([0.0, 1.0])) < 1e-12);
        assert!(p.gap <= 1e-12);
    }

    #[test]
    fn interior_point_is_fixed_exactly() {
        let x = Point::from([0.25, 0.5]);
        let p = project_onto_hull(&square(), &x, 1e-10, 1000).unwrap();
        assert_eq!(p.point, x);
    }

    #[test]
    fn corner_region() {
        let p = project_onto_hull(&square(), &Point::from([3.0, -2.0]), 1e-10, 1000).unwrap();
        assert!(p.point.dist(&Point::from([1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn segment_in_3d() {
        let seg = vec![Point::from([0.0, 0.0, 0.0]), Point::from([2.0, 0.0, 0.0])];
        let p = project_onto_hull(&seg, &Point::from([1.5, 1.0, -1.0]), 1e-10, 1000).unwrap();
        assert!(p.point.dist(&Point::from([1.5, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn interior_point_with_rounding_residual_terminates() {
        let v = [
            [-2.110676563572726, -1.356836888211675],
            [1.2101955013199202, -2.397990297988845],
            [1.9909344934935902, 2.000319064083128],
            [-0.7663043377052629, -0.16625426847370375],
        ]
        .map(Point::from)
        .to_vec();
        let x = Point::from([-1.0993185515351998, -0.8541320031023063]);
        let p = project_onto_hull(&v, &x, 1e-12, 1000).unwrap();
        assert!(p.point.dist(&x) < 1e-10);
    }

    #[test]
    fn membership_decides_early_but_correctly() {
        // Distance to the square is max(0, y − 1) above it.
        for (y, tol, inside) in [
            (1.0 + 1e-9, 1e-8, true),
            (1.0 + 1e-7, 1e-8, false),
            (0.5, 0.0, true),
            (1.2, 0.1, false),
        ] {
            assert_eq!(
                hull_contains(&square(), &Point::from([0.3, y]), tol, 1000).unwrap(),
                inside,
                "y = {y}"
            );
        }
    }
}

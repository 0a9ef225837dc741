//! Projection onto {y : <n_i, y> >= b_i} with a dual active-set method
//! (Goldfarb–Idnani specialised to the identity Hessian). Starts from the
//! unconstrained minimiser and adds violated constraints one at a time, so an
//! infeasible system is detected instead of looping.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::point::Point;

pub(crate) fn project_polyhedron(
    normals: &[Point],
    offsets: &[f64],
    x: &Point,
    cap: usize,
) -> Result<Point> {
    let mut y = x.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut mult: Vec<f64> = Vec::new();

    let mut iterations = 0usize;
    loop {
        // Most violated inactive constraint.
        let scale = 1.0 + y.norm();
        let mut worst: Option<(usize, f64)> = None;
        for (i, (n, b)) in normals.iter().zip(offsets).enumerate() {
            if active.contains(&i) {
                continue;
            }
            let viol = b - n.dot(&y);
            if viol > 1e-13 * (scale + b.abs()) && worst.is_none_or(|(_, w)| viol > w) {
                worst = Some((i, viol));
            }
        }
        let Some((p, _)) = worst else {
            return Ok(y);
        };

        let np = &normals[p];
        let mut u_p = 0.0;
        loop {
            iterations += 1;
            if iterations > cap {
                return Err(Error::non_convergent("polyhedron projection", cap as u64));
            }
            let (z, r) = reduced_direction(normals, &active, np);
            let zz = z.norm_sq();

            // Largest dual step keeping active multipliers nonnegative.
            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (k, rk) in r.iter().enumerate() {
                if *rk > 1e-15 {
                    let t = mult[k] / rk;
                    if t < t1 {
                        t1 = t;
                        drop = Some(k);
                    }
                }
            }
            let t2 = if zz > 1e-24 {
                (offsets[p] - np.dot(&y)) / zz
            } else {
                f64::INFINITY
            };

            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(Error::Infeasible(format!(
                    "constraint {p} cannot be satisfied together with the active set"
                )));
            }
            if t2.is_finite() {
                y = y.axpy(t, &z);
            }
            for (m, rk) in mult.iter_mut().zip(&r) {
                *m -= t * rk;
            }
            u_p += t;
            if t2 <= t1 {
                active.push(p);
                mult.push(u_p);
                break;
            }
            let k = drop.expect("finite t1 has an index");
            active.remove(k);
            mult.remove(k);
        }
    }
}

/// Component of `np` orthogonal to the span of the active normals, and the
/// coefficients `r` with `np = z + Σ r_k n_{active_k}`.
fn reduced_direction(normals: &[Point], active: &[usize], np: &Point) -> (Point, Vec<f64>) {
    if active.is_empty() {
        return (np.clone(), Vec::new());
    }
    let m = active.len();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, &a) in active.iter().enumerate() {
        rhs[i] = normals[a].dot(np);
        for (j, &b) in active.iter().enumerate() {
            gram[(i, j)] = normals[a].dot(&normals[b]);
        }
    }
    let r = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(m)),
    };
    let mut z = np.clone();
    for (k, &a) in active.iter().enumerate() {
        z = z.axpy(-r[k], &normals[a]);
    }
    (z, r.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> (Vec<Point>, Vec<f64>) {
        // 0 <= x <= 1, 0 <= y <= 1
        (
            vec![
                Point::from([1.0, 0.0]),
                Point::from([-1.0, 0.0]),
                Point::from([0.0, 1.0]),
                Point::from([0.0, -1.0]),
            ],
            vec![0.0, -1.0, 0.0, -1.0],
        )
    }

    #[test]
    fn box_clamp_matches_coordinatewise_clamp() {
        let (n, b) = unit_box();
        for (x, y) in [
            (2.0, 3.0),
            (-1.0, 0.5),
            (0.3, -4.0),
            (0.2, 0.7),
            (-3.0, -3.0),
        ] {
            let p = project_polyhedron(&n, &b, &Point::from([x, y]), 100).unwrap();
            let want = Point::from([f64::clamp(x, 0.0, 1.0), f64::clamp(y, 0.0, 1.0)]);
            assert!(p.dist(&want) < 1e-14, "{p} vs {want}");
        }
    }

    #[test]
    fn detects_infeasible() {
        // x >= 1 and -x >= 0
        let n = vec![Point::from([1.0]), Point::from([-1.0])];
        let b = vec![1.0, 0.0];
        assert!(matches!(
            project_polyhedron(&n, &b, &Point::from([0.5]), 100),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn redundant_constraints_at_a_vertex() {
        // Three constraints active at the origin of a 2D cone.
        let n = vec![
            Point::from([1.0, 0.0]),
            Point::from([0.0, 1.0]),
            Point::from([
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ]),
        ];
        let b = vec![0.0, 0.0, 0.0];
        let p = project_polyhedron(&n, &b, &Point::from([-1.0, -2.0]), 100).unwrap();
        assert!(p.norm() < 1e-14);
    }
}

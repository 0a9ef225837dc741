use crate::error::{Error, Result};
use crate::point::Point;
use crate::sets::ConvexSet;

/// Projection of `x` onto the intersection of `sets` by Dykstra's cyclic
/// scheme with correction terms. Stops once a full cycle moves neither the
/// iterate nor any correction by more than `tol`.
///
/// The caller guarantees the intersection is nonempty.
pub fn dykstra_project(sets: &[&ConvexSet], x: &Point, tol: f64, cap: usize) -> Result<Point> {
    let Some(first) = sets.first() else {
        return Err(Error::InvalidArgument(
            "dykstra needs at least one set".into(),
        ));
    };
    let dim = first.dim();
    x.ensure_dim(dim)?;
    for s in sets {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
    }
    if sets.len() == 1 {
        return first.project(x, tol.min(first.default_tol()));
    }
    let mut y = x.clone();
    let mut corrections = vec![Point::zeros(dim); sets.len()];
    for _ in 0..cap {
        let start = y.clone();
        let mut moved = 0.0_f64;
        for (set, p) in sets.iter().zip(corrections.iter_mut()) {
            let z = &y + p;
            let next = set.project(&z, tol.min(set.default_tol()))?;
            let np = &z - &next;
            moved = moved.max(np.dist(p));
            *p = np;
            y = next;
        }
        if y.dist(&start) <= tol && moved <= tol {
            return Ok(y);
        }
    }
    Err(Error::non_convergent("dykstra projection", cap as u64))
}

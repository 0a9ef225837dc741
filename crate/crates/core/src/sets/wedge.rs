//! Planar convex regions embedded in ℝ^d: an affine plane with an orthonormal
//! chart and a list of half-plane constraints in chart coordinates.

use crate::error::{Error, Result};
use crate::point::Point;

/// `<normal, c> >= offset` in chart coordinates; `normal` has unit length.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wedge {
    origin: Point,
    e1: Point,
    e2: Point,
    halfplanes: Vec<HalfPlane>,
    /// apex, line_through, ray_through when built from a line and a ray.
    defining: Option<[Point; 3]>,
}

impl Wedge {
    /// conv(line ∪ ray) where the line passes through `apex` and `line_through`
    /// and the ray starts at `apex` and passes through `ray_through`.
    pub fn from_line_and_ray(apex: Point, line_through: Point, ray_through: Point) -> Result<Self> {
        let dim = apex.dim();
        line_through.ensure_dim(dim)?;
        ray_through.ensure_dim(dim)?;
        let e1 = (&line_through - &apex)
            .normalized()
            .map_err(|_| Error::InvalidSet("wedge line points coincide".into()))?;
        let r = &ray_through - &apex;
        let perp = r.axpy(-r.dot(&e1), &e1);
        if perp.norm() <= 1e-12 * r.norm().max(1.0) {
            return Err(Error::InvalidSet(
                "wedge ray is parallel to its line".into(),
            ));
        }
        let e2 = perp.normalized()?;
        Ok(Wedge {
            origin: apex.clone(),
            e1,
            e2,
            halfplanes: vec![HalfPlane {
                normal: [0.0, 1.0],
                offset: 0.0,
            }],
            defining: Some([apex, line_through, ray_through]),
        })
    }

    /// A planar region through `origin` spanned by `u`, `w`; `halfplanes` are
    /// expressed in the orthonormal chart obtained by Gram–Schmidt on (u, w).
    pub fn new(origin: Point, u: Point, w: Point, halfplanes: Vec<HalfPlane>) -> Result<Self> {
        let dim = origin.dim();
        u.ensure_dim(dim)?;
        w.ensure_dim(dim)?;
        let e1 = u
            .normalized()
            .map_err(|_| Error::InvalidSet("planar chart vector is zero".into()))?;
        let perp = w.axpy(-w.dot(&e1), &e1);
        let e2 = perp
            .normalized()
            .map_err(|_| Error::InvalidSet("planar chart vectors are parallel".into()))?;
        let mut hp = Vec::with_capacity(halfplanes.len());
        for h in halfplanes {
            let n = h.normal[0].hypot(h.normal[1]);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::InvalidSet("half-plane normal is zero".into()));
            }
            hp.push(HalfPlane {
                normal: [h.normal[0] / n, h.normal[1] / n],
                offset: h.offset / n,
            });
        }
        let wedge = Wedge {
            origin,
            e1,
            e2,
            halfplanes: hp,
            defining: None,
        };
        if wedge.project_chart([0.0, 0.0]).is_none() {
            return Err(Error::Infeasible(
                "planar half-plane constraints are empty".into(),
            ));
        }
        Ok(wedge)
    }

    pub fn dim(&self) -> usize {
        self.origin.dim()
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn chart_basis(&self) -> (&Point, &Point) {
        (&self.e1, &self.e2)
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn defining_points(&self) -> Option<&[Point; 3]> {
        self.defining.as_ref()
    }

    pub(crate) fn chart(&self, x: &Point) -> [f64; 2] {
        let d = x - &self.origin;
        [d.dot(&self.e1), d.dot(&self.e2)]
    }

    pub(crate) fn embed(&self, c: [f64; 2]) -> Point {
        self.origin.axpy(c[0], &self.e1).axpy(c[1], &self.e2)
    }

    fn feasible(&self, c: [f64; 2]) -> bool {
        let scale = 1.0 + c[0].abs() + c[1].abs();
        self.halfplanes
            .iter()
            .all(|h| h.normal[0] * c[0] + h.normal[1] * c[1] >= h.offset - 1e-12 * scale)
    }

    /// Exact projection in the chart: the nearest point is either `c`, the
    /// foot on one boundary line, or a vertex of two boundary lines.
    pub(crate) fn project_chart(&self, c: [f64; 2]) -> Option<[f64; 2]> {
        if self.feasible(c) {
            return Some(c);
        }
        let mut best: Option<([f64; 2], f64)> = None;
        let consider = |p: [f64; 2], best: &mut Option<([f64; 2], f64)>| {
            if self.feasible(p) {
                let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                if best.is_none_or(|(_, bd)| d < bd) {
                    *best = Some((p, d));
                }
            }
        };
        for h in &self.halfplanes {
            let s = h.offset - (h.normal[0] * c[0] + h.normal[1] * c[1]);
            consider([c[0] + s * h.normal[0], c[1] + s * h.normal[1]], &mut best);
        }
        for (i, h) in self.halfplanes.iter().enumerate() {
            for g in &self.halfplanes[i + 1..] {
                let det = h.normal[0] * g.normal[1] - h.normal[1] * g.normal[0];
                if det.abs() < 1e-14 {
                    continue;
                }
                let p = [
                    (h.offset * g.normal[1] - g.offset * h.normal[1]) / det,
                    (h.normal[0] * g.offset - g.normal[0] * h.offset) / det,
                ];
                consider(p, &mut best);
            }
        }
        best.map(|(p, _)| p)
    }

    pub(crate) fn project(&self, x: &Point) -> Result<Point> {
        let c = self.chart(x);
        let p = self
            .project_chart(c)
            .ok_or_else(|| Error::Infeasible("planar region is empty".into()))?;
        Ok(self.embed(p))
    }

    pub(crate) fn translated(&self, shift: &Point) -> Wedge {
        Wedge {
            origin: &self.origin + shift,
            e1: self.e1.clone(),
            e2: self.e2.clone(),
            halfplanes: self.halfplanes.clone(),
            defining: self
                .defining
                .as_ref()
                .map(|[a, l, r]| [a + shift, l + shift, r + shift]),
        }
    }
}

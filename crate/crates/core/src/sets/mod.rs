//! Closed convex subsets of ℝ^d with projection, membership and support
//! operators.
//!
//! Closed-form projections are used for half-spaces, hyperplanes, affine
//! subspaces, balls and planar regions. Polytopes given by vertices go through
//! Wolfe's nearest-point scheme; polyhedra given by inequalities go through a
//! dual active-set QP. Both terminate with an optimality certificate.

mod description;
mod hull;
mod polyhedron;
mod wedge;

use serde::{Deserialize, Serialize};

pub use description::{HalfPlaneDescription, HalfspaceDescription, SetDescription};
pub use wedge::{HalfPlane, Wedge};

use crate::error::{Error, Result};
use crate::point::Point;

/// Default tolerance for closed-form projections.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Default tolerance for iterative projections (polytopes, polyhedra).
pub const ITERATIVE_TOL: f64 = 1e-8;

const HULL_CAP: usize = 10_000;
const POLYHEDRON_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Point,
    offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Point,
    offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    base: Point,
    basis: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope {
    vertices: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HPolyhedron {
    normals: Vec<Point>,
    offsets: Vec<f64>,
    witness: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Translate {
    inner: Box<ConvexSet>,
    shift: Point,
}

/// A nonempty closed convex subset of ℝ^d. Values are immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetDescription", into = "SetDescription")]
pub enum ConvexSet {
    /// `{x : <normal, x> >= offset}` with a unit normal.
    Halfspace(Halfspace),
    /// `{x : <normal, x> = offset}` with a unit normal.
    Hyperplane(Hyperplane),
    AffineSubspace(AffineSubspace),
    Ball(Ball),
    VPolytope(VPolytope),
    HPolyhedron(HPolyhedron),
    Wedge(Wedge),
    Translate(Translate),
}

fn unit_normal(normal: Point, offset: f64) -> Result<(Point, f64)> {
    let n = normal.norm();
    if n == 0.0 || !n.is_finite() || !offset.is_finite() {
        return Err(Error::InvalidSet(
            "normal must be nonzero and finite".into(),
        ));
    }
    Ok((normal.scale(1.0 / n), offset / n))
}

fn check_finite(p: &Point) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSet("non-finite coordinate".into()))
    }
}

impl ConvexSet {
    pub fn halfspace(normal: impl Into<Point>, offset: f64) -> Result<Self> {
        let (normal, offset) = unit_normal(normal.into(), offset)?;
        Ok(ConvexSet::Halfspace(Halfspace { normal, offset }))
    }

    pub fn hyperplane(normal: impl Into<Point>, offset: f64) -> Result<Self> {
        let (normal, offset) = unit_normal(normal.into(), offset)?;
        Ok(ConvexSet::Hyperplane(Hyperplane { normal, offset }))
    }

    /// `base + span(directions)`; the directions are orthonormalised and
    /// dependent ones dropped.
    pub fn affine(base: impl Into<Point>, directions: Vec<Point>) -> Result<Self> {
        let base = base.into();
        check_finite(&base)?;
        let mut basis: Vec<Point> = Vec::new();
        for d in directions {
            d.ensure_dim(base.dim())?;
            check_finite(&d)?;
            let scale = d.norm();
            let mut r = d;
            for e in &basis {
                r = r.axpy(-r.dot(e), e);
            }
            if r.norm() > 1e-12 * scale.max(1.0) {
                basis.push(r.normalized()?);
            }
        }
        Ok(ConvexSet::AffineSubspace(AffineSubspace { base, basis }))
    }

    /// The linear span of `directions`.
    pub fn subspace(dim: usize, directions: Vec<Point>) -> Result<Self> {
        Self::affine(Point::zeros(dim), directions)
    }

    pub fn ball(center: impl Into<Point>, radius: f64) -> Result<Self> {
        let center = center.into();
        check_finite(&center)?;
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet(format!(
                "ball radius {radius} must be >= 0"
            )));
        }
        Ok(ConvexSet::Ball(Ball { center, radius }))
    }

    pub fn singleton(p: impl Into<Point>) -> Result<Self> {
        Self::vpolytope(vec![p.into()])
    }

    /// Convex hull of the given vertices (deduplicated).
    pub fn vpolytope(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidSet(
                "polytope needs at least one vertex".into(),
            ));
        };
        let dim = first.dim();
        let mut uniq: Vec<Point> = Vec::with_capacity(vertices.len());
        for v in vertices {
            v.ensure_dim(dim)?;
            check_finite(&v)?;
            if !uniq.iter().any(|u| u.dist(&v) <= 1e-12 * (1.0 + v.norm())) {
                uniq.push(v);
            }
        }
        Ok(ConvexSet::VPolytope(VPolytope { vertices: uniq }))
    }

    /// Axis-aligned box `[lo, hi]` as a polytope.
    pub fn box_polytope(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidSet("box has lo > hi".into()));
        }
        let d = lo.len();
        let vertices = (0..1usize << d)
            .map(|mask| {
                Point::new(
                    (0..d)
                        .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                        .collect(),
                )
            })
            .collect();
        Self::vpolytope(vertices)
    }

    /// `{x : <n_i, x> >= b_i for all i}`. Fails unless a feasible point exists.
    pub fn hpolyhedron(halfspaces: Vec<(Point, f64)>) -> Result<Self> {
        let Some((first, _)) = halfspaces.first() else {
            return Err(Error::InvalidSet(
                "polyhedron needs at least one halfspace".into(),
            ));
        };
        let dim = first.dim();
        let mut normals = Vec::with_capacity(halfspaces.len());
        let mut offsets = Vec::with_capacity(halfspaces.len());
        for (n, b) in halfspaces {
            n.ensure_dim(dim)?;
            let (n, b) = unit_normal(n, b)?;
            normals.push(n);
            offsets.push(b);
        }
        let witness =
            polyhedron::project_polyhedron(&normals, &offsets, &Point::zeros(dim), POLYHEDRON_CAP)?;
        Ok(ConvexSet::HPolyhedron(HPolyhedron {
            normals,
            offsets,
            witness,
        }))
    }

    pub fn wedge(
        apex: impl Into<Point>,
        line_through: impl Into<Point>,
        ray_through: impl Into<Point>,
    ) -> Result<Self> {
        Ok(ConvexSet::Wedge(Wedge::from_line_and_ray(
            apex.into(),
            line_through.into(),
            ray_through.into(),
        )?))
    }

    /// `self + shift`.
    pub fn translate(self, shift: impl Into<Point>) -> Result<Self> {
        let shift = shift.into();
        shift.ensure_dim(self.dim())?;
        check_finite(&shift)?;
        Ok(match self {
            ConvexSet::Wedge(w) => ConvexSet::Wedge(w.translated(&shift)),
            ConvexSet::Translate(t) => ConvexSet::Translate(Translate {
                shift: &t.shift + &shift,
                inner: t.inner,
            }),
            other => ConvexSet::Translate(Translate {
                inner: Box::new(other),
                shift,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace(h) => h.normal.dim(),
            ConvexSet::Hyperplane(h) => h.normal.dim(),
            ConvexSet::AffineSubspace(a) => a.base.dim(),
            ConvexSet::Ball(b) => b.center.dim(),
            ConvexSet::VPolytope(p) => p.vertices[0].dim(),
            ConvexSet::HPolyhedron(p) => p.witness.dim(),
            ConvexSet::Wedge(w) => w.dim(),
            ConvexSet::Translate(t) => t.shift.dim(),
        }
    }

    /// Tolerance appropriate for this variant's projection.
    pub fn default_tol(&self) -> f64 {
        match self {
            ConvexSet::VPolytope(_) | ConvexSet::HPolyhedron(_) => ITERATIVE_TOL,
            ConvexSet::Translate(t) => t.inner.default_tol(),
            _ => CLOSED_FORM_TOL,
        }
    }

    /// Vertex list for polytopes (including translated polytopes).
    pub fn vertices(&self) -> Option<Vec<Point>> {
        match self {
            ConvexSet::VPolytope(p) => Some(p.vertices.clone()),
            ConvexSet::Translate(t) => t
                .inner
                .vertices()
                .map(|vs| vs.iter().map(|v| v + &t.shift).collect()),
            ConvexSet::AffineSubspace(a) if a.basis.is_empty() => Some(vec![a.base.clone()]),
            ConvexSet::Ball(b) if b.radius == 0.0 => Some(vec![b.center.clone()]),
            _ => None,
        }
    }

    /// Euclidean projection of `x`. Within `tol` of the exact projection.
    pub fn project(&self, x: &Point, tol: f64) -> Result<Point> {
        x.ensure_dim(self.dim())?;
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {tol} must be positive"
            )));
        }
        match self {
            ConvexSet::Halfspace(h) => {
                let s = h.offset - h.normal.dot(x);
                Ok(if s > 0.0 {
                    x.axpy(s, &h.normal)
                } else {
                    x.clone()
                })
            }
            ConvexSet::Hyperplane(h) => Ok(x.axpy(h.offset - h.normal.dot(x), &h.normal)),
            ConvexSet::AffineSubspace(a) => {
                let d = x - &a.base;
                let mut p = a.base.clone();
                for e in &a.basis {
                    p = p.axpy(d.dot(e), e);
                }
                Ok(p)
            }
            ConvexSet::Ball(b) => {
                let d = x - &b.center;
                let n = d.norm();
                Ok(if n <= b.radius {
                    x.clone()
                } else {
                    b.center.axpy(b.radius / n, &d)
                })
            }
            ConvexSet::VPolytope(p) => {
                if p.vertices.len() == 1 {
                    return Ok(p.vertices[0].clone());
                }
                Ok(hull::project_onto_hull(&p.vertices, x, tol, HULL_CAP)?.point)
            }
            ConvexSet::HPolyhedron(p) => {
                polyhedron::project_polyhedron(&p.normals, &p.offsets, x, POLYHEDRON_CAP)
            }
            ConvexSet::Wedge(w) => w.project(x),
            ConvexSet::Translate(t) => Ok(&t.inner.project(&(x - &t.shift), tol)? + &t.shift),
        }
    }

    /// Projection with the variant's default tolerance.
    pub fn proj(&self, x: &Point) -> Result<Point> {
        self.project(x, self.default_tol())
    }

    /// Distance from `x` to the set.
    pub fn dist(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.proj(x)?))
    }

    /// `dist(x, S) <= tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.ensure_dim(self.dim())?;
        match self {
            ConvexSet::VPolytope(p) => hull::hull_contains(&p.vertices, x, tol, HULL_CAP),
            _ => Ok(self.dist(x)? <= tol),
        }
    }

    /// A point `s` of the set maximising `<s, u>`.
    pub fn support_point(&self, u: &Point) -> Result<Point> {
        u.ensure_dim(self.dim())?;
        let u = u.normalized()?;
        const PAR: f64 = 1e-12;
        match self {
            ConvexSet::Halfspace(h) => {
                let c = u.dot(&h.normal);
                if c < 0.0 && u.axpy(-c, &h.normal).norm() <= PAR {
                    Ok(h.normal.scale(h.offset))
                } else {
                    Err(Error::Unbounded)
                }
            }
            ConvexSet::Hyperplane(h) => {
                let c = u.dot(&h.normal);
                if u.axpy(-c, &h.normal).norm() <= PAR {
                    Ok(h.normal.scale(h.offset))
                } else {
                    Err(Error::Unbounded)
                }
            }
            ConvexSet::AffineSubspace(a) => {
                if a.basis.iter().all(|e| e.dot(&u).abs() <= PAR) {
                    Ok(a.base.clone())
                } else {
                    Err(Error::Unbounded)
                }
            }
            ConvexSet::Ball(b) => Ok(b.center.axpy(b.radius, &u)),
            ConvexSet::VPolytope(p) => Ok(p
                .vertices
                .iter()
                .max_by(|a, b| a.dot(&u).total_cmp(&b.dot(&u)))
                .unwrap()
                .clone()),
            ConvexSet::HPolyhedron(p) => support_by_projection(self, &p.witness, &u),
            ConvexSet::Wedge(w) => {
                let (e1, e2) = w.chart_basis();
                if u.dot(e1).abs() <= PAR && u.dot(e2).abs() <= PAR {
                    // Normal to the plane: the whole region attains the sup.
                    return Ok(w.embed(w.project_chart([0.0, 0.0]).unwrap()));
                }
                support_by_projection(self, w.origin(), &u)
            }
            ConvexSet::Translate(t) => Ok(&t.inner.support_point(&u)? + &t.shift),
        }
    }

    /// `sup_{s in S} <s, u>`.
    pub fn support_value(&self, u: &Point) -> Result<f64> {
        let s = self.support_point(u)?;
        Ok(s.dot(&u.normalized()?))
    }

    /// Whether every supporting hyperplane touches the set in a single point.
    pub fn is_strictly_convex(&self) -> bool {
        match self {
            ConvexSet::Ball(b) => b.radius > 0.0,
            ConvexSet::Translate(t) => t.inner.is_strictly_convex(),
            _ => false,
        }
    }

    /// Whether the set is bounded (sup finite along every ± coordinate axis).
    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexSet::Ball(_) | ConvexSet::VPolytope(_) => true,
            ConvexSet::Translate(t) => t.inner.is_bounded(),
            ConvexSet::AffineSubspace(a) => a.basis.is_empty(),
            ConvexSet::Halfspace(_) | ConvexSet::Hyperplane(_) => false,
            _ => {
                let d = self.dim();
                (0..d).all(|i| {
                    let e = Point::basis(d, i);
                    self.support_point(&e).is_ok() && self.support_point(&(-&e)).is_ok()
                })
            }
        }
    }
}

/// Support point for polyhedral sets with exact projections: along the ray
/// `w + t u` the projection settles on the maximising face once `t` is large
/// enough; if the support value keeps growing the set is unbounded along `u`.
fn support_by_projection(set: &ConvexSet, anchor: &Point, u: &Point) -> Result<Point> {
    let scale = 1.0 + anchor.norm();
    let mut t = scale;
    let mut prev_val = set.proj(&anchor.axpy(t, u))?.dot(u);
    for _ in 0..48 {
        t *= 2.0;
        let cur = set.proj(&anchor.axpy(t, u))?;
        let val = cur.dot(u);
        if (val - prev_val).abs() <= 1e-11 * (scale + val.abs()) {
            return Ok(cur);
        }
        prev_val = val;
    }
    Err(Error::Unbounded)
}

impl Halfspace {
    pub fn normal(&self) -> &Point {
        &self.normal
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl Hyperplane {
    pub fn normal(&self) -> &Point {
        &self.normal
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl AffineSubspace {
    pub fn base(&self) -> &Point {
        &self.base
    }
    pub fn basis(&self) -> &[Point] {
        &self.basis
    }
}

impl Ball {
    pub fn center(&self) -> &Point {
        &self.center
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl VPolytope {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
}

impl HPolyhedron {
    pub fn halfspaces(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.normals.iter().zip(self.offsets.iter().copied())
    }
    pub fn witness(&self) -> &Point {
        &self.witness
    }
}

impl Translate {
    pub fn inner(&self) -> &ConvexSet {
        &self.inner
    }
    pub fn shift(&self) -> &Point {
        &self.shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> ConvexSet {
        ConvexSet::vpolytope(vec![
            Point::from([1.0, 1.0]),
            Point::from([-1.0, 1.0]),
            Point::from([1.0, 0.0]),
            Point::from([-1.0, 0.0]),
        ])
        .unwrap()
    }

    fn close(a: &Point, b: &Point, tol: f64) -> bool {
        a.dist(b) <= tol
    }

    #[test]
    fn project_examples() {
        let p = rect().proj(&Point::from([0.0, 2.0])).unwrap();
        assert!(close(&p, &Point::from([0.0, 1.0]), 1e-12));
        let x = Point::from([0.3, 0.4]);
        assert_eq!(rect().proj(&x).unwrap(), x);
        let disc = ConvexSet::ball([0.0, 0.0], 1.0).unwrap();
        let p = disc.proj(&Point::from([3.0, 4.0])).unwrap();
        assert!(close(&p, &Point::from([0.6, 0.8]), 1e-15));
    }

    #[test]
    fn contains_examples() {
        assert!(rect().contains(&Point::from([0.0, 0.5]), 0.0).unwrap());
        let disc = ConvexSet::ball([0.0, 0.0], 1.0).unwrap();
        assert!(!disc
            .contains(&Point::from([1.0 + 1e-3, 0.0]), 1e-6)
            .unwrap());
        let w = ConvexSet::wedge([2.0, -1.0, 0.0], [0.0, 1.0, 1.0], [3.0, 0.0, 0.0]).unwrap();
        assert!(w.contains(&Point::from([1.0, 0.0, 0.5]), 1e-9).unwrap());
    }

    #[test]
    fn support_examples() {
        let s = rect().support_point(&Point::from([0.0, 1.0])).unwrap();
        assert_eq!(s[1], 1.0);
        let b = ConvexSet::ball([0.0, 0.0], 2.0).unwrap();
        assert!(close(
            &b.support_point(&Point::from([1.0, 0.0])).unwrap(),
            &Point::from([2.0, 0.0]),
            0.0
        ));
        let h = ConvexSet::halfspace([0.0, 1.0], 0.0).unwrap();
        assert!(matches!(
            h.support_point(&Point::from([0.0, 1.0])),
            Err(Error::Unbounded)
        ));
        // y <= 0 is bounded above in y.
        let h = ConvexSet::halfspace([0.0, -1.0], 0.0).unwrap();
        assert_eq!(h.support_value(&Point::from([0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e = rect().proj(&Point::from([0.0, 0.0, 0.0]));
        assert!(matches!(
            e,
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn degenerate_polytope_is_a_singleton() {
        let s = ConvexSet::vpolytope(vec![Point::from([1.0, 2.0]); 3]).unwrap();
        assert_eq!(
            s.proj(&Point::from([5.0, 5.0])).unwrap(),
            Point::from([1.0, 2.0])
        );
    }

    #[test]
    fn hpolyhedron_support_and_boundedness() {
        // Triangle x >= 0, y >= 0, x + y <= 1.
        let tri = ConvexSet::hpolyhedron(vec![
            (Point::from([1.0, 0.0]), 0.0),
            (Point::from([0.0, 1.0]), 0.0),
            (Point::from([-1.0, -1.0]), -1.0),
        ])
        .unwrap();
        assert!(tri.is_bounded());
        let s = tri.support_point(&Point::from([1.0, 0.2])).unwrap();
        assert!(close(&s, &Point::from([1.0, 0.0]), 1e-9));
        let quadrant = ConvexSet::hpolyhedron(vec![
            (Point::from([1.0, 0.0]), 0.0),
            (Point::from([0.0, 1.0]), 0.0),
        ])
        .unwrap();
        assert!(!quadrant.is_bounded());
        assert!(matches!(
            quadrant.support_point(&Point::from([1.0, 1.0])),
            Err(Error::Unbounded)
        ));
    }

    #[test]
    fn infeasible_hpolyhedron_fails_at_construction() {
        let r = ConvexSet::hpolyhedron(vec![
            (Point::from([1.0, 0.0]), 1.0),
            (Point::from([-1.0, 0.0]), 0.0),
        ]);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn translate_shifts_projection() {
        let t = rect().translate([0.0, -5.0]).unwrap();
        let p = t.proj(&Point::from([0.0, 0.0])).unwrap();
        assert!(close(&p, &Point::from([0.0, -4.0]), 1e-12));
    }

    #[test]
    fn affine_orthonormalises() {
        let s = ConvexSet::subspace(
            3,
            vec![
                Point::from([2.0, 0.0, 0.0]),
                Point::from([1.0, 1.0, 0.0]),
                Point::from([3.0, 1.0, 0.0]),
            ],
        )
        .unwrap();
        let p = s.proj(&Point::from([1.0, 2.0, 3.0])).unwrap();
        assert!(close(&p, &Point::from([1.0, 2.0, 0.0]), 1e-14));
        if let ConvexSet::AffineSubspace(a) = &s {
            assert_eq!(a.basis().len(), 2);
        }
    }
}

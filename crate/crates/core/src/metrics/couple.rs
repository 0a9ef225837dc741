use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dykstra::dykstra_project;
use super::faces::{exposed_nearest_set, planar_nearest_set};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::sets::ConvexSet;

#[derive(Clone, Debug)]
pub struct DisplacementOptions {
    pub tol: f64,
    pub cap: usize,
    /// Starting point of the alternating-projections run; the origin if unset.
    pub start: Option<Point>,
}

impl Default for DisplacementOptions {
    fn default() -> Self {
        DisplacementOptions {
            tol: 1e-10,
            cap: 100_000,
            start: None,
        }
    }
}

/// `v = P_{cl(B−A)}(0)`, read off as the limit of `P_B(c) − c` along an
/// unperturbed alternating-projections run.
pub fn displacement_vector(
    a: &ConvexSet,
    b: &ConvexSet,
    opts: &DisplacementOptions,
) -> Result<Point> {
    Ok(displacement_run(a, b, opts)?.0)
}

/// Returns `(v, c)` with `c` the terminal iterate in `A`.
fn displacement_run(
    a: &ConvexSet,
    b: &ConvexSet,
    opts: &DisplacementOptions,
) -> Result<(Point, Point)> {
    let dim = a.dim();
    if b.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: b.dim(),
        });
    }
    let start = match &opts.start {
        Some(s) => {
            s.ensure_dim(dim)?;
            s.clone()
        }
        None => Point::zeros(dim),
    };
    let check = 10.0 * opts.tol.max(a.default_tol()).max(b.default_tol());
    let mut c = a.proj(&start)?;
    let mut w_prev: Option<Point> = None;
    for _ in 0..opts.cap {
        let d = b.proj(&c)?;
        let w = &d - &c;
        let next = a.proj(&d)?;
        if let Some(wp) = &w_prev {
            // Cauchy difference vectors, cross-checked against the distance
            // from the terminal point of A to B.
            if w.dist(wp) <= opts.tol && (w.norm() - next.dist(&b.proj(&next)?)).abs() <= check {
                return Ok((w, c));
            }
        }
        w_prev = Some(w);
        c = next;
    }
    Err(Error::non_convergent(
        "displacement vector",
        opts.cap as u64,
    ))
}

/// How the nearest set `E` (or `F`) is known.
#[derive(Clone, Debug, PartialEq)]
pub enum NearestSet {
    Analytic(ConvexSet),
    /// Computed exactly: by clipping or exposed faces for polytopes, or as the
    /// single point a strictly convex set exposes.
    Polytope(ConvexSet),
    /// Only as an intersection, reached through Dykstra's scheme.
    Implicit,
}

#[derive(Clone, Debug)]
pub struct CoupleOptions {
    pub displacement: DisplacementOptions,
    pub e_analytic: Option<ConvexSet>,
    /// Number of sampled points of `E` checked against the nearest-point identities.
    pub validation_samples: usize,
    /// Samples are projections onto `E` of points within this radius of an anchor in `E`.
    pub sample_radius: f64,
    pub seed: u64,
    pub dykstra_tol: f64,
    pub dykstra_cap: usize,
}

impl Default for CoupleOptions {
    fn default() -> Self {
        CoupleOptions {
            displacement: DisplacementOptions::default(),
            e_analytic: None,
            validation_samples: 32,
            sample_radius: 3.0,
            seed: 17,
            dykstra_tol: 1e-11,
            dykstra_cap: 1_000_000,
        }
    }
}

/// A pair `(A, B)` together with its displacement vector `v` and the
/// nearest sets `E = A ∩ (B − v)`, `F = B ∩ (A + v) = E + v`.
#[derive(Clone, Debug)]
pub struct Couple {
    a: ConvexSet,
    b: ConvexSet,
    v: Point,
    d_ab: f64,
    e: NearestSet,
    f: NearestSet,
    b_minus_v: ConvexSet,
    a_plus_v: ConvexSet,
    anchor: Point,
    dykstra_tol: f64,
    dykstra_cap: usize,
}

/// Builds a couple and checks `P_B e = e + v`, `P_A(e + v) = e` and
/// `P_A P_B e = e` on sampled points of `E`.
pub fn make_couple(a: ConvexSet, b: ConvexSet, opts: &CoupleOptions) -> Result<Couple> {
    let dim = a.dim();
    let vertices = a.vertices().zip(b.vertices());
    if opts.e_analytic.is_none() && dim == 2 {
        if let Some((v, e)) = vertices
            .as_ref()
            .and_then(|(va, vb)| planar_nearest_set(va, vb))
        {
            let start = opts
                .displacement
                .start
                .clone()
                .unwrap_or_else(|| Point::zeros(dim));
            let anchor = e.proj(&start)?;
            let f = e.clone().translate(v.clone())?;
            return Couple::assemble(
                a,
                b,
                v,
                NearestSet::Polytope(e),
                NearestSet::Polytope(f),
                anchor,
                opts,
            );
        }
    }
    let (v, anchor) = displacement_run(&a, &b, &opts.displacement)?;
    let (e, f) = match &opts.e_analytic {
        Some(set) => {
            if set.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: set.dim(),
                });
            }
            let f = set.clone().translate(v.clone())?;
            (NearestSet::Analytic(set.clone()), NearestSet::Analytic(f))
        }
        None => {
            let exposed = match vertices.and_then(|(va, vb)| exposed_nearest_set(&va, &vb, &v)) {
                Some(e) => Some(e),
                None => exposed_point(&a, &b, &v, &anchor)?,
            };
            match exposed {
                Some(e) => {
                    let f = e.clone().translate(v.clone())?;
                    (NearestSet::Polytope(e), NearestSet::Polytope(f))
                }
                None => (NearestSet::Implicit, NearestSet::Implicit),
            }
        }
    };
    Couple::assemble(a, b, v, e, f, anchor, opts)
}

/// With `v` clearly nonzero, `E` lies in the face of `A` exposed by `v` and
/// `E + v` in the face of `B` exposed by `−v`; a strictly convex set exposes
/// a single point, which is then all of `E`.
fn exposed_point(
    a: &ConvexSet,
    b: &ConvexSet,
    v: &Point,
    anchor: &Point,
) -> Result<Option<ConvexSet>> {
    if v.norm() <= 1e-6 * (1.0 + anchor.norm()) {
        return Ok(None);
    }
    let e = if a.is_strictly_convex() {
        a.support_point(v)?
    } else if b.is_strictly_convex() {
        &b.support_point(&-v)? - v
    } else {
        return Ok(None);
    };
    Ok(Some(ConvexSet::vpolytope(vec![e])?))
}

impl Couple {
    fn assemble(
        a: ConvexSet,
        b: ConvexSet,
        v: Point,
        e: NearestSet,
        f: NearestSet,
        anchor: Point,
        opts: &CoupleOptions,
    ) -> Result<Couple> {
        let couple = Couple {
            b_minus_v: b.clone().translate(-&v)?,
            a_plus_v: a.clone().translate(v.clone())?,
            d_ab: v.norm(),
            a,
            b,
            v,
            e,
            f,
            anchor,
            dykstra_tol: opts.dykstra_tol,
            dykstra_cap: opts.dykstra_cap,
        };
        couple.validate(opts)?;
        Ok(couple)
    }
}

impl Couple {
    pub fn a(&self) -> &ConvexSet {
        &self.a
    }

    pub fn b(&self) -> &ConvexSet {
        &self.b
    }

    pub fn v(&self) -> &Point {
        &self.v
    }

    /// `d(A, B) = ‖v‖`.
    pub fn d_ab(&self) -> f64 {
        self.d_ab
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn e(&self) -> &NearestSet {
        &self.e
    }

    pub fn f(&self) -> &NearestSet {
        &self.f
    }

    /// `B − v`.
    pub fn b_minus_v(&self) -> &ConvexSet {
        &self.b_minus_v
    }

    /// `A + v`.
    pub fn a_plus_v(&self) -> &ConvexSet {
        &self.a_plus_v
    }

    /// A point of `E` found while computing `v`.
    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn project_e(&self, x: &Point) -> Result<Point> {
        match &self.e {
            NearestSet::Analytic(s) | NearestSet::Polytope(s) => s.proj(x),
            NearestSet::Implicit => self.project_e_dykstra(x),
        }
    }

    pub fn project_f(&self, x: &Point) -> Result<Point> {
        match &self.f {
            NearestSet::Analytic(s) | NearestSet::Polytope(s) => s.proj(x),
            NearestSet::Implicit => self.project_f_dykstra(x),
        }
    }

    /// Projection onto `E = A ∩ (B − v)` by Dykstra, regardless of any analytic form.
    pub fn project_e_dykstra(&self, x: &Point) -> Result<Point> {
        dykstra_project(
            &[&self.a, &self.b_minus_v],
            x,
            self.dykstra_tol,
            self.dykstra_cap,
        )
    }

    pub fn project_f_dykstra(&self, x: &Point) -> Result<Point> {
        dykstra_project(
            &[&self.b, &self.a_plus_v],
            x,
            self.dykstra_tol,
            self.dykstra_cap,
        )
    }

    pub fn dist_to_e(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.project_e(x)?))
    }

    pub fn dist_to_f(&self, x: &Point) -> Result<f64> {
        Ok(x.dist(&self.project_f(x)?))
    }

    /// Seeded points of `E`: projections of points drawn uniformly from the
    /// ball of the given radius around the anchor.
    pub fn sample_e(&self, count: usize, radius: f64, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let mut out = Vec::with_capacity(count + 1);
        out.push(self.project_e(&self.anchor)?);
        while out.len() <= count {
            let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let u = Point::new(u);
            if u.norm() > 1.0 {
                continue;
            }
            out.push(self.project_e(&self.anchor.axpy(radius, &u))?);
        }
        Ok(out)
    }

    /// Tolerance for the nearest-point identities, given the projection accuracy.
    pub fn identity_tol(&self) -> f64 {
        10.0 * self
            .a
            .default_tol()
            .max(self.b.default_tol())
            .max(self.dykstra_tol)
    }

    /// Largest violation of the nearest-point identities over `points` (assumed in `E`).
    pub fn identity_residual(&self, points: &[Point]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for e in points {
            let f = e + &self.v;
            let pb = self.b.proj(e)?;
            worst = worst.max(pb.dist(&f));
            worst = worst.max(self.a.proj(&f)?.dist(e));
            worst = worst.max(self.a.proj(&pb)?.dist(e));
        }
        Ok(worst)
    }

    fn validate(&self, opts: &CoupleOptions) -> Result<()> {
        let thr = self.identity_tol().max(10.0 * opts.displacement.tol);
        let gap = (self.d_ab - self.b.dist(&self.anchor)?).abs();
        if gap > thr {
            return Err(Error::ValidationFailure(format!(
                "|v| = {} differs from dist(a*, B) by {gap:e}",
                self.d_ab
            )));
        }
        let pts = self.sample_e(opts.validation_samples, opts.sample_radius, opts.seed)?;
        let r = self.identity_residual(&pts)?;
        if r > thr {
            return Err(Error::ValidationFailure(format!(
                "nearest-point identities violated by {r:e} (threshold {thr:e})"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(lo: [f64; 2], hi: [f64; 2]) -> ConvexSet {
        ConvexSet::box_polytope(&lo, &hi).unwrap()
    }

    fn trapezoids() -> (ConvexSet, ConvexSet) {
        let a = ConvexSet::vpolytope(
            [[1.0, 1.0], [-1.0, 1.0], [1.0, 0.0], [-1.0, 0.0]]
                .map(Point::from)
                .to_vec(),
        )
        .unwrap();
        let b = ConvexSet::vpolytope(
            [[1.0, -1.0], [-1.0, -1.0], [1.0, 0.0], [-1.0, 0.0]]
                .map(Point::from)
                .to_vec(),
        )
        .unwrap();
        (a, b)
    }

    #[test]
    fn displacement_examples() {
        let o = DisplacementOptions::default();
        let (a, b) = trapezoids();
        assert!(displacement_vector(&a, &b, &o).unwrap().norm() < 1e-12);
        let a = rect([-1.0, 1.0], [1.0, 2.0]);
        let b = rect([-1.0, -2.0], [1.0, -1.0]);
        let v = displacement_vector(&a, &b, &o).unwrap();
        assert!(v.dist(&Point::from([0.0, -2.0])) < 1e-9);
    }

    #[test]
    fn disc_against_distant_halfplane() {
        let disc = ConvexSet::ball(Point::from([0.0, 0.0]), 1.0).unwrap();
        let half =
            ConvexSet::halfspace(Point::from([1.0, 1.0]).normalized().unwrap(), 3.0).unwrap();
        let c = make_couple(disc, half, &CoupleOptions::default()).unwrap();
        let touch = Point::from([1.0, 1.0]).normalized().unwrap();
        assert!((c.d_ab() - 2.0).abs() < 1e-9);
        assert!(c.project_e(&Point::from([-4.0, 7.0])).unwrap().dist(&touch) < 1e-9);
        assert!(matches!(c.e(), NearestSet::Polytope(_)));
    }

    #[test]
    fn disjoint_rectangles_couple() {
        let a = rect([-1.0, 1.0], [1.0, 2.0]);
        let b = rect([-1.0, -2.0], [1.0, -1.0]);
        let c = make_couple(a, b, &CoupleOptions::default()).unwrap();
        assert!((c.d_ab() - 2.0).abs() < 1e-9);
        // E is the bottom edge of A; F the top edge of B.
        assert!((c.dist_to_e(&Point::from([0.0, 0.0])).unwrap() - 1.0).abs() < 1e-7);
        assert!((c.dist_to_e(&Point::from([3.0, 1.0])).unwrap() - 2.0).abs() < 1e-7);
        assert!((c.dist_to_f(&Point::from([0.0, 0.0])).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn trapezoid_couple_with_analytic_e() {
        let (a, b) = trapezoids();
        let seg =
            ConvexSet::vpolytope(vec![Point::from([-1.0, 0.0]), Point::from([1.0, 0.0])]).unwrap();
        let opts = CoupleOptions {
            e_analytic: Some(seg),
            ..CoupleOptions::default()
        };
        let c = make_couple(a, b, &opts).unwrap();
        assert!(c.v().norm() < 1e-12);
        assert!((c.dist_to_e(&Point::from([0.0, 2.0])).unwrap() - 2.0).abs() < 1e-9);
        assert!(c.dist_to_e(&Point::from([0.3, 0.0])).unwrap() < 1e-12);
        // Dykstra agrees with the analytic descriptor.
        let x = Point::from([2.5, 1.5]);
        assert!(
            c.project_e_dykstra(&x)
                .unwrap()
                .dist(&c.project_e(&x).unwrap())
                < 1e-6
        );
    }

    #[test]
    fn wrong_analytic_e_is_rejected() {
        let (a, b) = trapezoids();
        let wrong = ConvexSet::singleton([0.0, 0.5]).unwrap();
        let opts = CoupleOptions {
            e_analytic: Some(wrong),
            ..CoupleOptions::default()
        };
        assert!(matches!(
            make_couple(a, b, &opts),
            Err(Error::ValidationFailure(_))
        ));
    }

    #[test]
    fn self_couple() {
        let a = ConvexSet::ball([0.5, 0.5], 1.0).unwrap();
        let c = make_couple(a.clone(), a.clone(), &CoupleOptions::default()).unwrap();
        assert_eq!(c.d_ab(), 0.0);
        let x = Point::from([3.0, 0.5]);
        assert!((c.dist_to_e(&x).unwrap() - a.dist(&x).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn halfplane_and_parallel_line() {
        let a = ConvexSet::halfspace([0.0, 1.0], 1.0).unwrap();
        let b = ConvexSet::hyperplane([0.0, 1.0], 0.0).unwrap();
        let v = displacement_vector(&a, &b, &DisplacementOptions::default()).unwrap();
        assert!(v.dist(&Point::from([0.0, -1.0])) < 1e-12);
    }

    #[test]
    fn slow_run_hits_cap() {
        let a = ConvexSet::ball([0.0, 0.0], 1.0).unwrap();
        let b = ConvexSet::halfspace([0.0, 1.0], 1.0).unwrap();
        let opts = DisplacementOptions {
            tol: 1e-12,
            cap: 50,
            start: Some(Point::from([5.0, 0.0])),
        };
        assert!(matches!(
            displacement_vector(&a, &b, &opts),
            Err(Error::NonConvergent { .. })
        ));
    }
}

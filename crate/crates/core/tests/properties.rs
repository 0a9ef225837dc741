mod oracle;

use proptest::prelude::*;

use feasilab::dynamics::{run_ap, RunOptions, Trace};
use feasilab::metrics::{aw_gap, dykstra_project, make_couple, CoupleOptions, GapKind, GapSampler};
use feasilab::perturbations::{Rate, VertexJitterSchedule};
use feasilab::regularity::{contraction_factor, modulus_of_convexity};
use feasilab::{ConvexSet, Point, SetDescription};

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), dim).prop_map(Point::new)
}

fn unit(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0..1.0f64, dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| Point::new(v).normalized().unwrap())
}

fn polygon() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((coord(), coord()), 3..8)
        .prop_map(|v| oracle::hull2(&v.into_iter().map(|(x, y)| [x, y]).collect::<Vec<_>>()))
        .prop_filter("non-degenerate", |h| h.len() >= 3)
}

fn vpoly(h: &[[f64; 2]]) -> ConvexSet {
    ConvexSet::vpolytope(h.iter().map(|v| Point::new(v.to_vec())).collect()).unwrap()
}

/// Sets of every kind in dimension 2 or 3.
fn any_set() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (point(2), 0.1..2.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
        (point(3), 0.1..2.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
        (unit(3), coord()).prop_map(|(n, b)| ConvexSet::halfspace(n, b).unwrap()),
        (unit(2), coord()).prop_map(|(n, b)| ConvexSet::hyperplane(n, b).unwrap()),
        (point(3), unit(3), unit(3))
            .prop_map(|(b, u, w)| ConvexSet::affine(b, vec![u, w]).unwrap()),
        polygon().prop_map(|h| vpoly(&h)),
        prop::collection::vec(point(3), 1..7).prop_map(|v| ConvexSet::vpolytope(v).unwrap()),
        (point(2), point(2)).prop_map(|(a, b)| {
            let lo: Vec<f64> = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x.min(*y) - 0.1)
                .collect();
            let hi: Vec<f64> = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x.max(*y) + 0.1)
                .collect();
            ConvexSet::box_polytope(&lo, &hi).unwrap()
        }),
        (unit(3), unit(3), coord(), coord()).prop_map(|(n1, n2, b1, b2)| {
            // always contains the point solving both constraints with slack
            ConvexSet::hpolyhedron(vec![(n1, b1.min(0.0)), (n2, b2.min(0.0))]).unwrap()
        }),
        (1.0..4.0f64).prop_map(|x0| feasilab::perturbations::make_wedge(1, x0).unwrap()),
        (point(2), 0.1..2.0f64, point(2))
            .prop_map(|(c, r, s)| ConvexSet::ball(c, r).unwrap().translate(s).unwrap()),
    ]
}

fn set_and_points(k: usize) -> impl Strategy<Value = (ConvexSet, Vec<Point>)> {
    any_set().prop_flat_map(move |s| {
        let d = s.dim();
        (Just(s), prop::collection::vec(point(d), k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_firmly_nonexpansive((s, xs) in set_and_points(2)) {
        let (px, py) = (s.proj(&xs[0]).unwrap(), s.proj(&xs[1]).unwrap());
        let lhs = (&px - &py).norm_sq();
        let rhs = (&px - &py).dot(&(&xs[0] - &xs[1]));
        prop_assert!(lhs <= rhs + 1e-7, "{lhs} > {rhs}");
    }

    #[test]
    fn projection_is_idempotent((s, xs) in set_and_points(1)) {
        let p = s.proj(&xs[0]).unwrap();
        let q = s.proj(&p).unwrap();
        prop_assert!(p.dist(&q) <= 1e-7, "moved by {}", p.dist(&q));
        prop_assert!(s.contains(&p, 1e-7).unwrap());
    }

    #[test]
    fn projection_satisfies_variational_inequality((s, xs) in set_and_points(4)) {
        let p = s.proj(&xs[0]).unwrap();
        for z in &xs[1..] {
            let z = s.proj(z).unwrap();
            let v = (&xs[0] - &p).dot(&(&z - &p));
            prop_assert!(v <= 1e-6 * (1.0 + xs[0].norm() + z.norm()), "<x − Px, z − Px> = {v}");
        }
    }

    #[test]
    fn polygon_distance_matches_exact_geometry(h in polygon(), x in point(2)) {
        let want = oracle::polygon_dist(&h, [x[0], x[1]]);
        let got = vpoly(&h).dist(&x).unwrap();
        prop_assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
    }

    #[test]
    fn localized_hausdorff_is_a_metric_on_small_polygons(a in polygon(), b in polygon(), c in polygon()) {
        let s = GapSampler::default();
        let (a, b, c) = (vpoly(&a), vpoly(&b), vpoly(&c));
        let ab = aw_gap(&a, &b, 10, &s).unwrap();
        prop_assert_eq!(ab.kind, GapKind::Exact);
        let ba = aw_gap(&b, &a, 10, &s).unwrap();
        prop_assert!((ab.value - ba.value).abs() <= 1e-9);
        prop_assert_eq!(aw_gap(&a, &a, 10, &s).unwrap().value, 0.0);
        let (bc, ac) = (aw_gap(&b, &c, 10, &s).unwrap(), aw_gap(&a, &c, 10, &s).unwrap());
        prop_assert!(ac.value <= ab.value + bc.value + 1e-9);
    }

    #[test]
    fn dykstra_lands_in_every_set_and_is_optimal(
        c1 in point(2), r1 in 0.5..2.0f64, n in unit(2), x in point(2), zs in prop::collection::vec(point(2), 3)
    ) {
        let ball = ConvexSet::ball(c1.clone(), r1).unwrap();
        // halfspace through the ball's centre, so the intersection has interior
        let half = ConvexSet::halfspace(n.clone(), n.dot(&c1) - 0.25).unwrap();
        let p = dykstra_project(&[&ball, &half], &x, 1e-11, 1_000_000).unwrap();
        prop_assert!(ball.contains(&p, 1e-8).unwrap() && half.contains(&p, 1e-8).unwrap());
        for z in zs {
            let z = dykstra_project(&[&ball, &half], &z, 1e-11, 1_000_000).unwrap();
            prop_assert!((&x - &p).dot(&(&z - &p)) <= 1e-6);
        }
    }

    #[test]
    fn modulus_and_contraction_ranges(eta in 0.0..=2.0f64, k in 1.0..100.0f64) {
        let m = modulus_of_convexity(eta).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!(modulus_of_convexity((eta + 0.01).min(2.0)).unwrap() >= m);
        let c = contraction_factor(k).unwrap();
        prop_assert!((0.0..1.0).contains(&c));
    }

    #[test]
    fn set_descriptions_round_trip(s in any_set()) {
        let d = SetDescription::from(&s);
        let json = serde_json::to_string(&d).unwrap();
        let back: SetDescription = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &d);
        let rebuilt = back.build().unwrap();
        let x = Point::new(vec![0.7; s.dim()]);
        prop_assert!(rebuilt.proj(&x).unwrap().dist(&s.proj(&x).unwrap()) <= 1e-9);
    }

    #[test]
    fn rates_round_trip_through_strings(p in 1.0..4.0f64, which in 0..3u8) {
        let r = match which { 0 => Rate::Zero, 1 => Rate::InversePower(p), _ => Rate::Geometric };
        let back: Rate = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fejer_chain_on_random_polygon_couples(a in polygon(), b in polygon(), x0 in point(2)) {
        let couple = make_couple(vpoly(&a), vpoly(&b), &CoupleOptions::default()).unwrap();
        // v is the shortest difference vector between the polygons
        let d_ref = oracle::polygon_polygon_dist(&a, &b);
        prop_assert!((couple.v().norm() - d_ref).abs() <= 1e-6, "{} vs {d_ref}", couple.v().norm());
        let tr = run_ap(&couple, &x0, RunOptions { cap: 300, tol: 1e-12 }).unwrap();
        for e in couple.sample_e(3, 3.0, 1).unwrap() {
            let f = &e + couple.v();
            let mut prev = x0.dist(&e);
            for r in &tr.records {
                let (dd, dc) = (r.b.dist(&f), r.a.dist(&e));
                prop_assert!(dd <= prev + 1e-7 && dc <= dd + 1e-7, "n = {}: {prev} {dd} {dc}", r.n);
                prev = dc;
            }
        }
    }

    #[test]
    fn runs_are_deterministic_and_csv_is_lossless(a in polygon(), b in polygon(), x0 in point(2), seed in any::<u64>()) {
        let (sa, sb) = (vpoly(&a), vpoly(&b));
        let j = VertexJitterSchedule::new(&sa, &sb, Rate::InversePower(1.0), seed, vec![5]).unwrap();
        prop_assert_eq!(j.sets_at(3).unwrap(), j.sets_at(3).unwrap());
        let couple = make_couple(sa, sb, &CoupleOptions::default()).unwrap();
        let opts = RunOptions { cap: 50, tol: 1e-12 };
        let t1 = run_ap(&couple, &x0, opts).unwrap();
        prop_assert_eq!(&t1, &run_ap(&couple, &x0, opts).unwrap());
        let mut buf = Vec::new();
        t1.write_csv(&mut buf).unwrap();
        prop_assert_eq!(Trace::read_csv(buf.as_slice(), t1.status).unwrap(), t1);
    }
}

//! Reference computations that share no code with the library: closed-form
//! distances read straight from set-description JSON, exact polygon
//! geometry, and a log-barrier Newton solver for projections onto
//! intersections.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::Value;

pub type V = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> V {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> V {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> V {
    a.iter().map(|x| x * s).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

fn vec_of(v: &Value) -> V {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

/// Sets as they appear in scenario JSON, reinterpreted independently.
#[derive(Clone, Debug)]
pub enum RefSet {
    Polygon(Vec<[f64; 2]>),
    Ball {
        c: V,
        r: f64,
    },
    /// `<n, x> >= b`
    Half {
        n: V,
        b: f64,
    },
    Hyper {
        n: V,
        b: f64,
    },
    Affine {
        base: V,
        dirs: Vec<V>,
    },
    /// `origin + s·u + t·w` with `(s, t)` in the given half-planes (u, w orthonormal here).
    Planar {
        origin: V,
        u: V,
        w: V,
        halfplanes: Vec<([f64; 2], f64)>,
    },
}

impl RefSet {
    pub fn from_json(v: &Value) -> RefSet {
        match v["type"].as_str().unwrap() {
            "vpolytope" => {
                let pts: Vec<[f64; 2]> = v["vertices"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|p| {
                        let p = vec_of(p);
                        assert_eq!(p.len(), 2, "reference polygons are planar");
                        [p[0], p[1]]
                    })
                    .collect();
                RefSet::Polygon(hull2(&pts))
            }
            "ball" => RefSet::Ball {
                c: vec_of(&v["center"]),
                r: v["radius"].as_f64().unwrap(),
            },
            "halfspace" => RefSet::Half {
                n: vec_of(&v["normal"]),
                b: v["offset"].as_f64().unwrap(),
            },
            "hyperplane" => RefSet::Hyper {
                n: vec_of(&v["normal"]),
                b: v["offset"].as_f64().unwrap(),
            },
            "affine" => RefSet::Affine {
                base: vec_of(&v["base"]),
                dirs: v["directions"]
                    .as_array()
                    .map_or(vec![], |a| a.iter().map(vec_of).collect()),
            },
            "planar" => RefSet::Planar {
                origin: vec_of(&v["origin"]),
                u: vec_of(&v["u"]),
                w: vec_of(&v["w"]),
                halfplanes: v["halfplanes"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|h| {
                        let n = vec_of(&h["normal"]);
                        ([n[0], n[1]], h["offset"].as_f64().unwrap())
                    })
                    .collect(),
            },
            t => panic!("no reference model for set type {t}"),
        }
    }

    /// Distance from a point, in closed form.
    pub fn dist_point(&self, x: &[f64]) -> f64 {
        match self {
            RefSet::Polygon(p) => polygon_dist(p, [x[0], x[1]]),
            RefSet::Ball { c, r } => (dist(x, c) - r).max(0.0),
            RefSet::Half { n, b } => ((b - dot(n, x)) / norm(n)).max(0.0),
            RefSet::Hyper { n, b } => (b - dot(n, x)).abs() / norm(n),
            RefSet::Affine { base, dirs } => norm(&complement(&sub(x, base), dirs)),
            RefSet::Planar {
                origin,
                u,
                w,
                halfplanes,
            } => {
                let d = sub(x, origin);
                let (s, t) = (dot(&d, u), dot(&d, w));
                let off_plane = norm(&sub(&d, &add(&scale(u, s), &scale(w, t))));
                // Only the single half-plane case is needed.
                assert!(halfplanes.len() <= 1);
                let in_chart = match halfplanes.first() {
                    None => 0.0,
                    Some((n, b)) => {
                        let nn = n[0].hypot(n[1]);
                        ((b - n[0] * s - n[1] * t) / nn).max(0.0)
                    }
                };
                off_plane.hypot(in_chart)
            }
        }
    }

    /// Random points of the set (within radius ~`r` of its reference point).
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize, r: f64) -> Vec<V> {
        (0..count)
            .map(|_| match self {
                RefSet::Polygon(p) => {
                    let w: Vec<f64> = (0..p.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    let mut out = vec![0.0, 0.0];
                    for (wi, v) in w.iter().zip(p) {
                        out[0] += wi / s * v[0];
                        out[1] += wi / s * v[1];
                    }
                    out
                }
                RefSet::Affine { base, dirs } => {
                    let mut out = base.clone();
                    for d in dirs {
                        out = add(&out, &scale(d, rng.gen_range(-r..r)));
                    }
                    out
                }
                RefSet::Planar {
                    origin,
                    u,
                    w,
                    halfplanes,
                } => loop {
                    let (s, t) = (rng.gen_range(-r..r), rng.gen_range(-r..r));
                    if halfplanes.iter().all(|(n, b)| n[0] * s + n[1] * t >= *b) {
                        break add(origin, &add(&scale(u, s), &scale(w, t)));
                    }
                },
                other => panic!("sampling not modelled for {other:?}"),
            })
            .collect()
    }
}

/// Component of `x` orthogonal to span(dirs) (Gram–Schmidt).
fn complement(x: &[f64], dirs: &[V]) -> V {
    let mut basis: Vec<V> = Vec::new();
    for d in dirs {
        let mut e = d.clone();
        for b in &basis {
            e = sub(&e, &scale(b, dot(&e, b)));
        }
        let n = norm(&e);
        if n > 1e-12 {
            basis.push(scale(&e, 1.0 / n));
        }
    }
    let mut out = x.to_vec();
    for b in &basis {
        out = sub(&out, &scale(b, dot(&out, b)));
    }
    out
}

/// `dist(A, B)` for the pairs that occur in the bundled scenarios.
pub fn set_distance(a: &RefSet, b: &RefSet) -> f64 {
    match (a, b) {
        (RefSet::Polygon(p), RefSet::Polygon(q)) => polygon_polygon_dist(p, q),
        (RefSet::Ball { c, r }, RefSet::Half { n, b }) => ((b - dot(n, c)) / norm(n) - r).max(0.0),
        (RefSet::Affine { base: a0, dirs: da }, RefSet::Affine { base: b0, dirs: db }) => {
            let all: Vec<V> = da.iter().chain(db).cloned().collect();
            norm(&complement(&sub(a0, b0), &all))
        }
        (RefSet::Planar { origin, u, w, .. }, RefSet::Hyper { n, b }) => {
            assert!(
                dot(n, u).abs() < 1e-15 && dot(n, w).abs() < 1e-15,
                "plane must be parallel"
            );
            (b - dot(n, origin)).abs() / norm(n)
        }
        _ => panic!("no reference distance for {a:?} / {b:?}"),
    }
}

// ----- planar polygons -------------------------------------------------

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (Andrew's monotone chain).
pub fn hull2(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * ab[0]).hypot(p[1] - a[1] - t * ab[1])
}

fn edges(p: &[[f64; 2]]) -> Vec<([f64; 2], [f64; 2])> {
    if p.len() == 1 {
        return vec![(p[0], p[0])];
    }
    (0..p.len()).map(|i| (p[i], p[(i + 1) % p.len()])).collect()
}

pub fn polygon_contains(p: &[[f64; 2]], x: [f64; 2]) -> bool {
    p.len() >= 3 && edges(p).iter().all(|(a, b)| cross(*a, *b, x) >= 0.0)
}

pub fn polygon_dist(p: &[[f64; 2]], x: [f64; 2]) -> f64 {
    if polygon_contains(p, x) {
        return 0.0;
    }
    edges(p)
        .iter()
        .map(|(a, b)| seg_dist(x, *a, *b))
        .fold(f64::INFINITY, f64::min)
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (d1, d2) = (cross(a, b, c), cross(a, b, d));
    let (d3, d4) = (cross(c, d, a), cross(c, d, b));
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && !(d1 == 0.0 && d2 == 0.0 && d3 == 0.0 && d4 == 0.0)
}

/// Exhaustive vertex–edge search, zero when the polygons meet.
pub fn polygon_polygon_dist(p: &[[f64; 2]], q: &[[f64; 2]]) -> f64 {
    if p.iter().any(|&x| polygon_contains(q, x)) || q.iter().any(|&x| polygon_contains(p, x)) {
        return 0.0;
    }
    for (a, b) in edges(p) {
        for (c, d) in edges(q) {
            if segments_cross(a, b, c, d) {
                return 0.0;
            }
        }
    }
    let mut best = f64::INFINITY;
    for &x in p {
        for (c, d) in edges(q) {
            best = best.min(seg_dist(x, c, d));
        }
    }
    for &x in q {
        for (a, b) in edges(p) {
            best = best.min(seg_dist(x, a, b));
        }
    }
    best
}

/// Boundary point along the ray `t·dir` of a CCW polygon containing the origin.
pub fn ray_exit(p: &[[f64; 2]], dir: [f64; 2]) -> [f64; 2] {
    let mut t_best = f64::INFINITY;
    for (a, b) in edges(p) {
        // outward normal of a CCW edge
        let n = [b[1] - a[1], a[0] - b[0]];
        let h = n[0] * a[0] + n[1] * a[1];
        let s = n[0] * dir[0] + n[1] * dir[1];
        if s > 0.0 {
            t_best = t_best.min(h / s);
        }
    }
    [t_best * dir[0], t_best * dir[1]]
}

/// Distance from the origin to the nearest edge line (inradius about 0).
pub fn inner_radius(p: &[[f64; 2]]) -> f64 {
    edges(p)
        .iter()
        .map(|(a, b)| {
            let n = [b[1] - a[1], a[0] - b[0]];
            (n[0] * a[0] + n[1] * a[1]) / n[0].hypot(n[1])
        })
        .fold(f64::INFINITY, f64::min)
}

// ----- barrier QP ------------------------------------------------------

/// `g(y) <= 0` constraints for the barrier solver.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `<a, y> <= b`
    Lin { a: V, b: f64 },
    /// `‖y − c‖ <= r`
    Ball { c: V, r: f64 },
}

impl Constraint {
    fn g(&self, y: &[f64]) -> f64 {
        match self {
            Constraint::Lin { a, b } => dot(a, y) - b,
            Constraint::Ball { c, r } => 0.5 * (dot(&sub(y, c), &sub(y, c)) - r * r),
        }
    }

    fn grad(&self, y: &[f64]) -> V {
        match self {
            Constraint::Lin { a, .. } => a.clone(),
            Constraint::Ball { c, .. } => sub(y, c),
        }
    }

    /// Hessian of `g` is 0 (linear) or the identity (ball).
    fn curvature(&self) -> f64 {
        match self {
            Constraint::Lin { .. } => 0.0,
            Constraint::Ball { .. } => 1.0,
        }
    }
}

/// argmin ½‖y − x‖² subject to the constraints, from a strictly feasible
/// `start`, by a log-barrier path-following Newton method.
pub fn barrier_project(cons: &[Constraint], x: &[f64], start: &[f64]) -> V {
    let d = x.len();
    let mut y = start.to_vec();
    assert!(
        cons.iter().all(|c| c.g(&y) < 0.0),
        "start must be strictly feasible"
    );
    let phi = |y: &[f64], t: f64| -> f64 {
        let mut v = 0.5 * t * dot(&sub(y, x), &sub(y, x));
        for c in cons {
            let g = c.g(y);
            if g >= 0.0 {
                return f64::INFINITY;
            }
            v -= (-g).ln();
        }
        v
    };
    let mut t = 1.0;
    while t <= 1e13 {
        for _ in 0..200 {
            let mut grad = DVector::from_iterator(d, sub(&y, x).into_iter().map(|v| t * v));
            let mut hess = DMatrix::<f64>::identity(d, d) * t;
            for c in cons {
                let g = c.g(&y);
                let gr = DVector::from_vec(c.grad(&y));
                grad += &gr / (-g);
                hess += &gr * gr.transpose() / (g * g)
                    + DMatrix::identity(d, d) * (c.curvature() / (-g));
            }
            let step = hess
                .clone()
                .lu()
                .solve(&(-&grad))
                .expect("nonsingular Newton system");
            let decrement = -grad.dot(&step);
            if decrement < 1e-20 {
                break;
            }
            let f0 = phi(&y, t);
            let mut s = 1.0;
            loop {
                let cand: V = y.iter().zip(step.iter()).map(|(a, b)| a + s * b).collect();
                let f1 = phi(&cand, t);
                if f1.is_finite() && f1 <= f0 - 0.25 * s * decrement {
                    y = cand;
                    break;
                }
                s *= 0.5;
                if s < 1e-20 {
                    break;
                }
            }
            if s < 1e-20 {
                break;
            }
        }
        t *= 4.0;
    }
    y
}

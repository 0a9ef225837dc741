//! Self-verification suites behind `feasilab verify`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_ap, RunOptions};
use crate::error::{Error, Result};
use crate::metrics::{aw_gap, GapSampler};
use crate::perturbations::{
    AdversarialSchedule, ApplyTo, Rate, Schedule, ScheduleSpec, TranslationSchedule,
};
use crate::point::Point;
use crate::regularity::{
    check_annulus_diameter, check_boundary_bound, check_quasi_orthogonality,
    check_strongly_exposes, modulus_of_convexity,
};
use crate::sampling::{Region, SamplerSpec};
use crate::scenarios::{bundled_scenarios, execute, ScenarioSpec};
use crate::sets::ConvexSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Accumulates checks for one suite; only the first few failures are kept.
#[derive(Default)]
struct Tally {
    checks: usize,
    failed: usize,
    failures: Vec<String>,
    skipped: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 10 {
                self.failures.push(msg());
            }
        }
    }
}

type SuiteFn = fn(&mut Tally) -> Result<()>;

const SUITES: [(&str, SuiteFn); 11] = [
    ("fact-identities", fact_identities),
    ("e-analytic", e_analytic),
    ("fejer", fejer),
    ("lemma-2dim", lemma_2dim),
    ("quasi-orthogonality", quasi_orthogonality),
    ("modulus", modulus),
    ("annulus", annulus),
    ("strongly-exposed", strongly_exposed),
    ("certificates", certificates),
    ("determinism", determinism),
    ("scenario-expectations", scenario_expectations),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs every suite whose name contains `filter`. A suite that errors counts
/// as failed; the error is reported among its failures.
pub fn run_suites(filter: Option<&str>) -> Result<VerifySummary> {
    let selected: Vec<_> = SUITES
        .iter()
        .filter(|(n, _)| filter.is_none_or(|f| n.contains(f)))
        .collect();
    if selected.is_empty() {
        return Err(Error::Config(format!(
            "no suite matches {:?}; available: {}",
            filter.unwrap_or_default(),
            suite_names().join(", ")
        )));
    }
    let suites: Vec<SuiteResult> = selected
        .into_iter()
        .map(|(name, f)| {
            let t0 = Instant::now();
            let mut t = Tally::default();
            if let Err(e) = f(&mut t) {
                t.failed += 1;
                t.failures.push(format!("error: {e}"));
            }
            SuiteResult {
                name: name.to_string(),
                passed: t.failed == 0,
                checks: t.checks,
                failures: t.failures,
                skipped: t.skipped,
                elapsed_s: t0.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Ok(VerifySummary {
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn uniform_point(rng: &mut ChaCha8Rng, dim: usize, h: f64) -> Point {
    Point::new((0..dim).map(|_| rng.gen_range(-h..=h)).collect())
}

fn fact_identities(t: &mut Tally) -> Result<()> {
    for spec in bundled_scenarios()? {
        let c = spec.build_couple()?;
        let gap = (c.v().norm() - c.b().dist(c.anchor())?).abs();
        t.check(gap <= 1e-6, || {
            format!("{}: |‖v‖ − d(A,B)| = {gap:e}", spec.name)
        });
        let es = c.sample_e(64, 3.0, spec.effective_seed())?;
        let r = c.identity_residual(&es)?;
        t.check(r <= 1e-6, || {
            format!("{}: identity residual {r:e}", spec.name)
        });
    }
    Ok(())
}

fn e_analytic(t: &mut Tally) -> Result<()> {
    for spec in bundled_scenarios()? {
        if spec.e_analytic.is_none() {
            continue;
        }
        if spec.e_tangent {
            t.skipped.push(format!(
                "{}: tangent nearest set, Dykstra cross-check skipped",
                spec.name
            ));
            continue;
        }
        let c = spec.build_couple()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.effective_seed());
        for _ in 0..100 {
            let x = uniform_point(&mut rng, c.dim(), 3.0);
            let d = c.project_e(&x)?.dist(&c.project_e_dykstra(&x)?);
            t.check(d <= 1e-5, || {
                format!("{}: analytic vs Dykstra differ by {d:e} at {x}", spec.name)
            });
        }
    }
    Ok(())
}

/// `‖c_n − e‖ <= ‖d_n − (e + v)‖ <= ‖c_{n−1} − e‖` for sampled `e ∈ E`.
fn fejer(t: &mut Tally) -> Result<()> {
    for spec in bundled_scenarios()? {
        let c = spec.build_couple()?;
        let es = c.sample_e(4, 3.0, 7)?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.effective_seed());
        for _ in 0..20 {
            let c0 = uniform_point(&mut rng, c.dim(), 5.0);
            let trace = run_ap(
                &c,
                &c0,
                RunOptions {
                    cap: 200,
                    tol: 1e-12,
                },
            )?;
            for e in &es {
                let f = e + c.v();
                let mut prev = c0.dist(e);
                for r in &trace.records {
                    let (dc, dd) = (r.a.dist(e), r.b.dist(&f));
                    t.check(dc <= dd + 1e-9 && dd <= prev + 1e-9, || {
                        format!(
                            "{}: Fejér chain broken at n = {} ({dc}, {dd}, {prev})",
                            spec.name, r.n
                        )
                    });
                    prev = dc;
                }
            }
        }
    }
    Ok(())
}

/// Random polygon with `lo·B ⊆ G ⊆ hi·B` (rejection-sampled).
fn random_polygon(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Result<ConvexSet> {
    loop {
        let k = rng.gen_range(4..=14);
        let mut angles: Vec<f64> = (0..k)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let verts: Vec<Point> = angles
            .iter()
            .map(|a| {
                let r = rng.gen_range(lo.max(0.4 * hi)..=hi);
                Point::new(vec![r * a.cos(), r * a.sin()])
            })
            .collect();
        let g = ConvexSet::vpolytope(verts)?;
        if g.dist(&Point::zeros(2))? > 0.0 {
            continue;
        }
        // Inner radius: smallest support value over many directions.
        let inner = (0..720)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 720.0;
                g.support_value(&Point::new(vec![a.cos(), a.sin()]))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if inner >= lo + 1e-3 {
            return Ok(g);
        }
    }
}

/// Boundary point of a set containing the origin along `dir`, by bisection.
fn ray_boundary(g: &ConvexSet, dir: &Point, far: f64) -> Result<Point> {
    let (mut lo, mut hi) = (0.0, far);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if g.contains(&dir.scale(mid), 1e-12)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(dir.scale(lo))
}

fn lemma_2dim(t: &mut Tally) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut applicable = 0;
    while applicable < 1000 {
        let g = random_polygon(&mut rng, 0.5, 2.0)?;
        let a1 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a2 = a1 + rng.gen_range(-1.5..1.5);
        let u = ray_boundary(&g, &Point::new(vec![a1.cos(), a1.sin()]), 3.0)?;
        let w = ray_boundary(&g, &Point::new(vec![a2.cos(), a2.sin()]), 3.0)?;
        let theta = (a2 - a1).cos();
        if theta <= 0.05 {
            continue;
        }
        match check_boundary_bound(&g, 0.5, 2.0, &u, &w) {
            Ok(b) => {
                applicable += 1;
                t.check(b.holds, || {
                    format!("bound fails: lhs {} > rhs {}", b.lhs, b.rhs)
                });
            }
            Err(Error::PreconditionFailed(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let disc = ConvexSet::ball([0.0, 0.0], 1.0)?;
    let th: f64 = 0.9;
    let w = Point::new(vec![th, (1.0 - th * th).sqrt()]);
    let b = check_boundary_bound(&disc, 1.0, 1.0, &Point::new(vec![1.0, 0.0]), &w)?;
    t.check(
        b.holds && (b.lhs - 0.2).abs() < 1e-9 && (b.rhs - 0.469).abs() < 1e-3,
        || format!("disc spot check: lhs {} rhs {}", b.lhs, b.rhs),
    );
    Ok(())
}

fn quasi_orthogonality(t: &mut Tally) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut applicable = 0;
    while applicable < 10_000 {
        let dim = if applicable % 2 == 0 { 2 } else { 3 };
        let delta = rng.gen_range(0.001..0.3);
        let eta = rng.gen_range(0.001..0.6);
        let min_eta_p = (delta + eta) / (1.0 - delta);
        if min_eta_p >= 0.999 {
            continue;
        }
        let eta_p = rng.gen_range(min_eta_p..1.0);
        if eta_p <= eta {
            continue;
        }
        let x = uniform_point(&mut rng, dim, 2.0);
        let y = uniform_point(&mut rng, dim, 2.0);
        match check_quasi_orthogonality(&x, &y, eta, delta, eta_p) {
            Ok(q) if q.applicable => {
                applicable += 1;
                t.check(q.holds, || format!("conclusion fails for x = {x}, y = {y}"));
            }
            Ok(_) | Err(Error::ZeroVector) | Err(Error::LinearlyDependent) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Brute-force infimum of `1 − ‖(x + y)/2‖` over unit pairs with
/// `‖x − y‖ >= η`; by rotation invariance only the angle between them matters.
pub fn brute_modulus(pairs: usize, seed: u64) -> impl Fn(f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: Vec<(f64, f64)> = (0..pairs)
        .map(|_| {
            let (s, r) = (
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let (x, y) = ((s.cos(), s.sin()), (r.cos(), r.sin()));
            let chord = ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt();
            let mid = (0.5 * (x.0 + y.0)).hypot(0.5 * (x.1 + y.1));
            (chord, 1.0 - mid)
        })
        .collect();
    table.sort_by(|a, b| a.0.total_cmp(&b.0));
    // suffix minima over chord length
    let mut best = f64::INFINITY;
    for e in table.iter_mut().rev() {
        best = best.min(e.1);
        e.1 = best;
    }
    move |eta| {
        let i = table.partition_point(|e| e.0 < eta);
        table.get(i).map_or(f64::INFINITY, |e| e.1)
    }
}

fn modulus(t: &mut Tally) -> Result<()> {
    let brute = brute_modulus(200_000, 11);
    for i in 0..50 {
        let eta = 2.0 * i as f64 / 49.0 * 0.999;
        let (m, b) = (modulus_of_convexity(eta)?, brute(eta));
        t.check((m - b).abs() <= 1e-3, || {
            format!("η = {eta}: closed form {m}, brute force {b}")
        });
    }
    t.check(modulus_of_convexity(2.0)? == 1.0, || "δ(2) != 1".into());
    t.check(modulus_of_convexity(0.0)? == 0.0, || "δ(0) != 0".into());
    Ok(())
}

fn annulus(t: &mut Tally) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut applicable = 0;
    let mut tries = 0u64;
    while applicable < 500 {
        tries += 1;
        if tries > 200_000 {
            return Err(Error::non_convergent("annulus instance sampling", tries));
        }
        let rho = rng.gen_range(0.5..3.0);
        let eps_p = rho * rng.gen_range(1e-4..0.02);
        let m = rng.gen_range(0.1..1.5);
        let center = rng.gen_range(0.0..std::f64::consts::TAU);
        let span = rng.gen_range(0.0..1.0);
        let verts: Vec<Point> = (0..rng.gen_range(1..6))
            .map(|_| {
                let a = center + rng.gen_range(-span..=span);
                let r = rng.gen_range(rho - eps_p..=rho + eps_p);
                Point::new(vec![r * a.cos(), r * a.sin()])
            })
            .collect();
        let c = ConvexSet::vpolytope(verts)?;
        match check_annulus_diameter(&c, rho, eps_p, m) {
            Ok(a) if a.applicable => {
                applicable += 1;
                t.check(a.holds, || {
                    format!("diameter {} exceeds M = {m}", a.diameter)
                });
            }
            Ok(_) | Err(Error::AnnulusViolated { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn strongly_exposed(t: &mut Tally) -> Result<()> {
    let sampler = SamplerSpec::random(Region::cube(2, 2.0), 200, 3);
    let north = Point::new(vec![0.0, 1.0]);
    let ball = ConvexSet::ball([0.0, 0.0], 1.0)?;
    let r = check_strongly_exposes(&ball, &north, &north, &sampler)?;
    t.check(r.exposes, || "ball north pole not detected".into());
    let square = ConvexSet::box_polytope(&[-1.0, -1.0], &[1.0, 1.0])?;
    let r = check_strongly_exposes(&square, &north, &Point::new(vec![0.0, 1.0]), &sampler)?;
    t.check(!r.exposes, || {
        "square top edge reported as strongly exposed".into()
    });
    let half = ConvexSet::halfspace([0.0, -1.0], 0.0)?;
    let r = check_strongly_exposes(&half, &north, &Point::zeros(2), &sampler)?;
    t.check(!r.exposes, || {
        "halfspace boundary reported as strongly exposed".into()
    });
    Ok(())
}

fn certificates(t: &mut Tally) -> Result<()> {
    let spec = crate::scenarios::find_scenario("trapezoids")?;
    let c = spec.build_couple()?;
    let sched = TranslationSchedule::new(
        c.a().clone(),
        c.b().clone(),
        Rate::InversePower(1.0),
        Point::new(vec![1.0, 0.0]),
        ApplyTo::Both,
        vec![5],
    )?;
    let sampler = GapSampler::boundary(256, 1);
    for n in [1, 3, 10, 100] {
        let shifted = c.a().clone().translate(sched.shift(n))?;
        let g = aw_gap(&shifted, c.a(), 5, &sampler)?.value;
        let cert = sched.cert(n);
        t.check(g <= cert + 1e-9, || {
            format!("translation n = {n}: gap {g} above certificate {cert}")
        });
    }

    let a0 = Point::new(vec![1.0, 0.0, 0.0]);
    let (a, b) = crate::perturbations::unbounded_limit_sets()?;
    let couple = crate::metrics::make_couple(a.clone(), b.clone(), &Default::default())?;
    let mut sched = AdversarialSchedule::new(a, b, &a0, 5, GapSampler::boundary(256, 5))?;
    let trace = crate::dynamics::run_perturbed_ap(
        &couple,
        &mut sched,
        &a0,
        RunOptions {
            cap: 1_000,
            tol: 1e-10,
        },
    )?;
    let exc = sched.excursions();
    t.check(exc.len() >= 3, || {
        format!("{} excursion blocks in 1000 steps", exc.len())
    });
    for w in exc.windows(2) {
        t.check(w[1].cert < w[0].cert, || {
            format!(
                "certificate not decreasing: {} then {}",
                w[0].cert, w[1].cert
            )
        });
    }
    for e in exc {
        t.check(e.peak_dist >= 0.499, || {
            format!("block {} peaks at {}", e.block, e.peak_dist)
        });
        if let Some(p) = &e.reset_point {
            t.check(p[1].abs() <= 1e-6 && p[2].abs() <= 1e-6, || {
                format!("reset point {p} off axis")
            });
        }
    }
    t.check(!trace.records.is_empty(), || {
        "empty adversarial trace".into()
    });
    Ok(())
}

fn determinism(t: &mut Tally) -> Result<()> {
    let mut spec: ScenarioSpec = crate::scenarios::find_scenario("trapezoids")?;
    spec.schedule = ScheduleSpec::Jitter {
        rate: Rate::InversePower(1.0),
        seed: 42,
    };
    spec.iterations = 500;
    spec.regularity = None;
    let (x, y) = (execute(&spec)?, execute(&spec)?);
    for (r, s) in x.runs.iter().zip(&y.runs) {
        t.check(r.trace == s.trace, || "repeated jitter runs differ".into());
        let mut buf = Vec::new();
        r.trace.write_csv(&mut buf)?;
        let back = crate::dynamics::Trace::read_csv(buf.as_slice(), r.trace.status)?;
        t.check(back == r.trace, || "CSV round trip is lossy".into());
    }
    Ok(())
}

fn scenario_expectations(t: &mut Tally) -> Result<()> {
    for spec in bundled_scenarios()? {
        let out = execute(&spec)?;
        t.check(out.failures.is_empty(), || {
            format!("{}: {}", spec.name, out.failures.join("; "))
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_filter_is_config_error() {
        assert!(run_suites(Some("no-such-suite")).unwrap_err().is_config());
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["fact-identities", "strongly-exposed", "determinism"] {
            let s = run_suites(Some(name)).unwrap();
            assert!(s.passed, "{:?}", s.suites);
            assert!(s.suites.iter().all(|r| r.checks > 0));
        }
    }

    #[test]
    fn brute_modulus_endpoints() {
        let b = brute_modulus(10_000, 1);
        assert!(b(0.0) < 1e-3);
        assert!(b(2.5).is_infinite());
    }
}

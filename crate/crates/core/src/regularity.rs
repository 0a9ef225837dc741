//! Empirical regularity moduli of a couple and checkable forms of the
//! quantitative geometric lemmas used in the stability argument.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{diameter_estimate, Couple};
use crate::point::{cosine, Point};
use crate::sampling::{unit_directions, SamplerSpec};
use crate::sets::ConvexSet;

/// Smallest rung of the δ ladder.
pub const DELTA_FLOOR: f64 = 1e-6;
/// Rungs per halving of δ.
const RUNGS_PER_OCTAVE: i32 = 8;

/// Decreasing candidate δ values: `ε · 2^{-k/8}` down to `1e-6`. The ladder
/// contains every rung of the coarser halving ladder.
pub fn delta_ladder(eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let d = eps * (-(k as f64) / f64::from(RUNGS_PER_OCTAVE)).exp2();
        if d < DELTA_FLOOR {
            break;
        }
        out.push(d);
        k += 1;
    }
    out
}

/// `max{dist(x, A), dist(x, B − v)}` and `dist(x, E)` for every sample.
#[derive(Clone, Debug)]
pub struct SampleTable {
    pub points: Vec<Point>,
    pub gap: Vec<f64>,
    pub dist_e: Vec<f64>,
}

impl SampleTable {
    pub fn evaluate(couple: &Couple, sampler: &SamplerSpec) -> Result<Self> {
        if sampler.dim() != couple.dim() {
            return Err(Error::DimensionMismatch {
                expected: couple.dim(),
                got: sampler.dim(),
            });
        }
        let points = sampler.points()?;
        let rows: Vec<(f64, f64)> = points
            .par_iter()
            .map(|x| {
                let g = couple.a().dist(x)?.max(couple.b_minus_v().dist(x)?);
                Ok((g, couple.dist_to_e(x)?))
            })
            .collect::<Result<_>>()?;
        let (gap, dist_e) = rows.into_iter().unzip();
        Ok(SampleTable {
            points,
            gap,
            dist_e,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub eps: f64,
    pub delta: f64,
    /// Sample with `dist(x, E) > ε` and the smallest simultaneous gap; it caps δ.
    pub witness: Option<Point>,
}

/// Largest ladder rung δ such that every sample with
/// `max{dist(x, A), dist(x, B − v)} <= δ` has `dist(x, E) <= ε`.
pub fn estimate_delta_on(table: &SampleTable, eps: f64) -> Result<DeltaEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {eps} must be positive"
        )));
    }
    // First index wins ties, so the witness does not depend on thread count.
    let blocker = (0..table.len())
        .filter(|&i| table.dist_e[i] > eps)
        .min_by(|&i, &j| table.gap[i].total_cmp(&table.gap[j]).then(i.cmp(&j)));
    let bound = blocker.map_or(f64::INFINITY, |i| table.gap[i]);
    let ladder = delta_ladder(eps);
    match ladder.iter().find(|&&d| d < bound) {
        Some(&delta) => Ok(DeltaEstimate {
            eps,
            delta,
            witness: blocker.map(|i| table.points[i].clone()),
        }),
        None => Err(Error::NoPositiveDelta {
            smallest_rung: *ladder.last().unwrap_or(&eps),
        }),
    }
}

pub fn estimate_delta(couple: &Couple, eps: f64, sampler: &SamplerSpec) -> Result<DeltaEstimate> {
    estimate_delta_on(&SampleTable::evaluate(couple, sampler)?, eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEstimate {
    pub eps: f64,
    /// `K_est >= 1`.
    pub k: f64,
    pub witness: Option<Point>,
    /// Samples far from `E` whose gap vanished to machine precision; excluded.
    pub degenerate: usize,
}

/// `sup dist(x, E) / max{dist(x, A), dist(x, B − v)}` over samples with
/// `dist(x, E) >= ε`, clamped below at 1.
pub fn estimate_linear_k_on(table: &SampleTable, eps: f64) -> Result<LinearEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {eps} must be positive"
        )));
    }
    let mut k = 1.0;
    let mut witness = None;
    let mut degenerate = 0;
    for i in 0..table.len() {
        let de = table.dist_e[i];
        if de < eps {
            continue;
        }
        let g = table.gap[i];
        if g < f64::EPSILON {
            degenerate += 1;
            continue;
        }
        let ratio = de / g;
        if ratio > k {
            k = ratio;
            witness = Some(i);
        }
    }
    Ok(LinearEstimate {
        eps,
        k,
        witness: witness.map(|i| table.points[i].clone()),
        degenerate,
    })
}

pub fn estimate_linear_k(
    couple: &Couple,
    eps: f64,
    sampler: &SamplerSpec,
) -> Result<LinearEstimate> {
    estimate_linear_k_on(&SampleTable::evaluate(couple, sampler)?, eps)
}

/// `η = √(1 − 1/K²)`.
pub fn contraction_factor(k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "K = {k} must be finite and >= 1"
        )));
    }
    Ok((1.0 - 1.0 / (k * k)).max(0.0).sqrt())
}

/// Euclidean modulus of convexity `δ(η) = 1 − √(1 − η²/4)` on `[0, 2]`.
pub fn modulus_of_convexity(eta: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "modulus argument {eta} outside [0, 2]"
        )));
    }
    Ok(1.0 - (1.0 - 0.25 * eta * eta).max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

const BOUNDARY_TOL: f64 = 1e-8;

fn on_boundary(g: &ConvexSet, p: &Point) -> Result<bool> {
    Ok(g.dist(p)? <= BOUNDARY_TOL && g.dist(&p.scale(1.0 + 1e-6))? > 0.0)
}

/// Checks `ε·B ⊆ G ⊆ K·B` along support directions (and on all vertices
/// when `G` is a polytope).
fn check_sandwich(g: &ConvexSet, eps: f64, k: f64) -> Result<()> {
    let slack = 1e-9;
    for u in unit_directions(g.dim(), 256, 5) {
        let s = g.support_point(&u)?;
        if s.dot(&u) < eps - slack {
            return Err(Error::PreconditionFailed(format!(
                "{eps}·B is not inside G (direction {u})"
            )));
        }
        if s.norm() > k + slack {
            return Err(Error::PreconditionFailed(format!(
                "G is not inside {k}·B (point {s})"
            )));
        }
    }
    if let Some(vs) = g.vertices() {
        if let Some(v) = vs.iter().find(|v| v.norm() > k + slack) {
            return Err(Error::PreconditionFailed(format!(
                "G is not inside {k}·B (vertex {v})"
            )));
        }
    }
    Ok(())
}

/// For `u, w ∈ ∂G` with `θ = cos(u, w) > 0`:
/// `‖u − w‖² <= K²(K²/ε² + 1)(1 − θ²)/θ²`.
pub fn check_boundary_bound(
    g: &ConvexSet,
    eps: f64,
    k: f64,
    u: &Point,
    w: &Point,
) -> Result<BoundCheck> {
    if !(eps > 0.0) || !(k >= eps) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < ε <= K, got ε = {eps}, K = {k}"
        )));
    }
    u.ensure_dim(g.dim())?;
    w.ensure_dim(g.dim())?;
    check_sandwich(g, eps, k)?;
    for p in [u, w] {
        if !on_boundary(g, p)? {
            return Err(Error::PreconditionFailed(format!(
                "{p} is not on the boundary of G"
            )));
        }
    }
    let theta = cosine(u, w)?;
    if theta <= 0.0 {
        return Err(Error::NonpositiveCosine(theta));
    }
    let lhs = u.dist(w).powi(2);
    let rhs = k * k * (k * k / (eps * eps) + 1.0) * (1.0 - theta * theta) / (theta * theta);
    Ok(BoundCheck {
        holds: lhs <= rhs + 1e-9,
        lhs,
        rhs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiOrthogonality {
    pub applicable: bool,
    /// `‖x‖ <= η′‖y‖`; vacuously true when the hypotheses fail.
    pub holds: bool,
}

/// If `(δ + η)/(1 − δ) <= η′`, `cos(x, y) <= η` and `cos(y − x, −x) <= δ`
/// then `‖x‖ <= η′‖y‖`.
pub fn check_quasi_orthogonality(
    x: &Point,
    y: &Point,
    eta: f64,
    delta: f64,
    eta_p: f64,
) -> Result<QuasiOrthogonality> {
    if !(0.0 < eta && eta < eta_p && eta_p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < η < η′ < 1, got η = {eta}, η′ = {eta_p}"
        )));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "δ = {delta} outside (0, 1)"
        )));
    }
    y.ensure_dim(x.dim())?;
    let cxy = cosine(x, y)?;
    if cxy.abs() >= 1.0 - 1e-12 {
        return Err(Error::LinearlyDependent);
    }
    let applicable =
        (delta + eta) / (1.0 - delta) <= eta_p && cxy <= eta && cosine(&(y - x), &(-x))? <= delta;
    let conclusion = x.norm() <= eta_p * y.norm() + 1e-12;
    Ok(QuasiOrthogonality {
        applicable,
        holds: !applicable || conclusion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCheck {
    pub applicable: bool,
    /// `diam(C) <= M`; vacuously true when not applicable.
    pub holds: bool,
    pub diameter: f64,
}

/// For `C` in the annulus `ρ − ε′ <= ‖c‖ <= ρ + ε′`: if
/// `ε′(2 − δ(s)) < ρ·δ(s)` with `s = M/(ρ + ε′)` then `diam(C) <= M`.
/// When `s > 2` the bound is automatic (`diam C <= 2(ρ + ε′) < M`).
pub fn check_annulus_diameter(c: &ConvexSet, rho: f64, eps_p: f64, m: f64) -> Result<AnnulusCheck> {
    if !(rho >= 0.0) || !(eps_p > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidArgument("need ρ >= 0, ε′ > 0, M > 0".into()));
    }
    let (lo, hi) = (rho - eps_p, rho + eps_p);
    let slack = 1e-12 * (1.0 + hi);
    let inner = c.dist(&Point::zeros(c.dim()))?;
    if inner < lo - slack {
        return Err(Error::AnnulusViolated {
            norm: inner,
            lo,
            hi,
        });
    }
    let far: Vec<Point> = match c.vertices() {
        Some(vs) => vs,
        None => {
            if !c.is_bounded() {
                return Err(Error::Unbounded);
            }
            unit_directions(c.dim(), 360, 3)
                .iter()
                .map(|u| c.support_point(u))
                .collect::<Result<_>>()?
        }
    };
    for p in &far {
        let n = p.norm();
        if n > hi + slack || n < lo - slack {
            return Err(Error::AnnulusViolated { norm: n, lo, hi });
        }
    }
    let s = m / hi;
    let applicable = if s > 2.0 {
        true
    } else {
        let d = modulus_of_convexity(s)?;
        eps_p * (2.0 - d) < rho * d
    };
    let diameter = diameter_estimate(c)?;
    Ok(AnnulusCheck {
        applicable,
        holds: !applicable || diameter <= m + 1e-9,
        diameter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureCheck {
    pub exposes: bool,
    /// `sup f(A)`.
    pub sup: f64,
    /// `(τ, r(τ))`: the farthest sampled point of `A` from `a` among those
    /// with `f`-value within `τ` of the supremum.
    pub radii: Vec<(f64, f64)>,
    pub witness: Option<Point>,
}

/// Slice radius below which near-maximizers count as converging to `a`.
pub const EXPOSURE_RADIUS: f64 = 1e-3;
const TAU_LADDER: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

/// Whether `f` strongly exposes `A` at `a`: near-maximizers of `f` over `A`
/// must cluster at `a`. Near-maximizers are produced as `P_A(y + λ f)` for
/// sampled `y` and `λ` ranging over `1..1e6`.
pub fn check_strongly_exposes(
    a_set: &ConvexSet,
    f: &Point,
    a: &Point,
    sampler: &SamplerSpec,
) -> Result<ExposureCheck> {
    let dim = a_set.dim();
    f.ensure_dim(dim)?;
    a.ensure_dim(dim)?;
    if sampler.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: sampler.dim(),
        });
    }
    let f = f.normalized()?;
    let sup = a_set.support_value(&f)?;
    if a_set.dist(a)? > 1e-8 {
        return Err(Error::PreconditionFailed(format!("{a} is not in A")));
    }
    let scale = 1.0 + sup.abs();
    if f.dot(a) < sup - 1e-9 * scale {
        return Ok(ExposureCheck {
            exposes: false,
            sup,
            radii: Vec::new(),
            witness: Some(a_set.support_point(&f)?),
        });
    }
    let base = sampler.points()?;
    let lambdas: Vec<f64> = (0..=12).map(|k| 10f64.powf(0.5 * k as f64)).collect();
    let cands: Vec<(f64, f64, usize)> = base
        .par_iter()
        .enumerate()
        .map(|(i, y)| {
            let y = &(y + a) - &sampler_center(sampler);
            lambdas
                .iter()
                .enumerate()
                .map(|(j, &l)| {
                    let p = a_set.proj(&y.axpy(l, &f))?;
                    Ok((sup - f.dot(&p), p.dist(a), i * lambdas.len() + j))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut radii = Vec::with_capacity(TAU_LADDER.len());
    let mut worst = None;
    for &tau in &TAU_LADDER {
        let best = cands
            .iter()
            .filter(|c| c.0 <= tau * scale)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.2.cmp(&x.2)));
        if let Some(&(_, r, idx)) = best {
            radii.push((tau, r));
            worst = Some((r, idx));
        }
    }
    let exposes = matches!(worst, Some((r, _)) if r <= EXPOSURE_RADIUS);
    let witness = match worst {
        Some((r, idx)) if !exposes && r > 0.0 => {
            let (i, j) = (idx / lambdas.len(), idx % lambdas.len());
            let y = &(&base[i] + a) - &sampler_center(sampler);
            Some(a_set.proj(&y.axpy(lambdas[j], &f))?)
        }
        _ => None,
    };
    Ok(ExposureCheck {
        exposes,
        sup,
        radii,
        witness,
    })
}

fn sampler_center(s: &SamplerSpec) -> Point {
    use crate::sampling::Region;
    match &s.region {
        Region::Box { lo, hi } => {
            Point::new(lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect())
        }
        Region::Ball { center, .. } => Point::new(center.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub eps: f64,
    /// `delta` or `linear`.
    pub kind: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// ε ↦ δ_est, successful rungs only; keys are decimal renderings of ε.
    pub eps_to_delta: BTreeMap<String, f64>,
    #[serde(rename = "K_of_eps")]
    pub k_of_eps: BTreeMap<String, f64>,
    pub eta_of_eps: BTreeMap<String, f64>,
    pub sampler: SamplerSpec,
    pub samples: usize,
    pub witnesses: Vec<Witness>,
    /// ε values for which no ladder rung passed.
    pub no_delta: Vec<f64>,
    pub degenerate_excluded: usize,
}

/// δ, K and η for every ε, all on one sample table.
pub fn regularity_report(
    couple: &Couple,
    eps_list: &[f64],
    sampler: &SamplerSpec,
) -> Result<RegularityReport> {
    let table = SampleTable::evaluate(couple, sampler)?;
    let mut report = RegularityReport {
        eps_to_delta: BTreeMap::new(),
        k_of_eps: BTreeMap::new(),
        eta_of_eps: BTreeMap::new(),
        sampler: sampler.clone(),
        samples: table.len(),
        witnesses: Vec::new(),
        no_delta: Vec::new(),
        degenerate_excluded: 0,
    };
    for &eps in eps_list {
        let key = format!("{eps}");
        match estimate_delta_on(&table, eps) {
            Ok(d) => {
                report.eps_to_delta.insert(key.clone(), d.delta);
                if let Some(w) = d.witness {
                    report.witnesses.push(Witness {
                        eps,
                        kind: "delta".into(),
                        point: w.into_vec(),
                    });
                }
            }
            Err(Error::NoPositiveDelta { .. }) => report.no_delta.push(eps),
            Err(e) => return Err(e),
        }
        let k = estimate_linear_k_on(&table, eps)?;
        report
            .eta_of_eps
            .insert(key.clone(), contraction_factor(k.k)?);
        report.k_of_eps.insert(key, k.k);
        report.degenerate_excluded += k.degenerate;
        if let Some(w) = k.witness {
            report.witnesses.push(Witness {
                eps,
                kind: "linear".into(),
                point: w.into_vec(),
            });
        }
    }
    Ok(report)
}

//! Distances, excess and localized Hausdorff (Attouch–Wets) gaps, and the
//! nearest-set machinery of a couple.

mod couple;
mod dykstra;
mod faces;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use couple::{
    displacement_vector, make_couple, Couple, CoupleOptions, DisplacementOptions, NearestSet,
};
pub use dykstra::dykstra_project;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::sampling::{unit_directions, Region, SamplerSpec};
use crate::sets::ConvexSet;

const LOCAL_DYKSTRA_TOL: f64 = 1e-10;
const LOCAL_DYKSTRA_CAP: usize = 200_000;

/// `dist(x, S)`.
pub fn point_dist(x: &Point, s: &ConvexSet) -> Result<f64> {
    s.dist(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    Exact,
    /// The true gap is at least `value`.
    LowerBoundSampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub value: f64,
    pub kind: GapKind,
    pub samples: usize,
}

impl GapEstimate {
    fn exact(value: f64, samples: usize) -> Self {
        GapEstimate {
            value,
            kind: GapKind::Exact,
            samples,
        }
    }
}

/// How candidate points of `A ∩ N·B` are drawn when no exact formula applies.
///
/// With `grid_step` a cubic grid over `[-N, N]^d` is projected onto the
/// truncated set; otherwise `boundary_samples` seeded points (half inside the
/// ball, half far outside it) are.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSampler {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    0x5eed
}

impl Default for GapSampler {
    fn default() -> Self {
        GapSampler {
            grid_step: None,
            boundary_samples: Some(512),
            seed: default_seed(),
        }
    }
}

impl GapSampler {
    pub fn boundary(count: usize, seed: u64) -> Self {
        GapSampler {
            grid_step: None,
            boundary_samples: Some(count),
            seed,
        }
    }

    pub fn grid(step: f64) -> Self {
        GapSampler {
            grid_step: Some(step),
            boundary_samples: None,
            seed: default_seed(),
        }
    }

    fn candidates(&self, dim: usize, radius: f64) -> Result<Vec<Point>> {
        if let Some(step) = self.grid_step {
            return SamplerSpec::grid(Region::cube(dim, radius), step).points();
        }
        let count = self.boundary_samples.unwrap_or(512);
        if count == 0 {
            return Err(Error::Config("boundary_samples must be positive".into()));
        }
        let inner = count.div_ceil(2);
        let mut pts = SamplerSpec::random(
            Region::Ball {
                center: vec![0.0; dim],
                radius,
            },
            inner,
            self.seed,
        )
        .points()?;
        for (i, u) in unit_directions(dim, count - inner, self.seed ^ 0x9e37_79b9)
            .into_iter()
            .enumerate()
        {
            let r = if i % 2 == 0 { 2.0 } else { 10.0 };
            pts.push(u.scale(r * radius));
        }
        Ok(pts)
    }
}

/// Projection onto `A ∩ N·B`, assumed nonempty.
fn project_truncated(a: &ConvexSet, ball: &ConvexSet, radius: f64, y: &Point) -> Result<Point> {
    let p = a.proj(y)?;
    if p.norm() <= radius {
        return Ok(p);
    }
    dykstra_project(&[a, ball], y, LOCAL_DYKSTRA_TOL, LOCAL_DYKSTRA_CAP)
}

/// `e_N(A, B) = sup { dist(a, B) : a ∈ A, ‖a‖ ≤ N }`, zero when the
/// truncation is empty.
pub fn excess_local(
    a: &ConvexSet,
    b: &ConvexSet,
    n: u32,
    sampler: &GapSampler,
) -> Result<GapEstimate> {
    let dim = a.dim();
    if b.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: b.dim(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "localization radius must be positive".into(),
        ));
    }
    let radius = f64::from(n);
    if a == b {
        return Ok(GapEstimate::exact(0.0, 0));
    }
    let origin = Point::zeros(dim);
    if a.dist(&origin)? > radius {
        return Ok(GapEstimate::exact(0.0, 0));
    }
    if let Some(vs) = a.vertices() {
        // dist(·, B) is convex, so its max over a polytope sits at a vertex.
        if vs.iter().all(|v| v.norm() <= radius) {
            let dists: Vec<f64> = vs.iter().map(|v| b.dist(v)).collect::<Result<_>>()?;
            return Ok(GapEstimate::exact(
                dists.into_iter().fold(0.0, f64::max),
                vs.len(),
            ));
        }
    }
    let ball = ConvexSet::ball(origin, radius)?;
    let cands = sampler.candidates(dim, radius)?;
    let dists: Vec<f64> = cands
        .par_iter()
        .map(|y| {
            let p = project_truncated(a, &ball, radius, y)?;
            b.dist(&p)
        })
        .collect::<Result<_>>()?;
    Ok(GapEstimate {
        value: dists.into_iter().fold(0.0, f64::max),
        kind: GapKind::LowerBoundSampled,
        samples: cands.len(),
    })
}

/// `h_N(A, B) = max { e_N(A, B), e_N(B, A) }`.
pub fn aw_gap(a: &ConvexSet, b: &ConvexSet, n: u32, sampler: &GapSampler) -> Result<GapEstimate> {
    let ab = excess_local(a, b, n, sampler)?;
    let ba = excess_local(b, a, n, sampler)?;
    let kind = if ab.kind == GapKind::Exact && ba.kind == GapKind::Exact {
        GapKind::Exact
    } else {
        GapKind::LowerBoundSampled
    };
    Ok(GapEstimate {
        value: ab.value.max(ba.value),
        kind,
        samples: ab.samples + ba.samples,
    })
}

/// `diam(S)`: exact for polytopes and balls, a support-sampled lower bound
/// for other bounded sets.
pub fn diameter_estimate(s: &ConvexSet) -> Result<f64> {
    if let Some(vs) = s.vertices() {
        let mut d = 0.0_f64;
        for (i, p) in vs.iter().enumerate() {
            for q in &vs[i + 1..] {
                d = d.max(p.dist(q));
            }
        }
        return Ok(d);
    }
    match s {
        ConvexSet::Ball(b) => return Ok(2.0 * b.radius()),
        ConvexSet::Translate(t) => return diameter_estimate(t.inner()),
        _ => {}
    }
    if !s.is_bounded() {
        return Err(Error::Unbounded);
    }
    let mut d = 0.0_f64;
    for u in unit_directions(s.dim(), 720, 11) {
        let p = s.support_point(&u)?;
        let q = s.support_point(&(-&u))?;
        d = d.max(p.dist(&q));
    }
    Ok(d)
}

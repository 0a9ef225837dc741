//! Deterministic point samplers over boxes and balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Grid { step: f64 },
    Random { count: usize, seed: u64 },
}

/// A compact region plus a rule for drawing sample points from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub region: Region,
    pub mode: SampleMode,
}

impl Region {
    pub fn cube(dim: usize, half_width: f64) -> Region {
        Region::Box {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h),
            Region::Ball { center, radius } => {
                x.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    <= radius * radius * (1.0 + 1e-12)
            }
        }
    }
}

impl SamplerSpec {
    pub fn grid(region: Region, step: f64) -> Self {
        SamplerSpec {
            region,
            mode: SampleMode::Grid { step },
        }
    }

    pub fn random(region: Region, count: usize, seed: u64) -> Self {
        SamplerSpec {
            region,
            mode: SampleMode::Random { count, seed },
        }
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn validate(&self) -> Result<()> {
        match &self.region {
            Region::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::Config(
                        "sampler box bounds disagree in length".into(),
                    ));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::Config("sampler box has lo > hi".into()));
                }
            }
            Region::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(Error::Config("sampler ball needs a positive radius".into()));
                }
            }
        }
        match self.mode {
            SampleMode::Grid { step } if !(step > 0.0) => {
                Err(Error::Config(format!("grid step {step} must be positive")))
            }
            SampleMode::Random { count: 0, .. } => {
                Err(Error::Config("random sample count must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Materialise the sample points (grid order is lexicographic, last axis fastest).
    pub fn points(&self) -> Result<Vec<Point>> {
        self.validate()?;
        let (lo, hi) = self.region.bounds();
        let dim = lo.len();
        match self.mode {
            SampleMode::Grid { step } => {
                let axes: Vec<Vec<f64>> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&l, &h)| grid_axis(l, h, step))
                    .collect();
                let total: usize = axes.iter().map(Vec::len).product();
                if total > 50_000_000 {
                    return Err(Error::Config(format!("grid has {total} points; refusing")));
                }
                let mut out = Vec::with_capacity(total);
                let mut idx = vec![0usize; dim];
                loop {
                    let p: Vec<f64> = idx.iter().zip(&axes).map(|(i, a)| a[*i]).collect();
                    if self.region.contains(&p) {
                        out.push(Point::new(p));
                    }
                    let mut k = dim;
                    loop {
                        if k == 0 {
                            return Ok(out);
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < axes[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
            SampleMode::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(count);
                while out.len() < count {
                    let p: Vec<f64> = lo
                        .iter()
                        .zip(&hi)
                        .map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l })
                        .collect();
                    if self.region.contains(&p) {
                        out.push(Point::new(p));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let span = hi - lo;
    let ratio = span / step;
    let k = ratio.round();
    if (ratio - k).abs() <= 1e-9 * ratio.max(1.0) {
        // Exact subdivision keeps nice values such as 0 on the grid.
        let k = k as usize;
        if k == 0 {
            return vec![lo];
        }
        (0..=k)
            .map(|i| lo + span * (i as f64) / (k as f64))
            .collect()
    } else {
        let k = ratio.floor() as usize;
        (0..=k).map(|i| lo + step * i as f64).collect()
    }
}

/// `count` unit vectors in ℝ^dim: evenly spaced angles in the plane,
/// seeded uniform directions otherwise.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Point> {
    if dim == 1 {
        return vec![Point::from([1.0]), Point::from([-1.0])];
    }
    if dim == 2 {
        return (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                Point::from([t.cos(), t.sin()])
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 2 * dim);
    for i in 0..dim {
        out.push(Point::basis(dim, i));
        out.push(-&Point::basis(dim, i));
    }
    while out.len() < count + 2 * dim {
        let p = Point::new((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect());
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            out.push(p.scale(1.0 / n));
        }
    }
    out
}

//! Attouch–Wets convergent set sequences `(A_n, B_n) → (A, B)` with
//! certificates, including the adaptive wedge construction that defeats
//! d-stability when the nearest set is unbounded.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{aw_gap, Couple, GapSampler};
use crate::point::Point;
use crate::sets::ConvexSet;

/// Excursion target of the adaptive schedule and its hit tolerance.
pub const EXCURSION_TARGET: f64 = 0.5;
pub const EXCURSION_TOL: f64 = 1e-3;
/// Steps allowed in one adversarial block before giving up.
pub const BLOCK_SAFETY_CAP: u64 = 1_000_000;

/// The sets used at one step together with the certificate
/// `N ↦ bound on max{h_N(A_n, A), h_N(B_n, B)}`.
#[derive(Clone, Debug)]
pub struct StepSets {
    pub a: Arc<ConvexSet>,
    pub b: Arc<ConvexSet>,
    pub cert: BTreeMap<u32, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Translation,
    VertexJitter,
    Adversarial,
}

/// A pull-based generator of perturbed sets: the runner hands over the
/// previous iterate `a_{n-1}` and receives `(A_n, B_n)`, or `None` once the
/// schedule is exhausted.
pub trait Schedule {
    fn kind(&self) -> ScheduleKind;
    fn dim(&self) -> usize;
    fn next(&mut self, n: u64, prev_a: &Point) -> Result<Option<StepSets>>;
    /// Completed excursion blocks, for schedules that track them.
    fn excursions(&self) -> &[Excursion] {
        &[]
    }
}

/// A vanishing rate `n ↦ r(n) ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Zero,
    /// `n^-p`, `p > 0`.
    InversePower(f64),
    /// `2^-n`.
    Geometric,
}

impl Rate {
    pub fn value(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            Rate::Zero => 0.0,
            Rate::InversePower(p) => n.powf(-p),
            Rate::Geometric => (-n).exp2(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rate::Zero)
    }

    fn ensure_vanishing(&self) -> Result<()> {
        let tail = self.value(1_000_000);
        if tail > 1e-3 {
            return Err(Error::Config(format!(
                "rate `{self}` does not vanish (r(1e6) = {tail:e})"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Zero => write!(f, "0"),
            Rate::InversePower(p) if *p == 1.0 => write!(f, "1/n"),
            Rate::InversePower(p) => write!(f, "1/n^{p}"),
            Rate::Geometric => write!(f, "2^-n"),
        }
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let rate = match t.as_str() {
            "0" => Rate::Zero,
            "1/n" => Rate::InversePower(1.0),
            "2^-n" | "2^(-n)" => Rate::Geometric,
            _ => match t.strip_prefix("1/n^") {
                Some(p) => {
                    let p: f64 = p
                        .trim_matches(|c| c == '(' || c == ')')
                        .parse()
                        .map_err(|_| Error::Config(format!("bad exponent in rate `{s}`")))?;
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(Error::Config(format!(
                            "rate `{s}` needs a positive exponent"
                        )));
                    }
                    Rate::InversePower(p)
                }
                None => return Err(Error::Config(format!("unrecognised rate `{s}`"))),
            },
        };
        Ok(rate)
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyTo {
    #[default]
    Both,
    A,
    B,
}

fn cert_map(radii: &[u32], value: f64) -> BTreeMap<u32, f64> {
    radii.iter().map(|&r| (r, value)).collect()
}

/// `A_n = A` and `B_n = B`.
pub struct ConstantSchedule {
    a: Arc<ConvexSet>,
    b: Arc<ConvexSet>,
    radii: Vec<u32>,
}

impl ConstantSchedule {
    pub fn new(a: ConvexSet, b: ConvexSet, radii: Vec<u32>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        Ok(ConstantSchedule {
            a: Arc::new(a),
            b: Arc::new(b),
            radii,
        })
    }
}

impl Schedule for ConstantSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Constant
    }

    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn next(&mut self, _n: u64, _prev_a: &Point) -> Result<Option<StepSets>> {
        Ok(Some(StepSets {
            a: Arc::clone(&self.a),
            b: Arc::clone(&self.b),
            cert: cert_map(&self.radii, 0.0),
        }))
    }
}

/// `A_n = A + r(n)·axis`, `B_n = B + r(n)·axis` (either side may be left fixed).
pub struct TranslationSchedule {
    a: ConvexSet,
    b: ConvexSet,
    rate: Rate,
    axis: Point,
    apply_to: ApplyTo,
    radii: Vec<u32>,
}

impl TranslationSchedule {
    pub fn new(
        a: ConvexSet,
        b: ConvexSet,
        rate: Rate,
        axis: Point,
        apply_to: ApplyTo,
        radii: Vec<u32>,
    ) -> Result<Self> {
        axis.ensure_dim(a.dim())?;
        if b.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        if !axis.is_finite() {
            return Err(Error::Config("translation axis must be finite".into()));
        }
        rate.ensure_vanishing()?;
        Ok(TranslationSchedule {
            a,
            b,
            rate,
            axis,
            apply_to,
            radii,
        })
    }

    pub fn shift(&self, n: u64) -> Point {
        self.axis.scale(self.rate.value(n))
    }

    /// `‖t_n‖`; translating by `t` moves every point by exactly `‖t‖`.
    pub fn cert(&self, n: u64) -> f64 {
        self.shift(n).norm()
    }
}

impl Schedule for TranslationSchedule {
    fn kind(&self) -> ScheduleKind {
        if self.rate.is_zero() || self.axis.norm() == 0.0 {
            ScheduleKind::Constant
        } else {
            ScheduleKind::Translation
        }
    }

    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn next(&mut self, n: u64, _prev_a: &Point) -> Result<Option<StepSets>> {
        let t = self.shift(n);
        let a = match self.apply_to {
            ApplyTo::Both | ApplyTo::A => self.a.clone().translate(t.clone())?,
            ApplyTo::B => self.a.clone(),
        };
        let b = match self.apply_to {
            ApplyTo::Both | ApplyTo::B => self.b.clone().translate(t.clone())?,
            ApplyTo::A => self.b.clone(),
        };
        Ok(Some(StepSets {
            a: Arc::new(a),
            b: Arc::new(b),
            cert: cert_map(&self.radii, t.norm()),
        }))
    }
}

/// What a jitter step moves: each vertex of a polytope independently, or a
/// non-polytopal set rigidly. Either way the Hausdorff distance to the limit
/// set is at most `r(n)`.
#[derive(Clone, Debug)]
enum Jittered {
    Vertices(Vec<Point>),
    Rigid(ConvexSet),
}

impl Jittered {
    fn of(s: &ConvexSet) -> Self {
        match s.vertices() {
            Some(v) => Jittered::Vertices(v),
            None => Jittered::Rigid(s.clone()),
        }
    }

    fn ball_vector(dim: usize, r: f64, rng: &mut ChaCha8Rng) -> Point {
        loop {
            let u = Point::new((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect());
            if u.norm() <= 1.0 {
                return u.scale(r);
            }
        }
    }

    fn sample(&self, dim: usize, r: f64, rng: &mut ChaCha8Rng) -> Result<ConvexSet> {
        match self {
            Jittered::Vertices(vs) => ConvexSet::vpolytope(
                vs.iter()
                    .map(|v| v + &Self::ball_vector(dim, r, rng))
                    .collect(),
            ),
            Jittered::Rigid(s) => s.clone().translate(Self::ball_vector(dim, r, rng)),
        }
    }
}

/// Vertex jitter: every vertex of a polytope (or a whole non-polytopal set)
/// moved by an independent seeded vector of norm at most `r(n)`.
pub struct VertexJitterSchedule {
    a: Jittered,
    b: Jittered,
    dim: usize,
    rate: Rate,
    seed: u64,
    radii: Vec<u32>,
}

impl VertexJitterSchedule {
    pub fn new(
        a: &ConvexSet,
        b: &ConvexSet,
        rate: Rate,
        seed: u64,
        radii: Vec<u32>,
    ) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        rate.ensure_vanishing()?;
        Ok(VertexJitterSchedule {
            a: Jittered::of(a),
            b: Jittered::of(b),
            dim: a.dim(),
            rate,
            seed,
            radii,
        })
    }

    /// The perturbed pair at step `n`; a pure function of `(seed, n)`.
    pub fn sets_at(&self, n: u64) -> Result<(ConvexSet, ConvexSet)> {
        let r = self.rate.value(n);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(n);
        let a = self.a.sample(self.dim, r, &mut rng)?;
        let b = self.b.sample(self.dim, r, &mut rng)?;
        Ok((a, b))
    }
}

impl Schedule for VertexJitterSchedule {
    fn kind(&self) -> ScheduleKind {
        if self.rate.is_zero() {
            ScheduleKind::Constant
        } else {
            ScheduleKind::VertexJitter
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn next(&mut self, n: u64, _prev_a: &Point) -> Result<Option<StepSets>> {
        let (a, b) = self.sets_at(n)?;
        Ok(Some(StepSets {
            a: Arc::new(a),
            b: Arc::new(b),
            cert: cert_map(&self.radii, self.rate.value(n)),
        }))
    }
}

/// `conv(line(P¹, P³) ∪ ray(P¹ → P²))` with `P¹ = (x0 + n·x0, −1, 0)`,
/// `P² = (x0 + n·x0 + 1/(n·x0), 0, 0)` and `P³ = (0, 1/n, 1/n)`.
pub fn make_wedge(n: u32, x0: f64) -> Result<ConvexSet> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "wedge index must be at least 1".into(),
        ));
    }
    if !(x0 >= 1.0) || !x0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wedge abscissa {x0} must be finite and >= 1"
        )));
    }
    let nf = f64::from(n);
    let p1 = Point::from([x0 + nf * x0, -1.0, 0.0]);
    let p2 = Point::from([x0 + nf * x0 + 1.0 / (nf * x0), 0.0, 0.0]);
    let p3 = Point::from([0.0, 1.0 / nf, 1.0 / nf]);
    ConvexSet::wedge(p1, p3, p2)
}

/// `{z = 0, y >= 0}` and `{z = 0}` in ℝ³.
pub fn unbounded_limit_sets() -> Result<(ConvexSet, ConvexSet)> {
    let a: ConvexSet = serde_json::from_str(
        r#"{"type":"planar","origin":[0,0,0],"u":[1,0,0],"w":[0,1,0],
            "halfplanes":[{"normal":[0,1],"offset":0}]}"#,
    )?;
    let b = ConvexSet::hyperplane([0.0, 0.0, 1.0], 0.0)?;
    Ok((a, b))
}

/// One completed excursion of the adaptive schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub block: u32,
    /// Abscissa the block's wedge was built from.
    pub x_start: f64,
    /// Index of the iterate that hit the target.
    pub peak_index: u64,
    pub peak_dist: f64,
    pub block_steps: u64,
    /// Sampled `h_N(wedge, A)` for this block.
    pub cert: f64,
    /// The iterate after the reset step, once known.
    pub reset_point: Option<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    InBlock,
    AwaitReset,
}

/// The adaptive counterexample: run block `k` with `(A_{k, x_{k−1}}, B)`
/// until the iterate is at distance `1/2` from `A ∩ B`, spend one step on
/// `(A, B)` to return to the positive x-axis, and start the next block.
pub struct AdversarialSchedule {
    a: Arc<ConvexSet>,
    b: Arc<ConvexSet>,
    block: u32,
    x_prev: f64,
    wedge: Arc<ConvexSet>,
    phase: Phase,
    block_steps: u64,
    block_cert: f64,
    radius: u32,
    sampler: GapSampler,
    excursions: Vec<Excursion>,
}

impl AdversarialSchedule {
    /// `a`, `b` are the limit sets; `a0 = (x, 0, 0)` with `x >= 1`.
    pub fn new(
        a: ConvexSet,
        b: ConvexSet,
        a0: &Point,
        radius: u32,
        sampler: GapSampler,
    ) -> Result<Self> {
        if a.dim() != 3 || b.dim() != 3 {
            return Err(Error::Config(
                "the adversarial schedule lives in three dimensions".into(),
            ));
        }
        a0.ensure_dim(3)?;
        if !(a0[0] >= 1.0) || a0[1] != 0.0 || a0[2] != 0.0 {
            return Err(Error::Config(format!(
                "adversarial start must be (x, 0, 0) with x >= 1, got {a0}"
            )));
        }
        let mut s = AdversarialSchedule {
            a: Arc::new(a),
            b: Arc::new(b),
            block: 0,
            x_prev: a0[0],
            wedge: Arc::new(make_wedge(1, a0[0])?),
            phase: Phase::InBlock,
            block_steps: 0,
            block_cert: f64::INFINITY,
            radius,
            sampler,
            excursions: Vec::new(),
        };
        s.start_block(a0[0])?;
        Ok(s)
    }

    fn start_block(&mut self, x: f64) -> Result<()> {
        self.block += 1;
        self.x_prev = x;
        let wedge = make_wedge(self.block, x)?;
        let gap = aw_gap(&wedge, &self.a, self.radius, &self.sampler)?.value;
        // Keep the certificate envelope nonincreasing across blocks.
        self.block_cert = gap.min(self.block_cert);
        self.wedge = Arc::new(wedge);
        self.block_steps = 0;
        self.phase = Phase::InBlock;
        Ok(())
    }

    pub fn block(&self) -> u32 {
        self.block
    }

    pub fn current_wedge(&self) -> &ConvexSet {
        &self.wedge
    }

    fn step(&self, a: &Arc<ConvexSet>) -> StepSets {
        StepSets {
            a: Arc::clone(a),
            b: Arc::clone(&self.b),
            cert: cert_map(&[self.radius], self.block_cert),
        }
    }
}

impl Schedule for AdversarialSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Adversarial
    }

    fn dim(&self) -> usize {
        3
    }

    fn excursions(&self) -> &[Excursion] {
        &self.excursions
    }

    fn next(&mut self, n: u64, prev_a: &Point) -> Result<Option<StepSets>> {
        match self.phase {
            Phase::AwaitReset => {
                // prev_a = P_A P_B (peak); it should sit on the positive x-axis.
                if prev_a[1].abs() > 1e-6 || prev_a[2].abs() > 1e-6 || prev_a[0] < 1.0 {
                    return Err(Error::ValidationFailure(format!(
                        "reset step left the iterate at {prev_a}, not on the ray x >= 1"
                    )));
                }
                if let Some(last) = self.excursions.last_mut() {
                    last.reset_point = Some(prev_a.clone());
                }
                self.start_block(prev_a[0])?;
                self.block_steps = 1;
                Ok(Some(self.step(&self.wedge)))
            }
            Phase::InBlock => {
                let dist = self.a.dist(prev_a)?;
                if n > 1 && dist >= EXCURSION_TARGET - EXCURSION_TOL {
                    self.excursions.push(Excursion {
                        block: self.block,
                        x_start: self.x_prev,
                        peak_index: n - 1,
                        peak_dist: dist,
                        block_steps: self.block_steps,
                        cert: self.block_cert,
                        reset_point: None,
                    });
                    self.phase = Phase::AwaitReset;
                    return Ok(Some(self.step(&self.a)));
                }
                if self.block_steps >= BLOCK_SAFETY_CAP {
                    return Err(Error::ScheduleStall {
                        block: self.block as usize,
                        steps: self.block_steps,
                    });
                }
                self.block_steps += 1;
                Ok(Some(self.step(&self.wedge)))
            }
        }
    }
}

/// Schedule description used in scenario files and on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant,
    Translation {
        rule: Rate,
        axis: Vec<f64>,
        #[serde(default)]
        apply_to: ApplyTo,
    },
    Jitter {
        rate: Rate,
        seed: u64,
    },
    Adversarial,
}

impl ScheduleSpec {
    /// Builds the schedule for a limit couple. `start` is needed by adaptive kinds.
    pub fn build(
        &self,
        couple: &Couple,
        start: &Point,
        radii: &[u32],
        sampler: &GapSampler,
    ) -> Result<Box<dyn Schedule>> {
        let (a, b) = (couple.a().clone(), couple.b().clone());
        Ok(match self {
            ScheduleSpec::Constant => Box::new(ConstantSchedule::new(a, b, radii.to_vec())?),
            ScheduleSpec::Translation {
                rule,
                axis,
                apply_to,
            } => Box::new(TranslationSchedule::new(
                a,
                b,
                *rule,
                Point::new(axis.clone()),
                *apply_to,
                radii.to_vec(),
            )?),
            ScheduleSpec::Jitter { rate, seed } => Box::new(VertexJitterSchedule::new(
                &a,
                &b,
                *rate,
                *seed,
                radii.to_vec(),
            )?),
            ScheduleSpec::Adversarial => {
                let radius = radii.first().copied().unwrap_or(5);
                Box::new(AdversarialSchedule::new(
                    a,
                    b,
                    start,
                    radius,
                    sampler.clone(),
                )?)
            }
        })
    }
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    /// JSON, or the shorthands `constant`, `adversarial`,
    /// `translation:RULE:x,y,..[:a|b|both]` and `jitter:RATE[:SEED]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Config(format!("schedule: {e}")));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["constant"] => Ok(ScheduleSpec::Constant),
            ["adversarial"] => Ok(ScheduleSpec::Adversarial),
            ["translation", rule, axis, rest @ ..] => {
                let axis = parse_coords(axis)?;
                let apply_to = match rest {
                    [] | ["both"] => ApplyTo::Both,
                    ["a"] => ApplyTo::A,
                    ["b"] => ApplyTo::B,
                    _ => return Err(Error::Config(format!("bad translation schedule `{s}`"))),
                };
                Ok(ScheduleSpec::Translation {
                    rule: rule.parse()?,
                    axis,
                    apply_to,
                })
            }
            ["jitter", rate] => Ok(ScheduleSpec::Jitter {
                rate: rate.parse()?,
                seed: 42,
            }),
            ["jitter", rate, seed] => Ok(ScheduleSpec::Jitter {
                rate: rate.parse()?,
                seed: seed
                    .parse()
                    .map_err(|_| Error::Config(format!("bad jitter seed `{seed}`")))?,
            }),
            _ => Err(Error::Config(format!("unrecognised schedule `{s}`"))),
        }
    }
}

/// Parses `"x,y,..."` into coordinates.
pub fn parse_coords(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad coordinate `{t}` in `{s}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{make_couple, CoupleOptions};

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
    fn rates_parse_and_print() {
        for (s, v10) in [
            ("0", 0.0),
            ("1/n", 0.1),
            ("1/n^2", 0.01),
            ("2^-n", 2f64.powi(-10)),
        ] {
            let r: Rate = s.parse().unwrap();
            assert!((r.value(10) - v10).abs() < 1e-15);
            assert_eq!(r.to_string().parse::<Rate>().unwrap(), r);
        }
        assert!("n".parse::<Rate>().is_err());
        assert!("1/n^-1".parse::<Rate>().is_err());
    }

    #[test]
    fn slow_rate_rejected() {
        let (a, b) = trapezoids();
        let r = TranslationSchedule::new(
            a,
            b,
            Rate::InversePower(0.1),
            Point::from([1.0, 0.0]),
            ApplyTo::Both,
            vec![5],
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn translation_certificates() {
        let (a, b) = trapezoids();
        let s = TranslationSchedule::new(
            a.clone(),
            b.clone(),
            Rate::InversePower(1.0),
            Point::from([1.0, 0.0]),
            ApplyTo::Both,
            vec![5, 10],
        )
        .unwrap();
        assert_eq!(s.kind(), ScheduleKind::Translation);
        assert!((s.cert(4) - 0.25).abs() < 1e-15);
        let g = Point::from([0.0, 2.0f64.powi(-10)]);
        let s2 = TranslationSchedule::new(
            a.clone(),
            b.clone(),
            Rate::Geometric,
            Point::from([0.0, 1.0]),
            ApplyTo::Both,
            vec![5],
        )
        .unwrap();
        assert_eq!(s2.cert(10), g.norm());
        let s0 = TranslationSchedule::new(
            a,
            b,
            Rate::Zero,
            Point::from([1.0, 0.0]),
            ApplyTo::Both,
            vec![5],
        )
        .unwrap();
        assert_eq!(s0.kind(), ScheduleKind::Constant);
    }

    #[test]
    fn jitter_stays_within_rate() {
        let (a, b) = trapezoids();
        let s = VertexJitterSchedule::new(&a, &b, Rate::InversePower(1.0), 42, vec![5]).unwrap();
        let (a1, _) = s.sets_at(1).unwrap();
        let va = a.vertices().unwrap();
        for (p, q) in va.iter().zip(a1.vertices().unwrap()) {
            assert!(p.dist(&q) <= 1.0);
        }
        assert_eq!(s.sets_at(7).unwrap(), s.sets_at(7).unwrap());
        let ball = ConvexSet::ball([0.0, 0.0], 1.0).unwrap();
        let s = VertexJitterSchedule::new(&ball, &b, Rate::InversePower(1.0), 1, vec![5]).unwrap();
        let (moved, _) = s.sets_at(4).unwrap();
        let ConvexSet::Translate(t) = &moved else {
            panic!("ball should move rigidly")
        };
        assert!(t.shift().norm() <= 0.25 && t.shift().norm() > 0.0);
    }

    #[test]
    fn wedge_points() {
        let w = make_wedge(1, 1.0).unwrap();
        for p in [
            [2.0, -1.0, 0.0],
            [3.0, 0.0, 0.0],
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 0.5],
        ] {
            assert!(w.contains(&Point::from(p), 1e-9).unwrap());
        }
        assert!(make_wedge(0, 1.0).is_err());
        assert!(make_wedge(1, 0.5).is_err());
    }

    #[test]
    fn adversarial_first_block_and_reset() {
        let (a, b) = unbounded_limit_sets().unwrap();
        let a0 = Point::from([1.0, 0.0, 0.0]);
        let mut s =
            AdversarialSchedule::new(a.clone(), b.clone(), &a0, 5, GapSampler::default()).unwrap();
        let mut x = a0.clone();
        let mut n = 1;
        while s.excursions().len() < 2 {
            let step = s.next(n, &x).unwrap().unwrap();
            let y = step.b.proj(&x).unwrap();
            x = step.a.proj(&y).unwrap();
            n += 1;
            assert!(n < 10_000);
        }
        let e = &s.excursions()[0];
        assert!(e.peak_dist >= EXCURSION_TARGET - EXCURSION_TOL);
        let r = e.reset_point.as_ref().unwrap();
        assert!(r[0] >= 1.0 && r[1].abs() <= 1e-6 && r[2].abs() <= 1e-6);
        assert!(s.excursions()[1].cert < e.cert);
    }

    #[test]
    fn spec_strings() {
        let t: ScheduleSpec = "translation:1/n:1,0".parse().unwrap();
        assert_eq!(
            t,
            ScheduleSpec::Translation {
                rule: Rate::InversePower(1.0),
                axis: vec![1.0, 0.0],
                apply_to: ApplyTo::Both
            }
        );
        let j: ScheduleSpec = r#"{"kind":"jitter","rate":"1/n","seed":42}"#.parse().unwrap();
        assert_eq!(j, "jitter:1/n:42".parse().unwrap());
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<ScheduleSpec>(&json).unwrap(), t);
        assert!("spiral".parse::<ScheduleSpec>().is_err());
    }

    #[test]
    fn spec_builds_against_couple() {
        let (a, b) = trapezoids();
        let c = make_couple(a, b, &CoupleOptions::default()).unwrap();
        let spec: ScheduleSpec = "translation:1/n:1,0".parse().unwrap();
        let mut s = spec
            .build(&c, &Point::from([2.0, 2.0]), &[5], &GapSampler::default())
            .unwrap();
        let st = s.next(2, &Point::from([0.0, 0.0])).unwrap().unwrap();
        assert_eq!(st.cert[&5], 0.5);
        assert!(ScheduleSpec::Adversarial
            .build(&c, &Point::from([2.0, 2.0]), &[5], &GapSampler::default())
            .is_err());
    }
}

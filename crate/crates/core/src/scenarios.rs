//! Bundled scenarios, configuration ingestion and the batch runner that
//! persists traces, verdicts and regularity reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{run_perturbed_ap, stability_verdict, RunOptions, Trace, TraceMeta, Verdict};
use crate::error::{Error, Result};
use crate::metrics::{make_couple, Couple, CoupleOptions, GapSampler};
use crate::perturbations::{Excursion, ScheduleSpec};
use crate::point::Point;
use crate::regularity::{regularity_report, RegularityReport};
use crate::sampling::SamplerSpec;
use crate::sets::SetDescription;

/// Environment variable overriding the default seeds of every scenario.
pub const SEED_ENV: &str = "FEASILAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

const BUNDLED: [&str; 7] = [
    include_str!("../scenarios/trapezoids.json"),
    include_str!("../scenarios/unbounded-wedge.json"),
    include_str!("../scenarios/subspaces-orthogonal.json"),
    include_str!("../scenarios/subspaces-oblique.json"),
    include_str!("../scenarios/disc-vs-halfplane.json"),
    include_str!("../scenarios/disc-vs-shifted-halfplane.json"),
    include_str!("../scenarios/disjoint-rectangles.json"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularitySpec {
    pub eps: Vec<f64>,
    pub sampler: SamplerSpec,
}

/// Assertions checked against every start point's verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_stable_observed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_observed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_excursions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_tail_sup_dist: Option<f64>,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn default_radii() -> Vec<u32> {
    vec![5]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub dimension: usize,
    pub a: SetDescription,
    pub b: SetDescription,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_analytic: Option<SetDescription>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub e_bounded: bool,
    /// `A` and `B − v` touch tangentially, so Dykstra cannot resolve `E`
    /// to the cross-check tolerance in reasonable time.
    #[serde(default, skip_serializing_if = "is_false")]
    pub e_tangent: bool,
    pub start_points: Vec<Vec<f64>>,
    pub schedule: ScheduleSpec,
    pub iterations: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_radii")]
    pub cert_radii: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ScenarioSpec =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        let check = |what: &str, got: usize| {
            if got == d {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{}: {what} has dimension {got}, expected {d}",
                    self.name
                )))
            }
        };
        check("A", self.a.build()?.dim())?;
        check("B", self.b.build()?.dim())?;
        if let Some(e) = &self.e_analytic {
            check("E", e.build()?.dim())?;
        }
        if self.start_points.is_empty() {
            return Err(Error::Config(format!("{}: no start points", self.name)));
        }
        for p in &self.start_points {
            check("start point", p.len())?;
        }
        if self.iterations == 0 {
            return Err(Error::Config(format!(
                "{}: iterations must be positive",
                self.name
            )));
        }
        if let Some(r) = &self.regularity {
            check("regularity sampler", r.sampler.dim())?;
            r.sampler.validate()?;
        }
        Ok(())
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    /// Seed from `FEASILAB_SEED`, else the scenario's, else the global default.
    pub fn effective_seed(&self) -> u64 {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .or(self.seed)
            .unwrap_or(DEFAULT_SEED)
    }

    pub fn couple_options(&self) -> Result<CoupleOptions> {
        Ok(CoupleOptions {
            e_analytic: self
                .e_analytic
                .as_ref()
                .map(SetDescription::build)
                .transpose()?,
            seed: self.effective_seed(),
            ..CoupleOptions::default()
        })
    }

    pub fn build_couple(&self) -> Result<Couple> {
        make_couple(self.a.build()?, self.b.build()?, &self.couple_options()?)
    }

    pub fn gap_sampler(&self) -> GapSampler {
        GapSampler::boundary(512, self.effective_seed())
    }
}

/// Summary line for `list`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub description: String,
    pub dimension: usize,
    pub e_analytic: Option<SetDescription>,
    pub e_bounded: bool,
    pub schedule: ScheduleSpec,
    pub iterations: u64,
}

pub fn bundled_scenarios() -> Result<Vec<ScenarioSpec>> {
    BUNDLED.iter().map(|s| ScenarioSpec::from_json(s)).collect()
}

pub fn find_scenario(name: &str) -> Result<ScenarioSpec> {
    bundled_scenarios()?
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn list_scenarios() -> Result<Vec<ScenarioSummary>> {
    Ok(bundled_scenarios()?
        .into_iter()
        .map(|s| ScenarioSummary {
            name: s.name,
            description: s.description,
            dimension: s.dimension,
            e_analytic: s.e_analytic,
            e_bounded: s.e_bounded,
            schedule: s.schedule,
            iterations: s.iterations,
        })
        .collect())
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub schedule: Option<ScheduleSpec>,
    pub iterations: Option<u64>,
    pub start: Option<Vec<f64>>,
    /// Skip the regularity report.
    pub skip_regularity: bool,
}

impl Overrides {
    pub fn apply(&self, spec: &ScenarioSpec) -> Result<ScenarioSpec> {
        let mut s = spec.clone();
        if let Some(sch) = &self.schedule {
            s.schedule = sch.clone();
        }
        if let Some(n) = self.iterations {
            s.iterations = n;
        }
        if let Some(p) = &self.start {
            s.start_points = vec![p.clone()];
        }
        if self.skip_regularity {
            s.regularity = None;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug)]
pub struct StartRun {
    pub start: Point,
    pub trace: Trace,
    pub verdict: Verdict,
    pub excursions: Vec<Excursion>,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub spec: ScenarioSpec,
    pub couple: Couple,
    pub runs: Vec<StartRun>,
    pub regularity: Option<RegularityReport>,
    /// Failed `expected` assertions; empty when all hold or none are declared.
    pub failures: Vec<String>,
}

/// Runs a scenario in memory: couple, perturbed run per start point,
/// verdicts, regularity report and expectation checks.
pub fn execute(spec: &ScenarioSpec) -> Result<ScenarioOutcome> {
    spec.validate()?;
    let couple = spec.build_couple()?;
    let opts = RunOptions {
        cap: spec.iterations,
        tol: spec.tolerance("run", 1e-10),
    };
    let verdict_tol = spec.tolerance("verdict", 1e-6);
    let sampler = spec.gap_sampler();
    let mut runs = Vec::with_capacity(spec.start_points.len());
    for p in &spec.start_points {
        let start = Point::new(p.clone());
        let mut schedule = spec
            .schedule
            .build(&couple, &start, &spec.cert_radii, &sampler)?;
        let trace = run_perturbed_ap(&couple, schedule.as_mut(), &start, opts)?;
        let verdict = stability_verdict(&trace, &couple, verdict_tol, None)?;
        runs.push(StartRun {
            start,
            trace,
            verdict,
            excursions: schedule.excursions().to_vec(),
        });
    }
    let regularity = spec
        .regularity
        .as_ref()
        .map(|r| regularity_report(&couple, &r.eps, &r.sampler))
        .transpose()?;
    let failures = spec
        .expected
        .as_ref()
        .map(|e| check_expected(e, &runs))
        .unwrap_or_default();
    Ok(ScenarioOutcome {
        spec: spec.clone(),
        couple,
        runs,
        regularity,
        failures,
    })
}

fn check_expected(e: &Expected, runs: &[StartRun]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let v = &r.verdict;
        if let Some(want) = e.d_stable_observed {
            if v.d_stable_observed != want {
                out.push(format!(
                    "start {i}: d_stable_observed = {}, expected {want}",
                    v.d_stable_observed
                ));
            }
        }
        if let Some(want) = e.stable_observed {
            if v.stable_observed != want {
                out.push(format!(
                    "start {i}: stable_observed = {}, expected {want}",
                    v.stable_observed
                ));
            }
        }
        if let Some(lp) = &e.limit_point {
            let tol = e.limit_tol.unwrap_or(1e-6);
            match &v.limit_point {
                Some(p) if p.dist(&Point::new(lp.clone())) <= tol => {}
                Some(p) => out.push(format!("start {i}: limit {p} not within {tol} of expected")),
                None => out.push(format!("start {i}: no limit point")),
            }
        }
        if let Some(k) = e.min_excursions {
            if r.excursions.len() < k {
                out.push(format!(
                    "start {i}: {} excursions, expected at least {k}",
                    r.excursions.len()
                ));
            }
        }
        if let Some(d) = e.min_tail_sup_dist {
            if v.tail_sup_dist < d {
                out.push(format!(
                    "start {i}: tail sup dist {} below {d}",
                    v.tail_sup_dist
                ));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub start: Vec<f64>,
    pub trace: PathBuf,
    pub trace_meta: PathBuf,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excursions: Vec<Excursion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub dir: PathBuf,
    pub runs: Vec<RunEntry>,
    pub regularity: Option<PathBuf>,
    pub wall_time_s: f64,
    /// `None` when the scenario declares no expectations.
    pub passed: Option<bool>,
    pub failures: Vec<String>,
}

fn fresh_run_dir(out: &Path, scenario: &str) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let base = out.join(scenario);
    let mut dir = base.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{k}"));
        k += 1;
    }
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

/// Executes a scenario and writes `<out>/<name>/<timestamp>/` with
/// `trace.csv` (plus `trace_<i>.csv` for further start points), JSON
/// sidecars, `verdict.json` and `regularity.json`.
pub fn run_scenario(name: &str, overrides: &Overrides, out: &Path) -> Result<RunReport> {
    let spec = overrides.apply(&find_scenario(name)?)?;
    run_spec(&spec, out)
}

pub fn run_spec(spec: &ScenarioSpec, out: &Path) -> Result<RunReport> {
    let t0 = Instant::now();
    let outcome = execute(spec)?;
    let dir = fresh_run_dir(out, &spec.name)?;
    let mut runs = Vec::new();
    for (i, r) in outcome.runs.iter().enumerate() {
        let stem = if i == 0 {
            "trace".to_string()
        } else {
            format!("trace_{i}")
        };
        let csv_path = dir.join(format!("{stem}.csv"));
        r.trace
            .write_csv(BufWriter::new(fs::File::create(&csv_path)?))?;
        let meta_path = dir.join(format!("{stem}.json"));
        write_json(&meta_path, &TraceMeta::from(&r.trace))?;
        runs.push(RunEntry {
            start: r.start.to_vec(),
            trace: csv_path,
            trace_meta: meta_path,
            verdict: r.verdict.clone(),
            excursions: r.excursions.clone(),
        });
    }
    let regularity = match &outcome.regularity {
        Some(rep) => {
            let p = dir.join("regularity.json");
            write_json(&p, rep)?;
            Some(p)
        }
        None => None,
    };
    let report = RunReport {
        scenario: spec.name.clone(),
        dir: dir.clone(),
        runs,
        regularity,
        wall_time_s: t0.elapsed().as_secs_f64(),
        passed: spec.expected.as_ref().map(|_| outcome.failures.is_empty()),
        failures: outcome.failures,
    };
    write_json(&dir.join("verdict.json"), &report)?;
    Ok(report)
}

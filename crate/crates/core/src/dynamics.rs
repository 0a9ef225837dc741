//! Alternating projections and perturbed alternating projections, with
//! per-iteration diagnostics measured against the limit couple.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Couple;
use crate::perturbations::Schedule;
use crate::point::Point;

/// Iterates whose norm exceeds this are reported as diverging.
const BLOWUP_NORM: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub n: u64,
    pub a: Point,
    pub b: Point,
    pub dist_a_e: f64,
    pub dist_b_f: f64,
    pub dist_a_a: f64,
    pub dist_b_b: f64,
    /// `dist(a_n, E) / dist(b_n, F)`, recorded when the denominator exceeds the run tolerance.
    pub cos_diag: Option<f64>,
    /// Per-step set-convergence certificate, keyed by localization radius.
    pub aw_cert: BTreeMap<u32, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalStatus {
    Converged,
    CapReached,
    DivergedDiagnostic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: TerminalStatus,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub cap: u64,
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            cap: 10_000,
            tol: 1e-10,
        }
    }
}

fn record(
    couple: &Couple,
    n: u64,
    a: Point,
    b: Point,
    tol: f64,
    aw_cert: BTreeMap<u32, f64>,
) -> Result<TraceRecord> {
    let dist_a_e = couple.dist_to_e(&a)?;
    let dist_b_f = couple.dist_to_f(&b)?;
    Ok(TraceRecord {
        n,
        dist_a_a: couple.a().dist(&a)?,
        dist_b_b: couple.b().dist(&b)?,
        cos_diag: (dist_b_f > tol).then(|| dist_a_e / dist_b_f),
        dist_a_e,
        dist_b_f,
        a,
        b,
        aw_cert,
    })
}

fn blew_up(p: &Point) -> bool {
    !p.is_finite() || p.norm() > BLOWUP_NORM
}

/// `d_n = P_B(c_{n−1})`, `c_n = P_A(d_n)` until `‖c_n − c_{n−1}‖ <= tol` or
/// `c_n` is already in `E` (`d_n − c_n = v`). Records carry `a = c_n`, `b = d_n`.
pub fn run_ap(couple: &Couple, c0: &Point, opts: RunOptions) -> Result<Trace> {
    c0.ensure_dim(couple.dim())?;
    let mut records = Vec::new();
    let mut c = c0.clone();
    for n in 1..=opts.cap {
        let d = couple.b().proj(&c)?;
        let next = couple.a().proj(&d)?;
        if blew_up(&next) {
            return Ok(Trace {
                records,
                status: TerminalStatus::DivergedDiagnostic,
            });
        }
        let done = next.dist(&c) <= opts.tol || (&d - &next).dist(couple.v()) <= opts.tol;
        records.push(record(
            couple,
            n,
            next.clone(),
            d,
            opts.tol,
            BTreeMap::new(),
        )?);
        if done {
            return Ok(Trace {
                records,
                status: TerminalStatus::Converged,
            });
        }
        c = next;
    }
    Ok(Trace {
        records,
        status: TerminalStatus::CapReached,
    })
}

/// `b_n = P_{B_n}(a_{n−1})`, `a_n = P_{A_n}(b_n)` for exactly `cap` steps
/// (or until the schedule runs out).
pub fn run_perturbed_ap(
    couple: &Couple,
    schedule: &mut dyn Schedule,
    a0: &Point,
    opts: RunOptions,
) -> Result<Trace> {
    if schedule.dim() != couple.dim() {
        return Err(Error::DimensionMismatch {
            expected: couple.dim(),
            got: schedule.dim(),
        });
    }
    a0.ensure_dim(couple.dim())?;
    if opts.cap == 0 {
        return Err(Error::InvalidArgument(
            "iteration cap must be at least 1".into(),
        ));
    }
    let mut records = Vec::with_capacity(opts.cap.min(1 << 20) as usize);
    let mut a = a0.clone();
    for n in 1..=opts.cap {
        let Some(step) = schedule.next(n, &a)? else {
            break;
        };
        let b = step.b.proj(&a)?;
        let next = step.a.proj(&b)?;
        if blew_up(&next) {
            return Ok(Trace {
                records,
                status: TerminalStatus::DivergedDiagnostic,
            });
        }
        records.push(record(couple, n, next.clone(), b, opts.tol, step.cert)?);
        a = next;
    }
    Ok(Trace {
        records,
        status: TerminalStatus::CapReached,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub d_stable_observed: bool,
    pub stable_observed: bool,
    pub limit_point: Option<Point>,
    /// `max` of `dist(a_n, E)` and `dist(b_n, F)` over the tail window.
    pub tail_sup_dist: f64,
    pub tail_window: usize,
}

/// Default tail: the last 10% of the records, at least 50 (capped at the length).
pub fn default_tail_window(len: usize) -> usize {
    (len / 10).max(50).min(len)
}

pub fn stability_verdict(
    trace: &Trace,
    couple: &Couple,
    tol: f64,
    tail_window: Option<usize>,
) -> Result<Verdict> {
    let len = trace.records.len();
    if len == 0 {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    let w = tail_window.unwrap_or_else(|| default_tail_window(len));
    if w == 0 || w > len {
        return Err(Error::InvalidArgument(format!(
            "tail window {w} not in 1..={len}"
        )));
    }
    let tail = &trace.records[len - w..];
    let tail_sup_dist = tail
        .iter()
        .map(|r| r.dist_a_e.max(r.dist_b_f))
        .fold(0.0, f64::max);
    let d_stable = tail_sup_dist <= tol;
    let last = &trace.records[len - 1];
    let cauchy = tail
        .iter()
        .all(|r| r.a.dist(&last.a) <= tol && r.b.dist(&last.b) <= tol);
    let paired = last.b.dist(&(&last.a + couple.v())) <= tol;
    let stable = d_stable && cauchy && paired;
    Ok(Verdict {
        d_stable_observed: d_stable,
        stable_observed: stable,
        limit_point: stable.then(|| last.a.clone()),
        tail_sup_dist,
        tail_window: w,
    })
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Config(format!("bad number `{s}` in trace")))
}

impl Trace {
    pub fn dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.a.dim())
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// CSV with 17 significant digits, so reading it back is bit-exact.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let dim = self.dim();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["n".to_string()];
        header.extend((0..dim).map(|i| format!("a{i}")));
        header.extend((0..dim).map(|i| format!("b{i}")));
        header.extend(
            [
                "dist_a_E", "dist_b_F", "dist_a_A", "dist_b_B", "cos_diag", "aw_cert",
            ]
            .map(String::from),
        );
        out.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.n.to_string()];
            row.extend(r.a.iter().map(|&x| fmt_num(x)));
            row.extend(r.b.iter().map(|&x| fmt_num(x)));
            row.extend([r.dist_a_e, r.dist_b_f, r.dist_a_a, r.dist_b_b].map(fmt_num));
            row.push(r.cos_diag.map(fmt_num).unwrap_or_default());
            row.push(
                r.aw_cert
                    .iter()
                    .map(|(k, v)| format!("{k}:{}", fmt_num(*v)))
                    .collect::<Vec<_>>()
                    .join(";"),
            );
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, status: TerminalStatus) -> Result<Trace> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let cols = header.len();
        if cols < 7 || (cols - 7) % 2 != 0 {
            return Err(Error::Config(format!("trace CSV has {cols} columns")));
        }
        let dim = (cols - 7) / 2;
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let f = |i: usize| parse_num(&row[i]);
            let a = Point::new((1..=dim).map(f).collect::<Result<_>>()?);
            let b = Point::new((dim + 1..=2 * dim).map(f).collect::<Result<_>>()?);
            let k = 2 * dim + 1;
            let cos = &row[k + 4];
            let mut aw_cert = BTreeMap::new();
            for item in row[k + 5].split(';').filter(|s| !s.is_empty()) {
                let (key, val) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("bad certificate `{item}`")))?;
                let key = key
                    .parse()
                    .map_err(|_| Error::Config(format!("bad certificate radius `{key}`")))?;
                aw_cert.insert(key, parse_num(val)?);
            }
            records.push(TraceRecord {
                n: row[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad index `{}`", &row[0])))?,
                a,
                b,
                dist_a_e: f(k)?,
                dist_b_f: f(k + 1)?,
                dist_a_a: f(k + 2)?,
                dist_b_b: f(k + 3)?,
                cos_diag: if cos.is_empty() {
                    None
                } else {
                    Some(parse_num(cos)?)
                },
                aw_cert,
            });
        }
        Ok(Trace { records, status })
    }
}

/// JSON sidecar stored next to a trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub terminal_status: TerminalStatus,
    pub records: usize,
    pub dim: usize,
}

impl From<&Trace> for TraceMeta {
    fn from(t: &Trace) -> Self {
        TraceMeta {
            terminal_status: t.status,
            records: t.records.len(),
            dim: t.dim(),
        }
    }
}

//! Trajectory CSV, envelope CSV and summary JSON.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::analysis::{self, BoundEnvelope, DEFAULT_PROMINENCE};
use crate::integrator::{RunFlag, Trajectory};
use crate::model::ModelParams;

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "S", "I", "R", "alpha", "beta", "phase"];
pub const ENVELOPE_HEADER: [&str; 3] = ["t", "lower", "upper"];

/// 17 significant digits: enough for an exact round trip.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-run digest written next to the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub class: Option<String>,
    pub t_star: Option<f64>,
    pub c_star: Option<f64>,
    #[serde(rename = "I_star")]
    pub i_star: Option<f64>,
    pub t_extinct: Option<f64>,
    pub peak_count: usize,
    pub decay_slope: Option<f64>,
    pub flags: Vec<RunFlag>,
}

impl Summary {
    pub fn of(traj: &Trajectory<f64>, params: &ModelParams<f64>) -> Self {
        let ev = &traj.events;
        let class = analysis::classify(params.p, &params.recurrence)
            .ok()
            .map(|c| c.name().to_string());
        let decay_slope = analysis::decay_window(traj)
            .and_then(|w| analysis::fit_decay(traj, params.p, w).ok())
            .map(|f| f.slope);
        Summary {
            class,
            t_star: ev.t_star,
            c_star: ev.c_star,
            i_star: ev.i_star,
            t_extinct: ev.t_extinct,
            peak_count: analysis::count_peaks(traj, DEFAULT_PROMINENCE).count,
            decay_slope,
            flags: ev.flags.iter().copied().collect(),
        }
    }
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn write_trajectory<W: Write>(sink: W, traj: &Trajectory<f64>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRAJECTORY_HEADER)?;
    for k in 0..traj.len() {
        let s = traj.states[k];
        w.write_record([
            num(traj.times[k]),
            num(s.s),
            num(s.i),
            num(s.r),
            num(traj.alphas[k]),
            num(traj.betas[k]),
            traj.phases[k].label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_envelope<W: Write>(
    sink: W,
    traj: &Trajectory<f64>,
    env: &BoundEnvelope<f64>,
) -> csv::Result<()> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(ENVELOPE_HEADER)?;
    for &t in &traj.times {
        let (lo, hi) = (env.lower(t), env.upper(t));
        if lo.is_none() && hi.is_none() {
            continue;
        }
        w.write_record([num(t), opt(lo), opt(hi)])?;
    }
    w.flush()?;
    Ok(())
}

/// A trajectory as read back from CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryTable {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub phase: Vec<String>,
}

impl TrajectoryTable {
    pub fn from_trajectory(traj: &Trajectory<f64>) -> Self {
        TrajectoryTable {
            t: traj.times.clone(),
            s: traj.states.iter().map(|x| x.s).collect(),
            i: traj.states.iter().map(|x| x.i).collect(),
            r: traj.states.iter().map(|x| x.r).collect(),
            alpha: traj.alphas.clone(),
            beta: traj.betas.clone(),
            phase: traj.phases.iter().map(|p| p.label().to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvelopeTable {
    pub t: Vec<f64>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

fn field(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<f64, String> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse::<f64>()
        .map_err(|_| format!("line {line}: column {} is not a number: `{raw}`", idx + 1))
}

fn reader<R: Read>(src: R, header: &[&str]) -> Result<csv::Reader<R>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(src);
    let found = rdr.headers().map_err(|e| e.to_string())?.clone();
    if found.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(format!(
            "unexpected header `{}` (expected `{}`)",
            found.iter().collect::<Vec<_>>().join(","),
            header.join(",")
        ));
    }
    Ok(rdr)
}

pub fn read_trajectory<R: Read>(src: R) -> Result<TrajectoryTable, String> {
    let mut rdr = reader(src, &TRAJECTORY_HEADER)?;
    let mut out = TrajectoryTable::default();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| format!("line {line}: {e}"))?;
        out.t.push(field(&rec, 0, line)?);
        out.s.push(field(&rec, 1, line)?);
        out.i.push(field(&rec, 2, line)?);
        out.r.push(field(&rec, 3, line)?);
        out.alpha.push(field(&rec, 4, line)?);
        out.beta.push(field(&rec, 5, line)?);
        let phase = rec.get(6).unwrap_or("").trim();
        if !matches!(phase, "pre" | "post" | "extinct") {
            return Err(format!("line {line}: unknown phase `{phase}`"));
        }
        out.phase.push(phase.to_string());
    }
    Ok(out)
}

pub fn read_envelope<R: Read>(src: R) -> Result<EnvelopeTable, String> {
    let mut rdr = reader(src, &ENVELOPE_HEADER)?;
    let mut out = EnvelopeTable::default();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| format!("line {line}: {e}"))?;
        let opt = |idx: usize| -> Result<Option<f64>, String> {
            match rec.get(idx).map(str::trim) {
                None | Some("") => Ok(None),
                Some(_) => field(&rec, idx, line).map(Some),
            }
        };
        out.t.push(field(&rec, 0, line)?);
        out.lower.push(opt(1)?);
        out.upper.push(opt(2)?);
    }
    Ok(out)
}

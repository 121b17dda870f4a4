use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{parse_formats, OutputKind, Overrides, RunConfig};
use super::output::{self, Summary, TrajectoryTable};
use super::svg;
use super::{ClassifyArgs, Command, Failure, PlotArgs, RunArgs, SweepArgs, VerifyArgs};
use crate::analysis::{self, check_envelope, compute_envelope, EnvelopeReport};
use crate::integrator::{integrate, RunFlag, Trajectory};
use crate::model::RecurrenceSpec;
use crate::scenarios::{self, SCENARIO_NAMES};

/// Largest tolerated `|S + I + R - 1|` over a run.
const CONSERVATION_TOL: f64 = 1e-10;

type Outcome = Result<(), Failure>;

pub(super) fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Simulate(a) => simulate(&a),
        Command::Classify(a) => classify(&a),
        Command::Verify(a) => verify(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Plot(a) => plot(&a),
        Command::ListScenarios => {
            for name in SCENARIO_NAMES {
                let spec = scenarios::builtin::<f64>(name)?;
                println!("{name}\t{}", spec.expected_class);
            }
            Ok(())
        }
    }
}

fn bad(e: impl ToString) -> Failure {
    Failure::BadInput(e.to_string())
}

fn resolve(args: &RunArgs) -> Result<RunConfig, Failure> {
    let formats = args
        .format
        .as_deref()
        .map(parse_formats)
        .transpose()
        .map_err(bad)?;
    let ov = Overrides {
        dt: args.dt,
        t_end: args.t_end,
        formats,
        out: args.out.clone(),
    };
    match (&args.source.scenario, &args.source.config) {
        (Some(name), _) => Ok(RunConfig::from_scenario(name, &ov)?),
        (None, Some(path)) => RunConfig::from_file(path, &ov).map_err(bad),
        (None, None) => Err(bad("either --scenario or --config is required")),
    }
}

fn print_json<V: Serialize>(value: &V) {
    if let Ok(text) = serde_json::to_string_pretty(value) {
        println!("{text}");
    }
}

fn ensure_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| bad(format!("cannot create {}: {e}", dir.display())))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    bad(format!("cannot write {}: {e}", path.display()))
}

fn write_csv(path: &Path, traj: &Trajectory<f64>) -> Outcome {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    output::write_trajectory(BufWriter::new(file), traj).map_err(|e| io_err(path, e))
}

fn write_json<V: Serialize>(path: &Path, value: &V) -> Outcome {
    output::write_json(path, value).map_err(|e| io_err(path, e))
}

fn write_svg(
    path: &Path,
    title: &str,
    table: &TrajectoryTable,
    env: Option<&output::EnvelopeTable>,
) -> Outcome {
    let text = svg::trajectory_chart(title, table, env).to_svg();
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Conservation always; positivity only when the recurrence rate cannot go negative.
fn check_invariants(cfg: &RunConfig, traj: &Trajectory<f64>) -> Outcome {
    let drift = traj.max_conservation_error();
    if drift.is_nan() || drift > CONSERVATION_TOL {
        return Err(Failure::Invariant(format!(
            "{}: conservation error {drift:e} exceeds {CONSERVATION_TOL:e}",
            cfg.name
        )));
    }
    if !cfg.params.recurrence.can_be_negative()
        && traj.events.flags.contains(&RunFlag::StateLeftUnitInterval)
    {
        return Err(Failure::Invariant(format!(
            "{}: a compartment left [0, 1] (min {:e})",
            cfg.name,
            traj.min_component_before_extinction()
        )));
    }
    Ok(())
}

/// Integrates and writes the selected outputs under `dir` with file stem `stem`.
fn run_and_write(
    cfg: &RunConfig,
    dir: &Path,
    stem: &str,
) -> Result<(Trajectory<f64>, Summary), Failure> {
    let traj = integrate(&cfg.params, cfg.init, cfg.grid)?;
    let summary = Summary::of(&traj, &cfg.params);
    ensure_dir(dir)?;
    for kind in &cfg.outputs {
        match kind {
            OutputKind::Csv => write_csv(&dir.join(format!("{stem}.csv")), &traj)?,
            OutputKind::Json => write_json(&dir.join(format!("{stem}.json")), &summary)?,
            OutputKind::Svg => write_svg(
                &dir.join(format!("{stem}.svg")),
                stem,
                &TrajectoryTable::from_trajectory(&traj),
                None,
            )?,
        }
    }
    Ok((traj, summary))
}

fn simulate(args: &RunArgs) -> Outcome {
    let cfg = resolve(args)?;
    let (traj, summary) = run_and_write(&cfg, &cfg.output_dir, &cfg.name)?;
    print_json(&summary);
    check_invariants(&cfg, &traj)
}

fn classify(args: &ClassifyArgs) -> Outcome {
    let (mut p, mut recurrence) = match (&args.scenario, &args.config) {
        (Some(name), _) => {
            let k = scenarios::builtin::<f64>(name)?.params;
            (k.p, k.recurrence)
        }
        (None, Some(path)) => {
            let k = RunConfig::from_file(path, &Overrides::default())
                .map_err(bad)?
                .params;
            (k.p, k.recurrence)
        }
        (None, None) => (f64::NAN, RecurrenceSpec::none()),
    };
    if let Some(v) = args.p {
        p = v;
    }
    if let Some(d) = args.delta {
        recurrence = RecurrenceSpec::Constant(d);
    }
    if !p.is_finite() {
        return Err(bad("p must be given and finite"));
    }
    recurrence.validate()?;
    println!("{}", analysis::classify(p, &recurrence)?);
    Ok(())
}

fn verify(args: &VerifyArgs) -> Outcome {
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return Err(bad(format!(
            "--tol must be finite and non-negative, got {}",
            args.tol
        )));
    }
    let cfg = resolve(&args.run)?;
    let traj = integrate(&cfg.params, cfg.init, cfg.grid)?;
    ensure_dir(&cfg.output_dir)?;
    let report_path = cfg.output_dir.join(format!("{}_report.json", cfg.name));
    let report = match compute_envelope(&traj, &cfg.params) {
        Ok(env) => {
            let path = cfg.output_dir.join(format!("{}_envelope.csv", cfg.name));
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            output::write_envelope(BufWriter::new(file), &traj, &env)
                .map_err(|e| io_err(&path, e))?;
            check_envelope(&traj, &env, args.tol)
        }
        Err(why) => EnvelopeReport::inapplicable(&why, args.tol),
    };
    write_json(&report_path, &report)?;
    print_json(&report);
    if !report.applicable {
        return Err(Failure::Inapplicable(format!(
            "{}: envelope does not apply: {}",
            cfg.name,
            report.reason.as_deref().unwrap_or("unknown")
        )));
    }
    if !report.passed() {
        return Err(Failure::Invariant(format!(
            "{}: envelope violated (lower {:e}, upper {:e}, extinction bracketed: {:?})",
            cfg.name,
            report.max_lower_violation,
            report.max_upper_violation,
            report.extinction_in_bracket
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct IndexEntry {
    value: f64,
    name: String,
    summary: Summary,
}

fn parse_values(list: &str) -> Result<Vec<f64>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("sweep value `{s}` is not a finite number")))
        })
        .collect()
}

/// Runs are executed one after another; each writes only its own files.
fn sweep(args: &SweepArgs) -> Outcome {
    let base = resolve(&args.run)?;
    let values = parse_values(&args.values)?;
    let mut configs = Vec::with_capacity(values.len());
    for &v in &values {
        let mut cfg = base.clone();
        cfg.set_param(&args.param, v).map_err(bad)?;
        cfg.params.validate()?;
        cfg.name = format!("{}_{}_{v}", base.name, args.param);
        configs.push(cfg);
    }
    let dir = base.output_dir.clone();
    ensure_dir(&dir)?;
    let mut index = Vec::with_capacity(configs.len());
    let mut first_failure = None;
    for (cfg, &value) in configs.iter().zip(&values) {
        let (traj, summary) = run_and_write(cfg, &dir, &cfg.name)?;
        if let Err(f) = check_invariants(cfg, &traj) {
            first_failure.get_or_insert(f);
        }
        index.push(IndexEntry {
            value,
            name: cfg.name.clone(),
            summary,
        });
    }
    write_json(&dir.join("index.json"), &index)?;
    print_json(&index);
    first_failure.map_or(Ok(()), Err)
}

fn plot(args: &PlotArgs) -> Outcome {
    let read = |path: &PathBuf| {
        File::open(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))
    };
    let table = output::read_trajectory(read(&args.input)?)
        .map_err(|e| bad(format!("{}: {e}", args.input.display())))?;
    let env = match &args.envelope {
        Some(path) => Some(
            output::read_envelope(read(path)?)
                .map_err(|e| bad(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trajectory".into());
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args
            .input
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
    };
    if !dir.as_os_str().is_empty() {
        ensure_dir(&dir)?;
    }
    let path = dir.join(format!("{stem}.svg"));
    write_svg(&path, &stem, &table, env.as_ref())?;
    println!("{}", path.display());
    Ok(())
}

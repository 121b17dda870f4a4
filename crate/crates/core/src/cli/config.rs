//! Run configuration: JSON config files and scenario-based runs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TrendError;
use crate::integrator::GridSpec;
use crate::model::{ModelParams, RecurrenceSpec, State};
use crate::scenarios::{self, normalize};

const DEFAULT_T_END: f64 = 50.0;
const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputKind::Csv),
            "json" => Ok(OutputKind::Json),
            "svg" => Ok(OutputKind::Svg),
            other => Err(format!(
                "unknown output format `{other}` (expected csv, json or svg)"
            )),
        }
    }
}

/// Parses a comma-separated output list such as `csv,json,svg`.
pub fn parse_formats(list: &str) -> Result<BTreeSet<OutputKind>, String> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(OutputKind::from_str)
        .collect()
}

/// On-disk config document. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    #[serde(default)]
    pub l_alpha: f64,
    #[serde(default)]
    pub l_beta: f64,
    pub p: f64,
    /// A number for a constant rate, or a sinusoid object.
    #[serde(default)]
    pub delta: Option<RecurrenceSpec<f64>>,
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
    #[serde(rename = "R0", default)]
    pub r0: f64,
    /// When present, `S0`, `I0`, `R0` are head-counts in a population of `N`.
    #[serde(rename = "N", default)]
    pub population: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub extinction_threshold: Option<f64>,
    #[serde(default)]
    pub refinement_tol: Option<f64>,
    #[serde(default)]
    pub outputs: Option<Vec<OutputKind>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub params: ModelParams<f64>,
    pub init: State<f64>,
    pub grid: GridSpec<f64>,
    pub outputs: BTreeSet<OutputKind>,
    pub output_dir: PathBuf,
    pub population: f64,
}

/// Overrides given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub formats: Option<BTreeSet<OutputKind>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_scenario(name: &str, ov: &Overrides) -> Result<Self, TrendError> {
        let spec = scenarios::builtin::<f64>(name)?;
        let mut cfg = RunConfig {
            name: spec.name,
            params: spec.params,
            init: spec.init,
            grid: spec.grid,
            outputs: [OutputKind::Csv, OutputKind::Json].into_iter().collect(),
            output_dir: PathBuf::from("out"),
            population: spec.population,
        };
        cfg.apply(ov)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, ov: &Overrides) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        let mut cfg = RunConfig::from_document(name, file).map_err(|e| e.to_string())?;
        cfg.apply(ov).map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn from_document(name: String, file: ConfigFile) -> Result<Self, TrendError> {
        let params = ModelParams {
            m1: file.m1,
            m2: file.m2,
            m3: file.m3,
            m4: file.m4,
            l_alpha: file.l_alpha,
            l_beta: file.l_beta,
            p: file.p,
            recurrence: file.delta.unwrap_or(RecurrenceSpec::none()),
        };
        params.validate()?;
        let (init, population) = match file.population {
            Some(n) => (normalize(file.s0, file.i0, file.r0, n)?, n),
            None => (State::new(file.s0, file.i0, file.r0), 1.0),
        };
        let mut grid = GridSpec::new(
            file.t_end.unwrap_or(DEFAULT_T_END),
            file.dt.unwrap_or(DEFAULT_DT),
        );
        if let Some(x) = file.extinction_threshold {
            grid.extinction_threshold = x;
        }
        if let Some(x) = file.refinement_tol {
            grid.refinement_tol = x;
        }
        let outputs = match file.outputs {
            Some(list) => list.into_iter().collect(),
            None => [OutputKind::Csv, OutputKind::Json].into_iter().collect(),
        };
        Ok(RunConfig {
            name,
            params,
            init,
            grid,
            outputs,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            population,
        })
    }

    fn apply(&mut self, ov: &Overrides) -> Result<(), TrendError> {
        if let Some(dt) = ov.dt {
            self.grid.dt = dt;
        }
        if let Some(t) = ov.t_end {
            self.grid.t_end = t;
        }
        if let Some(f) = &ov.formats {
            self.outputs = f.clone();
        }
        if let Some(o) = &ov.out {
            self.output_dir = o.clone();
        }
        if self.outputs.is_empty() {
            return Err(TrendError::InvalidGrid(
                "at least one output format is required".into(),
            ));
        }
        self.grid.validate()
    }

    /// Sets a named parameter; `delta` replaces the recurrence by a constant.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        let k = &mut self.params;
        match name {
            "m1" => k.m1 = value,
            "m2" => k.m2 = value,
            "m3" => k.m3 = value,
            "m4" => k.m4 = value,
            "l_alpha" => k.l_alpha = value,
            "l_beta" => k.l_beta = value,
            "p" => k.p = value,
            "delta" => k.recurrence = RecurrenceSpec::Constant(value),
            other => {
                return Err(format!(
                    "unknown parameter `{other}` (expected one of m1, m2, m3, m4, l_alpha, l_beta, p, delta)"
                ))
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn sinusoid_delta_parses_bit_exact() {
        let f = parse(
            r#"{"m1":50,"m2":8,"m3":4,"m4":0.5,"l_alpha":0.3,"p":0,
                "delta":{"base":0.4,"amplitude":0.5,"angular_frequency":1.5707963267948966,"phase":-1.0},
                "S0":0.98,"I0":0.02}"#,
        )
        .unwrap();
        assert_eq!(
            f.delta,
            Some(RecurrenceSpec::Sinusoid {
                base: 0.4,
                amplitude: 0.5,
                angular_frequency: std::f64::consts::FRAC_PI_2,
                phase: -1.0
            })
        );
        let c = parse(r#"{"m1":1,"m2":1,"m3":1,"m4":1,"p":0,"delta":0.4,"S0":1,"I0":0}"#).unwrap();
        assert_eq!(c.delta, Some(RecurrenceSpec::Constant(0.4)));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = parse(r#"{"m1":1,"m2":1,"m3":1,"m4":1,"p":0,"S0":1,"I0":0,"lalpha":0.3}"#);
        assert!(err.is_err());
    }

    #[test]
    fn head_counts_are_normalized() {
        let f = parse(r#"{"m1":3,"m2":0.2,"m3":1,"m4":4,"p":-2,"S0":98,"I0":2,"N":100}"#).unwrap();
        let cfg = RunConfig::from_document("x".into(), f).unwrap();
        assert_eq!(cfg.init, State::new(0.98, 0.02, 0.0));
        assert_eq!(cfg.population, 100.0);
    }

    #[test]
    fn formats_and_overrides() {
        assert_eq!(
            parse_formats("csv, svg")
                .unwrap()
                .into_iter()
                .collect::<Vec<_>>(),
            vec![OutputKind::Csv, OutputKind::Svg]
        );
        assert!(parse_formats("png").is_err());
        let ov = Overrides {
            dt: Some(1e-2),
            t_end: Some(5.0),
            ..Default::default()
        };
        let cfg = RunConfig::from_scenario("sec41_p0", &ov).unwrap();
        assert_eq!((cfg.grid.dt, cfg.grid.t_end), (1e-2, 5.0));
        let mut cfg = cfg;
        assert!(cfg.set_param("p", -1.0).is_ok());
        assert_eq!(cfg.params.p, -1.0);
        assert!(cfg.set_param("gamma", 1.0).is_err());
    }
}

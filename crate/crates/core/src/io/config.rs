use std::path::PathBuf;

use serde::Deserialize;

use crate::cases::{find_case, CaseDefinition, ParamValue, Parameters};
use crate::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    Vtk,
    Csv,
    Both,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: String,
    hourglass_enabled: Option<bool>,
    alpha: Option<f64>,
    cfl: Option<f64>,
    end_time: Option<f64>,
    output_dir: Option<PathBuf>,
    snapshot_interval: Option<f64>,
    snapshot_format: Option<SnapshotFormat>,
    probe_interval: Option<f64>,
    #[serde(default)]
    parameters: toml::Table,
}

/// Validated run configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: String,
    pub parameters: Parameters,
    pub hourglass_enabled: bool,
    pub alpha: f64,
    pub cfl: Option<f64>,
    pub end_time: Option<f64>,
    pub output_dir: PathBuf,
    pub snapshot_interval: Option<f64>,
    pub snapshot_format: SnapshotFormat,
    pub probe_interval: Option<f64>,
}

impl RunConfig {
    /// The configured case with the run-level overrides applied.
    pub fn definition(&self) -> Result<CaseDefinition> {
        let mut case = find_case(&self.case)?.build(&self.parameters)?;
        case.hourglass.enabled = self.hourglass_enabled;
        case.hourglass.alpha = self.alpha;
        if let Some(cfl) = self.cfl {
            case.controls.cfl = cfl;
        }
        if let Some(end) = self.end_time {
            case.controls.end_time = end;
        }
        case.controls.validate()?;
        Ok(case)
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...`, searched inside `[section]` when given.
fn line_of_key(text: &str, section: Option<&str>, key: &str) -> usize {
    let mut current: Option<String> = None;
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            continue;
        }
        let name = trimmed.split('=').next().unwrap_or("").trim().trim_matches('"');
        if trimmed.contains('=') && name == key && current.as_deref() == section {
            return n + 1;
        }
    }
    0
}

fn config_error(line: usize, message: impl Into<String>) -> SimError {
    SimError::Config {
        line,
        message: message.into(),
    }
}

fn positive(text: &str, key: &str, value: Option<f64>) -> Result<Option<f64>> {
    match value {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(config_error(
            line_of_key(text, None, key),
            format!("`{key}` must be a positive number, got {v}"),
        )),
        other => Ok(other),
    }
}

/// Parses a TOML run configuration, builds the case once to validate the
/// parameters and reports problems with their line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |span| line_of_offset(text, span.start));
        config_error(line, e.message().to_string())
    })?;

    let mut parameters = Parameters::new();
    for (key, value) in &raw.parameters {
        let converted = match value {
            toml::Value::Integer(v) => ParamValue::Number(*v as f64),
            toml::Value::Float(v) => ParamValue::Number(*v),
            toml::Value::Boolean(v) => ParamValue::Flag(*v),
            toml::Value::String(v) => ParamValue::Text(v.clone()),
            other => {
                return Err(config_error(
                    line_of_key(text, Some("parameters"), key),
                    format!("parameter `{key}` has unsupported type {}", other.type_str()),
                ))
            }
        };
        parameters.insert(key.clone(), converted);
    }

    let alpha = raw.alpha.unwrap_or(crate::solver::HourglassParams::default().alpha);
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(config_error(line_of_key(text, None, "alpha"), "`alpha` must be non-negative"));
    }
    let config = RunConfig {
        case: raw.case,
        parameters,
        hourglass_enabled: raw.hourglass_enabled.unwrap_or(true),
        alpha,
        cfl: positive(text, "cfl", raw.cfl)?,
        end_time: positive(text, "end_time", raw.end_time)?,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("output")),
        snapshot_interval: positive(text, "snapshot_interval", raw.snapshot_interval)?,
        snapshot_format: raw.snapshot_format.unwrap_or(SnapshotFormat::Vtk),
        probe_interval: positive(text, "probe_interval", raw.probe_interval)?,
    };

    config.definition().map_err(|e| match e {
        SimError::Parameter { key, message } => config_error(
            line_of_key(text, Some("parameters"), &key),
            format!("parameter `{key}`: {message}"),
        ),
        SimError::InvalidInput(message) => {
            let line = if message.starts_with("unknown case") {
                line_of_key(text, None, "case")
            } else if message.contains("CFL") || message.contains("cfl") {
                line_of_key(text, None, "cfl")
            } else {
                0
            };
            config_error(line, message)
        }
        other => other,
    })?;
    Ok(config)
}

//! Plain-text run configuration: TOML with explicit `_deg` keys for angles;
//! everything internal is radians.

use std::path::PathBuf;

use pincer_core::analytics::{ScenarioParams, SpeedSpec};
use pincer_core::sim::SimConfig;
use serde::Deserialize;

/// Default speed multiplier over the exact critical speed.
pub const DEFAULT_MULTIPLIER: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// Syntax or structural failure, with the parser's location diagnostics.
    Parse { message: String },
    /// A required field is absent.
    MissingField { field: &'static str },
    /// A field violates a named invariant.
    Validation {
        invariant: &'static str,
        message: String,
    },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse { message } => write!(f, "config parse error: {message}"),
            ConfigError::MissingField { field } => {
                write!(f, "config parse error: missing required field `{field}`")
            }
            ConfigError::Validation { invariant, message } => {
                write!(f, "config validation error [{invariant}]: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Output formats for table runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Frames,
}

/// Fully validated run request.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub scenario: ScenarioParams,
    /// Inclusive even range of team sizes, stepped by 2.
    pub sweep_over_n: Option<(u32, u32)>,
    pub sim: Option<SimConfig>,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl RunSpec {
    /// Team sizes this spec covers, in output order.
    pub fn team_sizes(&self) -> Vec<u32> {
        match self.sweep_over_n {
            Some((start, end)) => (start..=end).step_by(2).collect(),
            None => vec![self.scenario.n],
        }
    }

    /// Scenario parameters for one team size.
    pub fn scenario_for(&self, n: u32) -> ScenarioParams {
        ScenarioParams { n, ..self.scenario }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<RawScenario>,
    sweep: Option<RawSweep>,
    sim: Option<RawSim>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: Option<u32>,
    r0: Option<f64>,
    r: Option<f64>,
    alpha_deg: Option<f64>,
    alpha_rad: Option<f64>,
    vt: Option<f64>,
    vs: Option<f64>,
    multiplier: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_start: Option<u32>,
    n_end: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    grid_cells: Option<usize>,
    dt: Option<f64>,
    frame_interval: Option<f64>,
    escape_radius: Option<f64>,
    max_sim_time: Option<f64>,
    clear_during_dash: Option<bool>,
    force: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    formats: Option<Vec<String>>,
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        message: e.to_string(),
    })?;
    let scenario = raw
        .scenario
        .ok_or(ConfigError::MissingField { field: "scenario" })?;

    let r0 = scenario.r0.ok_or(ConfigError::MissingField {
        field: "scenario.r0",
    })?;
    let r = scenario.r.ok_or(ConfigError::MissingField {
        field: "scenario.r",
    })?;
    let vt = scenario.vt.ok_or(ConfigError::MissingField {
        field: "scenario.vt",
    })?;
    let alpha = match (scenario.alpha_deg, scenario.alpha_rad) {
        (Some(deg), None) => deg.to_radians(),
        (None, Some(rad)) => rad,
        (None, None) => {
            return Err(ConfigError::MissingField {
                field: "scenario.alpha_deg (or alpha_rad)",
            })
        }
        (Some(_), Some(_)) => {
            return Err(ConfigError::Validation {
                invariant: "single angle key",
                message: "specify exactly one of alpha_deg and alpha_rad".into(),
            })
        }
    };
    let speed = match (scenario.vs, scenario.multiplier) {
        (Some(vs), None) => SpeedSpec::Absolute(vs),
        (None, Some(m)) => SpeedSpec::CriticalMultiple(m),
        (None, None) => SpeedSpec::CriticalMultiple(DEFAULT_MULTIPLIER),
        (Some(_), Some(_)) => {
            return Err(ConfigError::Validation {
                invariant: "single speed key",
                message: "specify at most one of vs and multiplier".into(),
            })
        }
    };

    let sweep_over_n = match raw.sweep {
        None => None,
        Some(sweep) => {
            let start = sweep.n_start.ok_or(ConfigError::MissingField {
                field: "sweep.n_start",
            })?;
            let end = sweep.n_end.ok_or(ConfigError::MissingField {
                field: "sweep.n_end",
            })?;
            if start % 2 != 0 || end % 2 != 0 {
                return Err(ConfigError::Validation {
                    invariant: "even team sizes",
                    message: format!("sweep range {start}..{end} must contain only even n"),
                });
            }
            if start < 2 || end < start {
                return Err(ConfigError::Validation {
                    invariant: "non-empty even range",
                    message: format!("need 2 <= n_start <= n_end, got {start}..{end}"),
                });
            }
            Some((start, end))
        }
    };

    let n = match (scenario.n, sweep_over_n) {
        (Some(n), _) => n,
        (None, Some((start, _))) => start,
        (None, None) => {
            return Err(ConfigError::MissingField {
                field: "scenario.n",
            });
        }
    };

    let params =
        ScenarioParams::new(n, r0, r, alpha, vt, speed).map_err(|e| ConfigError::Validation {
            invariant: "scenario parameters",
            message: e.to_string(),
        })?;

    let sim = raw.sim.map(|s| SimConfig {
        grid_cells: s.grid_cells,
        dt: s.dt,
        frame_interval: s.frame_interval.unwrap_or(0.0),
        escape_radius: s.escape_radius,
        max_sim_time: s.max_sim_time,
        clear_during_dash: s.clear_during_dash.unwrap_or(false),
        force_run: s.force.unwrap_or(false),
        ..SimConfig::default()
    });

    let output = raw.output;
    let output_dir = output
        .as_ref()
        .and_then(|o| o.dir.clone())
        .unwrap_or_else(|| "out".to_string());
    let formats = match output.as_ref().and_then(|o| o.formats.clone()) {
        None => vec![OutputFormat::Csv, OutputFormat::Json],
        Some(names) => {
            let mut formats = Vec::new();
            for name in names {
                let f = match name.as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    "frames" => OutputFormat::Frames,
                    other => {
                        return Err(ConfigError::Validation {
                            invariant: "known output format",
                            message: format!(
                                "unknown format {other:?}; expected csv, json or frames"
                            ),
                        })
                    }
                };
                if !formats.contains(&f) {
                    formats.push(f);
                }
            }
            formats
        }
    };

    Ok(RunSpec {
        scenario: params,
        sweep_over_n,
        sim,
        output_dir: PathBuf::from(output_dir),
        formats,
    })
}

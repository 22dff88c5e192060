//! Result tables: one row per team size with the speed benchmarks, schedule
//! quantities and optional simulation validation columns.

use pincer_core::analytics::critical_speed;
use pincer_core::error::Error as CoreError;
use pincer_core::schedule::{build_schedule, SweepSchedule};
use pincer_core::sim::{self, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunSpec;
use crate::fmt;

/// Column order of the emitted tables.
pub const COLUMNS: [&str; 18] = [
    "n",
    "v_lb",
    "v_simplified",
    "v_critical",
    "N_n",
    "R_N",
    "eta",
    "T_tilde_spiral",
    "T_tilde_in",
    "T_last",
    "T_l",
    "T_in_last",
    "T_in_f",
    "T_spiral_total",
    "T_in_total",
    "T_total",
    "sim_clear_time",
    "sim_verdict",
];

/// One table row. Schedule columns stay empty when the speed is infeasible
/// for that team size; simulation columns stay empty unless a simulation ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: u32,
    pub v_lb: f64,
    pub v_simplified: f64,
    pub v_critical: f64,
    #[serde(rename = "N_n")]
    pub n_sweeps: Option<u32>,
    #[serde(rename = "R_N")]
    pub r_n: Option<f64>,
    pub eta: Option<u8>,
    #[serde(rename = "T_tilde_spiral")]
    pub t_tilde_spiral: Option<f64>,
    #[serde(rename = "T_tilde_in")]
    pub t_tilde_in: Option<f64>,
    #[serde(rename = "T_last")]
    pub t_last: Option<f64>,
    #[serde(rename = "T_l")]
    pub t_l: Option<f64>,
    #[serde(rename = "T_in_last")]
    pub t_in_last: Option<f64>,
    #[serde(rename = "T_in_f")]
    pub t_in_f: Option<f64>,
    #[serde(rename = "T_spiral_total")]
    pub t_spiral_total: Option<f64>,
    #[serde(rename = "T_in_total")]
    pub t_in_total: Option<f64>,
    #[serde(rename = "T_total")]
    pub t_total: Option<f64>,
    pub sim_clear_time: Option<f64>,
    pub sim_verdict: Option<String>,
}

/// Outcome of a table run.
#[derive(Debug, Clone)]
pub struct Table {
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
    pub any_infeasible: bool,
}

fn row_from_schedule(s: &SweepSchedule) -> ResultRow {
    ResultRow {
        n: s.params.n,
        v_lb: s.benchmarks.v_lb,
        v_simplified: s.benchmarks.v_simplified,
        v_critical: s.benchmarks.v_critical,
        n_sweeps: Some(s.n_sweeps),
        r_n: Some(s.r_n),
        eta: Some(s.end_game.eta),
        t_tilde_spiral: Some(s.t_tilde_spiral),
        t_tilde_in: Some(s.t_tilde_in),
        t_last: Some(s.end_game.t_last),
        t_l: Some(s.end_game.t_l),
        t_in_last: Some(s.end_game.t_in_last),
        t_in_f: Some(s.end_game.t_in_f),
        t_spiral_total: Some(s.t_spiral_total),
        t_in_total: Some(s.t_in_total),
        t_total: Some(s.t_total),
        sim_clear_time: None,
        sim_verdict: None,
    }
}

/// Compute the analytic table for every team size in the run request.
pub fn run_table(spec: &RunSpec) -> Result<Table, CoreError> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut any_infeasible = false;
    for n in spec.team_sizes() {
        let params = spec.scenario_for(n);
        match build_schedule(&params) {
            Ok(schedule) => {
                for w in &schedule.warnings {
                    warnings.push(format!("n={n}: {w}"));
                }
                rows.push(row_from_schedule(&schedule));
            }
            Err(CoreError::InfeasibleSpeed {
                speed, required, ..
            }) => {
                any_infeasible = true;
                warnings.push(format!(
                    "n={n}: sweeper speed {speed} does not exceed the critical speed {required}; \
                     schedule columns left empty"
                ));
                let benchmarks = critical_speed(&params)?;
                rows.push(ResultRow {
                    n,
                    v_lb: benchmarks.v_lb,
                    v_simplified: benchmarks.v_simplified,
                    v_critical: benchmarks.v_critical,
                    n_sweeps: None,
                    r_n: None,
                    eta: None,
                    t_tilde_spiral: None,
                    t_tilde_in: None,
                    t_last: None,
                    t_l: None,
                    t_in_last: None,
                    t_in_f: None,
                    t_spiral_total: None,
                    t_in_total: None,
                    t_total: None,
                    sim_clear_time: None,
                    sim_verdict: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Table {
        rows,
        warnings,
        any_infeasible,
    })
}

/// Run the worst-case simulation for every feasible row and append the
/// validation columns. Row order is preserved; rows execute independently.
pub fn run_sim_validation(spec: &RunSpec, table: &mut Table) -> Result<(), CoreError> {
    let config = spec.sim.clone().unwrap_or_default();
    let jobs: Vec<(usize, u32)> = table
        .rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.t_total.is_some() || config.force_run)
        .map(|(i, row)| (i, row.n))
        .collect();
    let results: Vec<(usize, Result<sim::SimOutcome, CoreError>)> = jobs
        .par_iter()
        .map(|&(i, n)| (i, sim::run(&spec.scenario_for(n), &config)))
        .collect();
    for (i, outcome) in results {
        match outcome {
            Ok(out) => {
                table.rows[i].sim_clear_time = out.clear_time;
                table.rows[i].sim_verdict = Some(out.verdict.to_string());
                if out.verdict != Verdict::Cleared {
                    table.warnings.push(format!(
                        "n={}: simulation verdict {}",
                        table.rows[i].n, out.verdict
                    ));
                }
            }
            Err(e) => {
                table
                    .warnings
                    .push(format!("n={}: simulation failed: {e}", table.rows[i].n));
            }
        }
    }
    Ok(())
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt::sig).unwrap_or_default()
}

/// Render the table as CSV with the exact column set, 12 significant digits.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    wtr.write_record(COLUMNS).expect("in-memory write");
    for row in rows {
        let record = [
            row.n.to_string(),
            fmt::sig(row.v_lb),
            fmt::sig(row.v_simplified),
            fmt::sig(row.v_critical),
            row.n_sweeps.map(|v| v.to_string()).unwrap_or_default(),
            opt_f64(row.r_n),
            row.eta.map(|v| v.to_string()).unwrap_or_default(),
            opt_f64(row.t_tilde_spiral),
            opt_f64(row.t_tilde_in),
            opt_f64(row.t_last),
            opt_f64(row.t_l),
            opt_f64(row.t_in_last),
            opt_f64(row.t_in_f),
            opt_f64(row.t_spiral_total),
            opt_f64(row.t_in_total),
            opt_f64(row.t_total),
            opt_f64(row.sim_clear_time),
            row.sim_verdict.clone().unwrap_or_default(),
        ];
        wtr.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Render the table as JSON (full-precision numbers; round-trips exactly).
pub fn to_json(rows: &[ResultRow]) -> String {
    serde_json::to_string_pretty(rows).expect("serializable rows")
}

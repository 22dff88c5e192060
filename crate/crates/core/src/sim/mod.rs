//! Discrete-time worst-case simulation of the adversarial evader-region
//! wavefront against sweepers executing the spiral pincer protocol.
//!
//! The phase machine follows the analytic schedule; the contamination field
//! evolves adversarially (isotropic spread at the full evader speed) and is
//! erased under the sensor fans while the team is sweeping. The run verdict
//! independently validates confinement and clearing.

pub mod frames;
mod grid;
mod phase;

pub use grid::WorldGrid;
pub use phase::{PhaseKind, PhasePlan, Segment};

use serde::{Deserialize, Serialize};

use crate::analytics::{critical_speed, derive_constants, resolve_speed, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::{Point2, SectorFan, SensorGeometry, SweeperPose, SweptQuad};
use crate::schedule::{build_schedule, SweepSchedule};

/// Simulation controls; `None` fields are derived from the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Cells per grid side; default sizes cells at `r0 / 300`.
    pub grid_cells: Option<usize>,
    /// Time step; default `cell_size / (2 vs)` (no front tunneling).
    pub dt: Option<f64>,
    /// Frame export period; 0 disables frames.
    pub frame_interval: f64,
    /// Escape verdict radius; default `r0 + 2r + 2 cell_size`.
    pub escape_radius: Option<f64>,
    /// Hard stop; default 2.5x the protocol end.
    pub max_sim_time: Option<f64>,
    /// Let sensors detect during inward dashes (off in the worst case).
    pub clear_during_dash: bool,
    /// Run the protocol even when the schedule reports an infeasible speed.
    pub force_run: bool,
    /// Target number of radius-trace samples.
    pub trace_samples: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_cells: None,
            dt: None,
            frame_interval: 0.0,
            escape_radius: None,
            max_sim_time: None,
            clear_during_dash: false,
            force_run: false,
            trace_samples: 240,
        }
    }
}

/// Terminal state of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Cleared,
    Escaped,
    Timeout,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Cleared => "CLEARED",
            Verdict::Escaped => "ESCAPED",
            Verdict::Timeout => "TIMEOUT",
        };
        f.write_str(s)
    }
}

/// One sample of the contamination outer radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time: f64,
    pub radius: f64,
}

/// Time stamp of a protocol transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleBoundary {
    pub time: f64,
    pub phase: String,
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub verdict: Verdict,
    pub clear_time: Option<f64>,
    pub escape_time: Option<f64>,
    pub protocol_end_time: f64,
    /// Total time promised by the analytic schedule (absent in forced runs).
    pub analytic_total_time: Option<f64>,
    /// Largest contaminated center radius reached at any time.
    pub peak_radius: f64,
    pub max_radius_trace: Vec<TraceSample>,
    pub cycle_boundaries: Vec<CycleBoundary>,
    /// Per-cycle shortfall between the physical dash reach and the next
    /// scheduled start radius (the schedule's kinematic approximation).
    pub dash_position_adjustments: Vec<f64>,
    pub grid_cells: usize,
    pub cell_size: f64,
    /// Sensor half-length in cells; below about ten the grid cannot resolve
    /// the sweep and verdicts are unreliable.
    pub cells_per_sensor: f64,
    pub dt: f64,
    pub escape_radius: f64,
    pub forced: bool,
}

/// Receives rendered frames during a run.
pub trait FrameSink {
    fn frame(
        &mut self,
        time: f64,
        grid: &WorldGrid,
        poses: &[SweeperPose],
        sensor: &SensorGeometry,
    ) -> Result<()>;
}

struct ResolvedGrid {
    side: usize,
    cell_size: f64,
    half_extent: f64,
    escape_radius: f64,
    dt: f64,
}

/// Margin, in cells, between the escape radius and the grid edge.
const EDGE_MARGIN_CELLS: f64 = 12.0;

fn resolve_grid(params: &ScenarioParams, config: &SimConfig, vs: f64) -> Result<ResolvedGrid> {
    let needed = params.r0 + 2.0 * params.r;
    let (side, cell_size, half_extent) = match config.grid_cells {
        Some(side) => {
            if (side as f64) <= 2.0 * EDGE_MARGIN_CELLS {
                return Err(Error::InvalidParameter {
                    name: "grid_cells",
                    message: format!("grid of {side} cells leaves no room for the margin"),
                });
            }
            let half = needed / (1.0 - 2.0 * EDGE_MARGIN_CELLS / side as f64);
            (side, 2.0 * half / side as f64, half)
        }
        None => {
            let cell = params.r0 / 300.0;
            let half = needed + EDGE_MARGIN_CELLS * cell;
            let side = (2.0 * half / cell).ceil() as usize;
            (side, cell, side as f64 * cell / 2.0)
        }
    };
    let escape_radius = config.escape_radius.unwrap_or(needed + 2.0 * cell_size);
    if escape_radius > half_extent - 2.0 * cell_size {
        return Err(Error::GridTooSmall {
            half_extent,
            required: escape_radius + 2.0 * cell_size,
        });
    }
    let dt = config.dt.unwrap_or(cell_size / (2.0 * vs));
    if !(dt > 0.0) || vs * dt >= cell_size {
        return Err(Error::InvalidParameter {
            name: "dt",
            message: format!(
                "time step {dt} must be positive and keep vs*dt = {} below one cell ({cell_size})",
                vs * dt
            ),
        });
    }
    Ok(ResolvedGrid {
        side,
        cell_size,
        half_extent,
        escape_radius,
        dt,
    })
}

/// Run the simulation without frame output.
pub fn run(params: &ScenarioParams, config: &SimConfig) -> Result<SimOutcome> {
    run_inner(params, config, None)
}

/// Run the simulation, delivering frames every `config.frame_interval`.
pub fn run_with_sink(
    params: &ScenarioParams,
    config: &SimConfig,
    sink: &mut dyn FrameSink,
) -> Result<SimOutcome> {
    run_inner(params, config, Some(sink))
}

fn plan_for(
    params: &ScenarioParams,
    config: &SimConfig,
) -> Result<(PhasePlan, Option<SweepSchedule>)> {
    match build_schedule(params) {
        Ok(schedule) => {
            let plan = PhasePlan::from_schedule(&schedule)?;
            Ok((plan, Some(schedule)))
        }
        Err(Error::InfeasibleSpeed { .. }) if config.force_run => {
            let benchmarks = critical_speed(params)?;
            let vs = resolve_speed(params, &benchmarks)?;
            if vs <= params.vt {
                return Err(Error::InfeasibleSpeed {
                    speed: vs,
                    required: params.vt,
                    context: "even forced runs need vs > vt to follow the spiral",
                });
            }
            let constants = derive_constants(params, vs)?;
            let r_tilde = params.r0 - params.r;
            let t_spiral0 = if params.vt == 0.0 {
                params.sector_angle(constants.gamma) * r_tilde / vs
            } else {
                r_tilde * (constants.lambda - 1.0) / params.vt
            };
            let margin = if params.vt > 0.0 {
                2.0 * (2.0 * params.r + params.r0 * 0.05) / params.vt
            } else {
                t_spiral0
            };
            let horizon = config.max_sim_time.unwrap_or(3.0 * t_spiral0 + margin);
            let plan = PhasePlan::forced(params, &constants, horizon)?;
            Ok((plan, None))
        }
        Err(e) => Err(e),
    }
}

fn run_inner(
    params: &ScenarioParams,
    config: &SimConfig,
    mut sink: Option<&mut dyn FrameSink>,
) -> Result<SimOutcome> {
    params.validate()?;
    let (plan, schedule) = plan_for(params, config)?;
    let geom = resolve_grid(params, config, plan.vs)?;
    // Terminal sweeps must cross the sector seams by a few cells; unlike the
    // cyclic sweeps they have no successor pass to pick up seam cells.
    let plan = plan.with_seam_overlap(4.0 * geom.cell_size / params.r);
    let sensor = SensorGeometry::new(params.r, params.alpha)?;
    let mut grid = WorldGrid::new(geom.side, geom.half_extent, params.r0, 2.0 * params.r)?;

    let max_sim_time = config.max_sim_time.unwrap_or(2.5 * plan.protocol_end);
    let dt = geom.dt;
    let total_steps = (max_sim_time / dt).ceil() as usize;
    let trace_every = (total_steps / config.trace_samples.max(1)).max(1);

    let mut trace = Vec::new();
    let mut t = 0.0;
    let mut poses_prev = plan.poses_at(0.0);
    let mut next_mark = 0.0;
    if let Some(s) = sink.as_deref_mut() {
        if config.frame_interval > 0.0 {
            s.frame(0.0, &grid, &poses_prev, &sensor)?;
            next_mark = config.frame_interval;
        }
    }
    trace.push(TraceSample {
        time: 0.0,
        radius: grid.max_reached_radius,
    });

    let clearing_at = |time: f64| -> bool {
        if time > plan.protocol_end + 1e-9 {
            return false;
        }
        match plan.segment_at(time).map(|i| plan.segments[i].kind) {
            Some(kind) if kind.is_dash() => config.clear_during_dash,
            Some(_) => true,
            None => false,
        }
    };
    // Near the fan apex the covered wedge is narrower than one cell, so a
    // discrete front can hop across what is a moving firewall in continuous
    // space. During the terminal maneuvers the apex sits at the region
    // center; a guard disk of grid scale restores the firewall there.
    let apex_guard = 2.5 * geom.cell_size;
    let terminal_at = |time: f64| -> bool {
        if time > plan.protocol_end + 1e-9 {
            return false;
        }
        matches!(
            plan.segment_at(time).map(|i| plan.segments[i].kind),
            Some(PhaseKind::FinalCircle) | Some(PhaseKind::FinalSpiral)
        )
    };

    let verdict;
    let mut clear_time = None;
    let mut escape_time = None;
    let mut step = 0usize;
    loop {
        step += 1;
        let t_next = t + dt;
        let poses_next = plan.poses_at(t_next);
        let clear_prev = clearing_at(t);
        let clear_next = clearing_at(t_next);
        if clear_prev || clear_next {
            // Clear the ribbon the central line swept within its clearing
            // segment, clamped to the segment boundaries. Sampled fans alone
            // touch the wavefront only at the tangency instant and would
            // leak a sliver behind every sweep.
            let seg_prev = plan.segment_at(t);
            let seg_next = plan.segment_at(t_next);
            for j in 0..poses_next.len() {
                let mut fans: [Option<SectorFan>; 2] = [None, None];
                if clear_prev {
                    fans[0] = Some(SectorFan::new(&poses_prev[j], &sensor));
                }
                if clear_next {
                    fans[1] = Some(SectorFan::new(&poses_next[j], &sensor));
                }
                let mut ribbons: [Option<SweptQuad>; 2] = [None, None];
                if clear_prev && clear_next && seg_prev == seg_next {
                    ribbons[0] = Some(SweptQuad::between(&poses_prev[j], &poses_next[j], &sensor));
                } else {
                    // Crossing a segment boundary mid-step: close out the
                    // swept band to the end of the old segment and open the
                    // new one from its start.
                    if clear_prev {
                        ribbons[0] = seg_prev.map(|i| {
                            let end = plan.pose_in_segment(j, i, plan.segments[i].duration);
                            SweptQuad::between(&poses_prev[j], &end, &sensor)
                        });
                    }
                    if clear_next {
                        ribbons[1] = seg_next.map(|i| {
                            let start = plan.pose_in_segment(j, i, 0.0);
                            SweptQuad::between(&start, &poses_next[j], &sensor)
                        });
                    }
                }
                let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for fan in fans.iter().flatten() {
                    let reach = fan.radius();
                    min.x = min.x.min(fan.apex.x - reach);
                    min.y = min.y.min(fan.apex.y - reach);
                    max.x = max.x.max(fan.apex.x + reach);
                    max.y = max.y.max(fan.apex.y + reach);
                }
                for q in ribbons.iter().flatten() {
                    let (qmin, qmax) = q.bbox();
                    min.x = min.x.min(qmin.x);
                    min.y = min.y.min(qmin.y);
                    max.x = max.x.max(qmax.x);
                    max.y = max.y.max(qmax.y);
                }
                let guard = if terminal_at(t_next) || terminal_at(t) {
                    apex_guard
                } else {
                    0.0
                };
                grid.clear_region(min, max, |p| {
                    fans.iter().flatten().any(|f| {
                        if f.contains(p) {
                            return true;
                        }
                        if guard > 0.0 {
                            let dx = p.x - f.apex.x;
                            let dy = p.y - f.apex.y;
                            return dx * dx + dy * dy <= guard * guard;
                        }
                        false
                    }) || ribbons.iter().flatten().any(|q| q.contains(p))
                });
            }
        }
        grid.spread_step(params.vt * dt);
        t = t_next;
        poses_prev = poses_next;

        if let Some(s) = sink.as_deref_mut() {
            if config.frame_interval > 0.0 {
                while next_mark <= t + 1e-12 {
                    s.frame(next_mark, &grid, &poses_prev, &sensor)?;
                    next_mark += config.frame_interval;
                }
            }
        }
        if step % trace_every == 0 {
            trace.push(TraceSample {
                time: t,
                radius: grid.max_reached_radius,
            });
        }

        if grid.max_reached_radius > geom.escape_radius {
            verdict = Verdict::Escaped;
            escape_time = Some(t);
            break;
        }
        if grid.contaminated_count == 0 {
            verdict = Verdict::Cleared;
            clear_time = Some(t);
            break;
        }
        if t >= max_sim_time {
            verdict = Verdict::Timeout;
            break;
        }
    }
    trace.push(TraceSample {
        time: t,
        radius: grid.max_reached_radius,
    });

    Ok(SimOutcome {
        verdict,
        clear_time,
        escape_time,
        protocol_end_time: plan.protocol_end,
        analytic_total_time: schedule.as_ref().map(|s| s.t_total),
        peak_radius: grid.max_reached_radius,
        max_radius_trace: trace,
        cycle_boundaries: plan
            .cycle_boundaries()
            .into_iter()
            .map(|(time, kind)| CycleBoundary {
                time,
                phase: format!("{kind:?}"),
            })
            .collect(),
        dash_position_adjustments: plan.dash_position_adjustments.clone(),
        grid_cells: geom.side,
        cell_size: geom.cell_size,
        cells_per_sensor: params.r / geom.cell_size,
        dt,
        escape_radius: geom.escape_radius,
        forced: plan.forced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::SpeedSpec;

    /// A small scenario that runs in well under a second. The sensor spans
    /// ten-plus cells on every grid used here; much coarser and the wake
    /// behind the fan tangency stops being resolvable.
    fn mini_params(mult: f64) -> ScenarioParams {
        ScenarioParams::new(
            4,
            100.0,
            25.0,
            25f64.to_radians(),
            1.0,
            SpeedSpec::CriticalMultiple(mult),
        )
        .unwrap()
    }

    fn mini_config(cells: usize) -> SimConfig {
        SimConfig {
            grid_cells: Some(cells),
            trace_samples: 60,
            ..SimConfig::default()
        }
    }

    #[test]
    fn cleared_and_close_to_schedule() {
        let p = mini_params(1.2);
        let out = run(&p, &mini_config(160)).unwrap();
        assert_eq!(out.verdict, Verdict::Cleared);
        let total = out.analytic_total_time.unwrap();
        let dev = (out.clear_time.unwrap() - total).abs() / total;
        assert!(dev < 0.15, "clear time deviates {dev:.3} from the schedule");
        // Confinement: never past the initial radius plus the sensor length
        // plus grid slack.
        assert!(out.peak_radius <= 100.0 + 50.0 + 2.0 * out.cell_size);
        // The running-max trace never decreases.
        for w in out.max_radius_trace.windows(2) {
            assert!(w[1].radius >= w[0].radius);
        }
    }

    #[test]
    fn deterministic_outcomes() {
        let p = mini_params(1.2);
        let a = run(&p, &mini_config(120)).unwrap();
        let b = run(&p, &mini_config(120)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn faster_sweepers_clear_no_later() {
        let slow = run(&mini_params(1.15), &mini_config(160)).unwrap();
        let fast = run(&mini_params(1.6), &mini_config(160)).unwrap();
        assert_eq!(slow.verdict, Verdict::Cleared);
        assert_eq!(fast.verdict, Verdict::Cleared);
        let slack = 1.0 + 2.0 * slow.cell_size / 100.0;
        assert!(fast.clear_time.unwrap() <= slow.clear_time.unwrap() * slack);
    }

    #[test]
    fn forced_run_below_critical_escapes_or_times_out() {
        // Far enough below critical that even the first sweep's margin goes
        // negative; the wavefront then outruns the frozen-radius protocol.
        let p = mini_params(0.8);
        let cfg = SimConfig {
            force_run: true,
            ..mini_config(160)
        };
        let out = run(&p, &cfg).unwrap();
        assert!(out.forced);
        assert!(matches!(out.verdict, Verdict::Escaped | Verdict::Timeout));
        // The radius trace grows monotonically.
        for w in out.max_radius_trace.windows(2) {
            assert!(
                w[1].radius >= w[0].radius,
                "radius trace decreased: {} -> {}",
                w[0].radius,
                w[1].radius
            );
        }
        let first = out.max_radius_trace.first().unwrap().radius;
        let last = out.max_radius_trace.last().unwrap().radius;
        assert!(last > first + 2.0 * out.cell_size, "trace failed to grow");
    }

    #[test]
    fn infeasible_without_force_errors() {
        let p = mini_params(0.9);
        assert!(matches!(
            run(&p, &mini_config(160)),
            Err(Error::InfeasibleSpeed { .. })
        ));
    }

    #[test]
    fn dash_clearing_only_helps() {
        let p = mini_params(1.2);
        let base = run(&p, &mini_config(160)).unwrap();
        let cfg = SimConfig {
            clear_during_dash: true,
            ..mini_config(160)
        };
        let with_dash = run(&p, &cfg).unwrap();
        assert_eq!(with_dash.verdict, Verdict::Cleared);
        assert!(with_dash.clear_time.unwrap() <= base.clear_time.unwrap() + 1e-9);
    }

    #[test]
    fn refinement_moves_toward_schedule() {
        let p = mini_params(1.25);
        let coarse = run(&p, &mini_config(150)).unwrap();
        let fine = run(&p, &mini_config(300)).unwrap();
        let total = coarse.analytic_total_time.unwrap();
        let dev_c = (coarse.clear_time.unwrap() - total).abs() / total;
        let dev_f = (fine.clear_time.unwrap() - total).abs() / total;
        assert!(
            dev_f <= dev_c + 1e-9,
            "refinement worsened the deviation: {dev_c:.4} -> {dev_f:.4}"
        );
    }
}

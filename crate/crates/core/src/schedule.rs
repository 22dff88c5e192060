//! Multi-cycle sweep schedule: radius recursion, sweep count, per-cycle and
//! closed-form times, end-game branch, and the total guaranteed-detection
//! time.
//!
//! Direct summation over the per-cycle records is authoritative for every
//! total; the closed forms are evaluated as cross-checks and their relative
//! deviations reported. One published closed form for the inward-time total
//! carries an unnormalized power term; both readings are evaluated (see
//! [`ClosedFormChecks`]).

use serde::{Deserialize, Serialize};

use crate::analytics::{
    critical_speed, derive_constants, resolve_speed, DerivedConstants, ScenarioParams,
    SpeedBenchmarks,
};
use crate::error::{Error, Result};

/// One spiral sweep plus the inward dash that follows it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub index: u32,
    /// Evader-region bounding radius at the start of the sweep.
    pub r_i: f64,
    /// Shifted radius `r_i - r` (the sensor-center start radius).
    pub r_tilde_i: f64,
    /// Duration of the spiral sweep.
    pub t_spiral_i: f64,
    /// Inward margin earned by the sweep, `2r - vt * t_spiral_i`.
    pub delta_i: f64,
    /// Effective inward progress after paying for expansion during the dash.
    pub delta_eff_i: f64,
    /// Duration of the inward dash.
    pub t_in_i: f64,
    /// Start offset angle recomputed at this cycle's radius (diagnostic; the
    /// schedule itself uses the constant offset computed at `r0`).
    pub gamma_i: f64,
}

/// Cross-check report for the closed-form totals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormChecks {
    /// Closed-form inward total with the power term read as `c2^(N-1)`.
    pub t_in_normalized: Option<f64>,
    /// Closed-form inward total with the power term as published
    /// (unnormalized; deviates except for N <= 2).
    pub t_in_verbatim: Option<f64>,
    /// Spiral total from the recurrence series identity.
    pub t_spiral_series: Option<f64>,
    /// Spiral total from the fully substituted closed form.
    pub t_spiral_expanded: Option<f64>,
    pub t_in_normalized_rel_dev: Option<f64>,
    pub t_in_verbatim_rel_dev: Option<f64>,
    pub t_spiral_rel_dev: Option<f64>,
}

/// Terminal maneuvers after the last full sweep cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndGame {
    /// 1 if an extra terminal spiral sweep is required, else 0.
    pub eta: u8,
    /// Duration of the final circular sweep, `(2*pi/n - 2*alpha) * r / vs`.
    pub t_last: f64,
    /// Duration of the final inward motion, `r_n / vs`.
    pub t_in_last: f64,
    /// Duration of the optional extra spiral, `r * (lambda - 1) / vt`.
    pub t_l: f64,
    /// Inward time matching the extra spiral's expansion, `t_l * vt / vs`.
    pub t_in_f: f64,
    /// Slack parameter `(2r - r_n)/r`.
    pub epsilon: f64,
    /// Published threshold for `epsilon` (diagnostic only; its closed form
    /// mixes an angle with a unitless constant and is not trusted).
    pub epsilon_c: f64,
    /// Whether the epsilon classification agrees with the direct branch test.
    pub epsilon_classification_agrees: bool,
}

/// Complete sweep schedule for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub params: ScenarioParams,
    pub benchmarks: SpeedBenchmarks,
    pub constants: DerivedConstants,
    /// Resolved sweeper speed.
    pub vs: f64,
    pub cycles: Vec<CycleRecord>,
    /// Number of full sweep cycles.
    pub n_sweeps: u32,
    /// Radius estimate used when sizing the cycle count.
    pub r_hat_n: f64,
    /// Bounding radius fed to the end-game (closed-form value clamped to be
    /// non-negative).
    pub r_n: f64,
    /// Raw closed-form value before clamping; can undershoot zero when the
    /// final inward step overshoots the center.
    pub r_n_closed_form: f64,
    pub r_n_clamped: bool,
    /// True when `r0 <= 2r` and the radius recursion was skipped.
    pub degenerate_small_region: bool,
    /// Sum of inward dash times for cycles 0..N-2.
    pub t_tilde_in: f64,
    /// Sum of spiral sweep times for cycles 0..N-1.
    pub t_tilde_spiral: f64,
    pub closed_form: ClosedFormChecks,
    pub end_game: EndGame,
    pub t_spiral_total: f64,
    pub t_in_total: f64,
    pub t_total: f64,
    /// Human-readable notes about clamps and closed-form deviations.
    pub warnings: Vec<String>,
}

/// Spiral sweep duration for a cycle starting with the sensor center at
/// radius `r_tilde`; uses the constant-radius limit when `vt = 0`.
fn spiral_time(r_tilde: f64, params: &ScenarioParams, constants: &DerivedConstants) -> f64 {
    if params.vt == 0.0 {
        params.sector_angle(constants.gamma) * r_tilde / constants.vs
    } else {
        r_tilde * (constants.lambda - 1.0) / params.vt
    }
}

/// Advance one sweep cycle from region radius `r_i`.
pub fn cycle_step(
    r_i: f64,
    constants: &DerivedConstants,
    params: &ScenarioParams,
    index: u32,
) -> Result<CycleRecord> {
    let r = params.r;
    if !(r_i > r) {
        return Err(Error::Domain {
            context: "cycle_step",
            message: format!("region radius {r_i} must exceed the sensor half-length {r}"),
        });
    }
    let vs = constants.vs;
    let vt = params.vt;
    let r_tilde = r_i - r;
    let t_spiral = spiral_time(r_tilde, params, constants);
    let delta = 2.0 * r - vt * t_spiral;
    if delta < 0.0 {
        return Err(Error::InfeasibleSpeed {
            speed: vs,
            required: params.vt,
            context: "region expands more than the sensor length during one sweep",
        });
    }
    let delta_eff = delta * vs / (vs + vt);
    let t_in = delta_eff / vs;
    let gamma_i = crate::geometry::gamma_offset(r_i, r, params.alpha).unwrap_or(f64::NAN);
    Ok(CycleRecord {
        index,
        r_i,
        r_tilde_i: r_tilde,
        t_spiral_i: t_spiral,
        delta_i: delta,
        delta_eff_i: delta_eff,
        t_in_i: t_in,
        gamma_i,
    })
}

/// Count the sweeps needed to shrink the region to within `2r`, by running
/// the radius recursion; cross-checked against the logarithmic closed form
/// whenever the latter is defined.
pub fn num_sweeps(params: &ScenarioParams, constants: &DerivedConstants) -> Result<u32> {
    let r = params.r;
    if params.r0 <= 2.0 * r {
        // Degenerate small region: a single sweep, then the end-game.
        return Ok(1);
    }
    let mut r_tilde = params.r0 - r;
    let mut count: u32 = 0;
    while r_tilde > r {
        let next = constants.c2 * r_tilde + constants.c1;
        if next >= r_tilde {
            return Err(Error::InfeasibleSpeed {
                speed: constants.vs,
                required: params.vt,
                context: "radius recursion does not shrink",
            });
        }
        r_tilde = next;
        count += 1;
        if count > 1_000_000 {
            return Err(Error::InternalConsistency {
                context: "num_sweeps",
                message: "radius recursion exceeded 1e6 cycles".into(),
            });
        }
    }
    if params.vt > 0.0 {
        let closed = num_sweeps_closed_form(params, constants);
        if let Some(closed) = closed {
            if closed != count {
                return Err(Error::InternalConsistency {
                    context: "num_sweeps",
                    message: format!("closed form gives {closed}, recursion gives {count}"),
                });
            }
        }
    }
    Ok(count.max(1))
}

/// Logarithmic closed form for the sweep count; `None` when outside its
/// domain (stationary evaders or a degenerate region).
pub fn num_sweeps_closed_form(
    params: &ScenarioParams,
    constants: &DerivedConstants,
) -> Option<u32> {
    let (r0, r) = (params.r0, params.r);
    let lam = constants.lambda;
    if params.vt == 0.0 || lam <= 1.0 || r0 <= 2.0 * r {
        return None;
    }
    let num_arg = r * (3.0 - lam) / (r0 * (1.0 - lam) + r * (1.0 + lam));
    if !(num_arg > 0.0) {
        return None;
    }
    let raw = num_arg.ln() / constants.c2.ln();
    Some(raw.ceil() as u32)
}

/// Closed-form bounding radius after `n_sweeps` cycles (the value of the
/// shifted-radius recursion); verified against direct iteration.
///
/// The value can be negative when the last inward step overshoots; callers
/// clamp before feeding it to the end-game.
pub fn final_radius(
    params: &ScenarioParams,
    constants: &DerivedConstants,
    n_sweeps: u32,
) -> Result<f64> {
    let (r0, r) = (params.r0, params.r);
    let lam = constants.lambda;
    // Direct iteration (authoritative cross-check).
    let mut r_tilde = r0 - r;
    for _ in 0..n_sweeps {
        r_tilde = constants.c2 * r_tilde + constants.c1;
    }
    if params.vt == 0.0 || lam <= 1.0 {
        return Ok(r_tilde);
    }
    let one_minus = 1.0 - lam;
    let closed = -2.0 * r / one_minus
        + constants.c2.powi(n_sweeps as i32) * (r0 * one_minus + r * (1.0 + lam)) / one_minus;
    let scale = (r0 - r).max(closed.abs()).max(r_tilde.abs());
    if (closed - r_tilde).abs() > 1e-9 * scale {
        return Err(Error::InternalConsistency {
            context: "final_radius",
            message: format!("closed form {closed} vs recursion {r_tilde}"),
        });
    }
    Ok(closed)
}

/// Direct sums of the inward and spiral times plus the closed-form
/// cross-checks.
pub fn closed_form_times(
    params: &ScenarioParams,
    constants: &DerivedConstants,
    cycles: &[CycleRecord],
) -> (f64, f64, ClosedFormChecks) {
    let n_sweeps = cycles.len();
    // Inward dashes for cycles 0..N-2; the final dash is replaced by the
    // end-game inward motion.
    let t_in_sum: f64 = cycles[..n_sweeps.saturating_sub(1)]
        .iter()
        .map(|c| c.t_in_i)
        .sum();
    let t_spiral_sum: f64 = cycles.iter().map(|c| c.t_spiral_i).sum();

    let (vs, vt) = (constants.vs, params.vt);
    let (r0, r) = (params.r0, params.r);
    let lam = constants.lambda;
    let c2 = constants.c2;
    let c3 = constants.c3;
    let n = n_sweeps as i32;

    let mut checks = ClosedFormChecks {
        t_in_normalized: None,
        t_in_verbatim: None,
        t_spiral_series: None,
        t_spiral_expanded: None,
        t_in_normalized_rel_dev: None,
        t_in_verbatim_rel_dev: None,
        t_spiral_rel_dev: None,
    };
    if vt == 0.0 || lam <= 1.0 || params.r0 <= 2.0 * params.r {
        return (t_in_sum, t_spiral_sum, checks);
    }

    let one_minus = 1.0 - lam;
    let shape = r0 * one_minus + r * (1.0 + lam);
    let common = 2.0 * r / (vs + vt)
        + (r0 - r) / vs
        + 2.0 * r * (vt + vs * lam) / (vs * (vs + vt) * one_minus);
    let t_in_norm = common - c2.powi(n - 1) * shape / (vs * one_minus);
    let t_in_verb = common - (vt + vs * lam).powi(n - 1) * shape / (vs * (vs + vt) * one_minus);
    checks.t_in_normalized = Some(t_in_norm);
    checks.t_in_verbatim = Some(t_in_verb);
    let denom = t_in_sum.abs().max(1e-300);
    checks.t_in_normalized_rel_dev = Some((t_in_norm - t_in_sum).abs() / denom);
    checks.t_in_verbatim_rel_dev = Some((t_in_verb - t_in_sum).abs() / denom);

    // Series identity over the sweep-time recurrence t_{i+1} = c2 t_i + c3.
    let t0 = cycles[0].t_spiral_i;
    let t_last_cycle = cycles[n_sweeps - 1].t_spiral_i;
    let series = (t0 - c2 * t_last_cycle + (n_sweeps as f64 - 1.0) * c3) / (1.0 - c2);
    let expanded = (r - r0) * (vs + vt) / (vt * vs)
        - 2.0 * r * (vt + vs * lam) / (vt * vs * one_minus)
        + 2.0 * r * (n_sweeps as f64 - 1.0) / vt
        - c2.powi(n) * ((vs + vt) * (r0 * (lam - 1.0) - r * (lam + 1.0))) / (vt * vs * one_minus);
    checks.t_spiral_series = Some(series);
    checks.t_spiral_expanded = Some(expanded);
    checks.t_spiral_rel_dev = Some((series - t_spiral_sum).abs() / t_spiral_sum.abs().max(1e-300));

    (t_in_sum, t_spiral_sum, checks)
}

/// Decide the terminal maneuvers for a region bounded by `r_n <= 2r`.
///
/// The direct inequality `2r >= vt*t_last + vt*t_in_last + r_n` is the
/// authoritative branch test; the epsilon classification is reported for
/// diagnostics only.
pub fn end_game(params: &ScenarioParams, constants: &DerivedConstants, r_n: f64) -> EndGame {
    let (r, vt) = (params.r, params.vt);
    let vs = constants.vs;
    let n = params.n as f64;
    let circle_angle = (std::f64::consts::TAU / n - 2.0 * params.alpha).max(0.0);
    let t_last = circle_angle * r / vs;
    let t_in_last = r_n / vs;
    let eta = if 2.0 * r >= vt * t_last + vt * t_in_last + r_n {
        0
    } else {
        1
    };
    let t_l = if vt == 0.0 {
        params.sector_angle(constants.gamma) * r / vs
    } else {
        r * (constants.lambda - 1.0) / vt
    };
    let t_in_f = t_l * vt / vs;
    let epsilon = (2.0 * r - r_n) / r;
    let epsilon_c = 2.0 * vt * (std::f64::consts::PI - n * (params.alpha - 1.0)) / (n * (vt + vs));
    let eta_from_epsilon = if epsilon >= epsilon_c { 0 } else { 1 };
    EndGame {
        eta,
        t_last,
        t_in_last,
        t_l,
        t_in_f,
        epsilon,
        epsilon_c,
        epsilon_classification_agrees: eta == eta_from_epsilon,
    }
}

/// Build the complete schedule for a scenario.
///
/// Fails with [`Error::InfeasibleSpeed`] carrying the computed critical
/// speed when the resolved sweeper speed does not exceed it.
pub fn build_schedule(params: &ScenarioParams) -> Result<SweepSchedule> {
    params.validate()?;
    let benchmarks = critical_speed(params)?;
    let vs = resolve_speed(params, &benchmarks)?;
    if params.vt > 0.0 && vs <= benchmarks.v_critical {
        return Err(Error::InfeasibleSpeed {
            speed: vs,
            required: benchmarks.v_critical,
            context: "sweeper speed must exceed the critical speed",
        });
    }
    let constants = derive_constants(params, vs)?;
    let r = params.r;
    let degenerate = params.r0 <= 2.0 * r;

    let mut cycles = Vec::new();
    if degenerate {
        cycles.push(cycle_step(params.r0, &constants, params, 0)?);
    } else {
        let mut r_i = params.r0;
        let mut index = 0u32;
        while r_i > 2.0 * r {
            let rec = cycle_step(r_i, &constants, params, index)?;
            r_i = rec.r_i - rec.delta_eff_i;
            cycles.push(rec);
            index += 1;
            if index > 1_000_000 {
                return Err(Error::InternalConsistency {
                    context: "build_schedule",
                    message: "cycle recursion exceeded 1e6 cycles".into(),
                });
            }
        }
    }
    let n_sweeps = num_sweeps(params, &constants)?;
    if n_sweeps as usize != cycles.len() {
        return Err(Error::InternalConsistency {
            context: "build_schedule",
            message: format!(
                "num_sweeps {} disagrees with generated cycles {}",
                n_sweeps,
                cycles.len()
            ),
        });
    }

    let mut warnings = Vec::new();
    let (r_n_closed_form, r_n, r_n_clamped) = if degenerate {
        let rn = params.r0.min(2.0 * r);
        (rn, rn, false)
    } else {
        let raw = final_radius(params, &constants, n_sweeps)?;
        let clamped = raw.max(0.0);
        if raw < 0.0 {
            warnings.push(format!(
                "closed-form bounding radius {raw:.6} undershoots zero; end-game uses 0"
            ));
        }
        (raw, clamped, raw < 0.0)
    };

    let (t_tilde_in, t_tilde_spiral, closed_form) = closed_form_times(params, &constants, &cycles);
    if let Some(dev) = closed_form.t_in_verbatim_rel_dev {
        if dev > 1e-6 {
            warnings.push(format!(
                "published inward-time closed form deviates from summation by {dev:.3e} \
                 (unnormalized power term); normalized reading deviates by {:.3e}",
                closed_form.t_in_normalized_rel_dev.unwrap_or(f64::NAN)
            ));
        }
    }

    let end = end_game(params, &constants, r_n);
    if !end.epsilon_classification_agrees {
        warnings.push(format!(
            "epsilon classification (epsilon {:.6} vs threshold {:.6}) disagrees with the \
             direct end-game branch test (eta = {})",
            end.epsilon, end.epsilon_c, end.eta
        ));
    }

    let eta = end.eta as f64;
    let t_spiral_total = t_tilde_spiral + end.t_last + eta * end.t_l;
    let t_in_total = t_tilde_in + end.t_in_last + eta * r * (constants.lambda - 1.0) / vs;
    let t_total = t_spiral_total + t_in_total;

    Ok(SweepSchedule {
        params: *params,
        benchmarks,
        constants,
        vs,
        cycles,
        n_sweeps,
        r_hat_n: 2.0 * r,
        r_n,
        r_n_closed_form,
        r_n_clamped,
        degenerate_small_region: degenerate,
        t_tilde_in,
        t_tilde_spiral,
        closed_form,
        end_game: end,
        t_spiral_total,
        t_in_total,
        t_total,
        warnings,
    })
}

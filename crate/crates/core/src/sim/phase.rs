//! Protocol phase machine for the simulator.
//!
//! The plan is driven by the analytic schedule: spiral and dash segments use
//! the scheduled durations and radii verbatim. Two kinematic adjustments keep
//! the simulated team sealing its sectors:
//!
//! - azimuth is stretched so each sweep covers the full `2*pi/n` sector over
//!   the scheduled traversal time (the scheduled traversal angle alone leaves
//!   a wedge at every meeting boundary that no sensor would revisit);
//! - dash segments interpolate straight to the next cycle's start radius even
//!   when that distance exceeds `vs * t_in`; the per-cycle gap is recorded in
//!   [`PhasePlan::dash_position_adjustments`].

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::analytics::{DerivedConstants, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, RotationSense, SweeperPose};
use crate::schedule::SweepSchedule;

/// What the team is doing during a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseKind {
    Spiral { cycle: u32 },
    Dash { cycle: u32 },
    FinalDash,
    FinalCircle,
    FinalSpiral,
}

impl PhaseKind {
    /// Sensors detect only while sweeping; dashes are blind in the worst
    /// case (configurable in the simulator).
    pub fn is_dash(self) -> bool {
        matches!(self, PhaseKind::Dash { .. } | PhaseKind::FinalDash)
    }
}

/// One time slice of the protocol, shared by all sweepers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: PhaseKind,
    pub t_start: f64,
    pub duration: f64,
    /// Sensor-center radius at the start of the segment.
    pub radius_start: f64,
    /// Sensor-center radius at the end of the segment.
    pub radius_end: f64,
}

impl Segment {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }
}

/// Full kinematic plan for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhasePlan {
    pub segments: Vec<Segment>,
    pub n: u32,
    pub vs: f64,
    pub vt: f64,
    /// Full per-sweeper sector span, `2*pi/n`.
    pub sector_full: f64,
    /// Scheduled traversal angle, `2*pi/n - gamma`.
    pub traversal: f64,
    /// Azimuth stretch factor `sector_full / traversal`.
    pub stretch: f64,
    /// Final-circle turn per sweeper; the fan half-angle covers the rest of
    /// the sector.
    pub circle_span: f64,
    /// Extra turn past the sector seam for the terminal maneuvers. The
    /// closing sweeps have no successor pass, so a discrete grid needs the
    /// fan edge to cross the seam rather than merely touch it.
    pub seam_overlap: f64,
    pub protocol_end: f64,
    /// Per-cycle dash shortfall `2r - delta_i` between the physical dash
    /// reach and the next cycle's start radius.
    pub dash_position_adjustments: Vec<f64>,
    /// True when the plan runs a speed below critical (diagnostic mode); the
    /// region accounting is frozen at the start radius.
    pub forced: bool,
}

impl PhasePlan {
    /// Build the plan from a feasible schedule.
    pub fn from_schedule(schedule: &SweepSchedule) -> Result<PhasePlan> {
        let params = &schedule.params;
        let c = &schedule.constants;
        let sector_full = TAU / params.n as f64;
        let traversal = params.sector_angle(c.gamma);
        if traversal <= 0.0 {
            return Err(Error::PhaseDesync {
                message: format!("traversal angle {traversal} is not positive"),
            });
        }
        let mut segments = Vec::new();
        let mut gaps = Vec::new();
        let mut t = 0.0;
        let n_cycles = schedule.cycles.len();
        for (i, cyc) in schedule.cycles.iter().enumerate() {
            let spiral_end = if params.vt == 0.0 {
                cyc.r_tilde_i
            } else {
                cyc.r_tilde_i * c.lambda
            };
            segments.push(Segment {
                kind: PhaseKind::Spiral { cycle: cyc.index },
                t_start: t,
                duration: cyc.t_spiral_i,
                radius_start: cyc.r_tilde_i,
                radius_end: spiral_end,
            });
            t += cyc.t_spiral_i;
            if i + 1 < n_cycles {
                let next_start = schedule.cycles[i + 1].r_tilde_i;
                segments.push(Segment {
                    kind: PhaseKind::Dash { cycle: cyc.index },
                    t_start: t,
                    duration: cyc.t_in_i,
                    radius_start: spiral_end,
                    radius_end: next_start,
                });
                gaps.push((spiral_end - next_start) - cyc.delta_eff_i);
                t += cyc.t_in_i;
            } else {
                // Final inward motion to place the fan apex on the center.
                let end = &schedule.end_game;
                segments.push(Segment {
                    kind: PhaseKind::FinalDash,
                    t_start: t,
                    duration: end.t_in_last.max(0.0),
                    radius_start: spiral_end,
                    radius_end: params.r,
                });
                gaps.push((spiral_end - params.r) - schedule.vs * end.t_in_last.max(0.0));
                t += end.t_in_last.max(0.0);
            }
        }
        let end = &schedule.end_game;
        let circle_span = (sector_full - params.alpha).max(0.0);
        let circle_duration = if end.t_last > 0.0 {
            end.t_last
        } else {
            circle_span * params.r / schedule.vs
        };
        if circle_span > 0.0 {
            segments.push(Segment {
                kind: PhaseKind::FinalCircle,
                t_start: t,
                duration: circle_duration,
                radius_start: params.r,
                radius_end: params.r,
            });
            t += circle_duration;
        }
        if end.eta == 1 {
            segments.push(Segment {
                kind: PhaseKind::FinalSpiral,
                t_start: t,
                duration: end.t_l,
                radius_start: params.r,
                radius_end: params.r + params.vt * end.t_l,
            });
            t += end.t_l;
        }
        let plan = PhasePlan {
            segments,
            n: params.n,
            vs: schedule.vs,
            vt: params.vt,
            sector_full,
            traversal,
            stretch: sector_full / traversal,
            circle_span,
            seam_overlap: 0.0,
            protocol_end: t,
            dash_position_adjustments: gaps,
            forced: false,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Diagnostic plan for a speed at or below critical: sweeps repeat at the
    /// start radius with no inward progress, long enough to cover `horizon`.
    pub fn forced(
        params: &ScenarioParams,
        constants: &DerivedConstants,
        horizon: f64,
    ) -> Result<PhasePlan> {
        let sector_full = TAU / params.n as f64;
        let traversal = params.sector_angle(constants.gamma);
        if traversal <= 0.0 {
            return Err(Error::PhaseDesync {
                message: format!("traversal angle {traversal} is not positive"),
            });
        }
        let r_tilde = params.r0 - params.r;
        let t_spiral = if params.vt == 0.0 {
            traversal * r_tilde / constants.vs
        } else {
            r_tilde * (constants.lambda - 1.0) / params.vt
        };
        let spiral_end = if params.vt == 0.0 {
            r_tilde
        } else {
            r_tilde * constants.lambda
        };
        let mut segments = Vec::new();
        let mut t = 0.0;
        let mut cycle = 0u32;
        while t < horizon {
            segments.push(Segment {
                kind: PhaseKind::Spiral { cycle },
                t_start: t,
                duration: t_spiral,
                radius_start: r_tilde,
                radius_end: spiral_end,
            });
            t += t_spiral;
            // Immediate reversal: the earned margin is negative, so the
            // sweepers re-sweep from the same radius.
            segments.push(Segment {
                kind: PhaseKind::Dash { cycle },
                t_start: t,
                duration: 0.0,
                radius_start: spiral_end,
                radius_end: r_tilde,
            });
            cycle += 1;
            if cycle > 100_000 {
                break;
            }
        }
        let plan = PhasePlan {
            segments,
            n: params.n,
            vs: constants.vs,
            vt: params.vt,
            sector_full,
            traversal,
            stretch: sector_full / traversal,
            circle_span: 0.0,
            seam_overlap: 0.0,
            protocol_end: t,
            dash_position_adjustments: Vec::new(),
            forced: true,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Widen the terminal maneuvers to cross the sector seams by `overlap`
    /// radians (the scheduled durations are unchanged).
    pub fn with_seam_overlap(mut self, overlap: f64) -> Self {
        self.seam_overlap = overlap.max(0.0);
        self
    }

    /// Check that every spiral segment's accumulated sweep angle lands on the
    /// sector boundary when the phase machine transitions.
    fn validate(&self) -> Result<()> {
        for seg in &self.segments {
            if let PhaseKind::Spiral { .. } = seg.kind {
                let theta = self.spiral_angle(seg, seg.duration);
                let swept = theta * self.stretch;
                if (swept - self.sector_full).abs() > 1e-6 * self.sector_full.max(1.0) {
                    return Err(Error::PhaseDesync {
                        message: format!(
                            "spiral sweep covers {swept} instead of the sector {}",
                            self.sector_full
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Analytic sweep angle `tau` seconds into a spiral segment.
    fn spiral_angle(&self, seg: &Segment, tau: f64) -> f64 {
        let r_tilde = seg.radius_start;
        if self.vt == 0.0 {
            self.vs * tau / r_tilde
        } else {
            ((self.vs * self.vs - self.vt * self.vt).sqrt() / self.vt)
                * ((self.vt * tau + r_tilde) / r_tilde).ln()
        }
    }

    /// Index of the segment covering time `t` (the last one for times past
    /// the protocol end).
    pub fn segment_at(&self, t: f64) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let mut idx = match self
            .segments
            .binary_search_by(|s| s.t_start.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        // Skip into zero-duration segments only at their exact start.
        while idx + 1 < self.segments.len() && t >= self.segments[idx].t_end() {
            idx += 1;
        }
        Some(idx)
    }

    fn member_anchor(&self, j: usize) -> (f64, f64) {
        let pair = (j / 2) as f64;
        let anchor = normalize_angle(pair * 2.0 * self.sector_full);
        let base_sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        (anchor, base_sign)
    }

    fn spiral_dir(&self, j: usize, cycle: u32) -> f64 {
        let (_, base) = self.member_anchor(j);
        if cycle % 2 == 0 {
            base
        } else {
            -base
        }
    }

    fn spiral_start_az(&self, j: usize, cycle: u32) -> f64 {
        let (anchor, base) = self.member_anchor(j);
        if cycle % 2 == 0 {
            anchor
        } else {
            anchor + base * self.sector_full
        }
    }

    /// Pose of sweeper `j` at absolute time `t`. Times past the protocol end
    /// freeze at the final pose.
    pub fn pose_of(&self, j: usize, t: f64) -> SweeperPose {
        let idx = self.segment_at(t).expect("plan has segments");
        let seg = &self.segments[idx];
        self.pose_in_segment(j, idx, t - seg.t_start)
    }

    /// Pose of sweeper `j` at local time `tau` into segment `idx` (clamped
    /// to the segment).
    pub fn pose_in_segment(&self, j: usize, idx: usize, tau: f64) -> SweeperPose {
        let seg = &self.segments[idx];
        let tau = tau.clamp(0.0, seg.duration);
        let (radius, azimuth, dir) = match seg.kind {
            PhaseKind::Spiral { cycle } => {
                let dir = self.spiral_dir(j, cycle);
                let start = self.spiral_start_az(j, cycle);
                let theta = self.spiral_angle(seg, tau);
                (
                    seg.radius_start + self.vt * tau,
                    start + dir * self.stretch * theta,
                    dir,
                )
            }
            PhaseKind::Dash { cycle } => {
                let dir = self.spiral_dir(j, cycle);
                let az = self.spiral_start_az(j, cycle) + dir * self.sector_full;
                let f = if seg.duration > 0.0 {
                    tau / seg.duration
                } else {
                    1.0
                };
                (
                    seg.radius_start + f * (seg.radius_end - seg.radius_start),
                    az,
                    dir,
                )
            }
            PhaseKind::FinalDash => {
                let last = self.last_cycle();
                let dir = self.spiral_dir(j, last);
                let az = self.spiral_start_az(j, last) + dir * self.sector_full;
                let f = if seg.duration > 0.0 {
                    tau / seg.duration
                } else {
                    1.0
                };
                (
                    seg.radius_start + f * (seg.radius_end - seg.radius_start),
                    az,
                    dir,
                )
            }
            PhaseKind::FinalCircle => {
                // The turn starts at the meeting station reached by the last
                // cycle and reverses direction back into the own sector.
                let last = self.last_cycle();
                let dir = -self.spiral_dir(j, last);
                let station =
                    self.spiral_start_az(j, last) + self.spiral_dir(j, last) * self.sector_full;
                let rate = if seg.duration > 0.0 {
                    (self.circle_span + self.seam_overlap) / seg.duration
                } else {
                    0.0
                };
                (seg.radius_start, station + dir * rate * tau, dir)
            }
            PhaseKind::FinalSpiral => {
                let last = self.last_cycle();
                let circle_dir = -self.spiral_dir(j, last);
                let dir = -circle_dir;
                let station =
                    self.spiral_start_az(j, last) + self.spiral_dir(j, last) * self.sector_full;
                let start = station + circle_dir * self.circle_span;
                let theta = self.spiral_angle(seg, tau);
                let stretch = (self.sector_full + self.seam_overlap) / self.traversal;
                (
                    seg.radius_start + self.vt * tau,
                    start + dir * stretch * theta,
                    dir,
                )
            }
        };
        let sense = if dir > 0.0 {
            RotationSense::CounterClockwise
        } else {
            RotationSense::Clockwise
        };
        let az = normalize_angle(azimuth);
        SweeperPose {
            radial_distance: radius,
            polar_angle: az,
            heading: az,
            rotation_sense: sense,
        }
    }

    /// Poses of the whole team at time `t`.
    pub fn poses_at(&self, t: f64) -> Vec<SweeperPose> {
        (0..self.n as usize).map(|j| self.pose_of(j, t)).collect()
    }

    fn last_cycle(&self) -> u32 {
        self.segments
            .iter()
            .filter_map(|s| match s.kind {
                PhaseKind::Spiral { cycle } => Some(cycle),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Time stamps of dash starts and direction reversals.
    pub fn cycle_boundaries(&self) -> Vec<(f64, PhaseKind)> {
        self.segments
            .iter()
            .filter(|s| s.kind.is_dash() || matches!(s.kind, PhaseKind::FinalCircle))
            .map(|s| (s.t_start, s.kind))
            .collect()
    }
}

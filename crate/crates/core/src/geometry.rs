//! Fan-sensor footprint model and the initial back-to-back deployment of
//! sweeper pairs.
//!
//! A sweeper carries a fan-shaped sensor described by its half-angle `alpha`
//! and a central line of length `2r`. The sensor center (used for all
//! kinematics) is the midpoint of the central line; the footprint is modeled
//! as a circular sector of radius `2r` whose apex sits at the inner tip of
//! the central line and whose axis runs along it.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::analytics::ScenarioParams;
use crate::error::{Error, Result};

/// A point in the plane, in world units, origin at the region center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at the given polar angle.
    pub fn unit(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Supported footprint shapes.
///
/// Kept as an enumeration so alternative shapes can be added without
/// touching callers; only the apex-at-inner-tip sector is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FootprintModel {
    /// Circular sector of radius `2r`, half-angle `alpha`, apex at the inner
    /// tip of the central line, axis along the central line.
    SectorApexInner,
}

/// Fan-sensor dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    /// Sensor half-length; the full central line has length `2r`.
    pub r: f64,
    /// Fan half-angle in radians.
    pub alpha: f64,
    pub footprint_model: FootprintModel,
}

impl SensorGeometry {
    pub fn new(r: f64, alpha: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                message: format!("sensor half-length must be positive, got {r}"),
            });
        }
        if !(0.0..PI / 2.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                message: format!("fan half-angle must lie in [0, pi/2), got {alpha}"),
            });
        }
        Ok(Self {
            r,
            alpha,
            footprint_model: FootprintModel::SectorApexInner,
        })
    }
}

/// Direction a sweeper travels around the region center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationSense {
    Clockwise,
    CounterClockwise,
}

impl RotationSense {
    /// Signed angular direction: +1 counter-clockwise, -1 clockwise.
    pub fn signum(self) -> f64 {
        match self {
            RotationSense::CounterClockwise => 1.0,
            RotationSense::Clockwise => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            RotationSense::CounterClockwise => RotationSense::Clockwise,
            RotationSense::Clockwise => RotationSense::CounterClockwise,
        }
    }
}

/// Kinematic state of one sweeper.
///
/// `heading` is the direction of the sensor's central line (pointing from
/// the inner tip through the outer tip). While executing the protocol the
/// central line stays radial, so `heading == polar_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweeperPose {
    /// Distance of the sensor center from the region center.
    pub radial_distance: f64,
    /// Polar angle of the sensor center, normalized to [0, 2*pi).
    pub polar_angle: f64,
    /// Direction of the central line, normalized to [0, 2*pi).
    pub heading: f64,
    pub rotation_sense: RotationSense,
}

impl SweeperPose {
    pub fn new(
        radial_distance: f64,
        polar_angle: f64,
        heading: f64,
        rotation_sense: RotationSense,
    ) -> Result<Self> {
        if !(radial_distance >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "radial_distance",
                message: format!("must be non-negative, got {radial_distance}"),
            });
        }
        Ok(Self {
            radial_distance,
            polar_angle: normalize_angle(polar_angle),
            heading: normalize_angle(heading),
            rotation_sense,
        })
    }

    /// Sensor-center position in world coordinates.
    pub fn position(&self) -> Point2 {
        let u = Point2::unit(self.polar_angle);
        Point2::new(self.radial_distance * u.x, self.radial_distance * u.y)
    }
}

/// Normalize an angle to the half-open interval [0, 2*pi).
pub fn normalize_angle(a: f64) -> f64 {
    let mut x = a % TAU;
    if x < 0.0 {
        x += TAU;
    }
    // The remainder can land exactly on TAU after the correction.
    if x >= TAU {
        x = 0.0;
    }
    x
}

/// Initial placement of the whole team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub poses: Vec<SweeperPose>,
    /// Indices of (counter-clockwise, clockwise) members of each
    /// back-to-back pair.
    pub sector_half_pairs: Vec<(usize, usize)>,
    /// Spiral traversal angle per sweep: `2*pi/n - gamma`.
    pub sector_angle: f64,
    /// Start offset angle used by the traversal accounting.
    pub gamma: f64,
}

/// Start offset angle of a sweeper center relative to the critical boundary
/// point, for a sensor of half-length `r` and half-angle `alpha` deployed at
/// region radius `r0`.
///
/// Evaluated from the closed form; substituting the result back into the
/// generating triangle (sides `r0` and `r0 - 2r + r*cos(alpha)`, included
/// angle gamma) reproduces the chord `r*sqrt(2*(2 - cos(alpha)))` exactly.
pub fn gamma_offset(r0: f64, r: f64, alpha: f64) -> Result<f64> {
    if !(r0 > 0.0) || !(r > 0.0) {
        return Err(Error::Domain {
            context: "gamma_offset",
            message: format!("lengths must be positive, got r0 = {r0}, r = {r}"),
        });
    }
    let ca = alpha.cos();
    let feature = r0 - 2.0 * r + r * ca;
    if feature <= 0.0 {
        return Err(Error::Domain {
            context: "gamma_offset",
            message: format!(
                "sensor too large for the region: r0 - 2r + r*cos(alpha) = {feature} <= 0"
            ),
        });
    }
    let num = 2.0 * r0 * r0 + 2.0 * r0 * r * (ca - 2.0) + r * r * ca * (ca - 2.0);
    let den = 2.0 * r0 * feature;
    let cos_gamma = num / den;
    if !(-1.0..=1.0).contains(&cos_gamma) {
        return Err(Error::Domain {
            context: "gamma_offset",
            message: format!("arccos argument {cos_gamma} outside [-1, 1]"),
        });
    }
    Ok(cos_gamma.acos())
}

/// Heading offset between a spiral sweeper's velocity and the local tangent,
/// `phi = arcsin(vt / vs)`.
pub fn phi_heading(vs: f64, vt: f64) -> Result<f64> {
    if !(vt >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "vt",
            message: format!("evader speed must be non-negative, got {vt}"),
        });
    }
    if !(vs > vt) {
        return Err(Error::InfeasibleSpeed {
            speed: vs,
            required: vt,
            context: "spiral tracking needs vs > vt",
        });
    }
    Ok((vt / vs).asin())
}

/// Place `n` sweepers in back-to-back pairs with the outer tip of every
/// central line on the circle of radius `r0`.
///
/// Pair `p` is anchored at polar angle `p * 4*pi/n`; both members start at
/// the identical sensor-center position with opposite rotation senses.
pub fn initial_deployment(params: &ScenarioParams) -> Result<Deployment> {
    if params.n % 2 != 0 {
        return Err(Error::OddTeamSize { n: params.n });
    }
    if params.n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            message: format!("need at least one pair, got n = {}", params.n),
        });
    }
    let gamma = gamma_offset(params.r0, params.r, params.alpha)?;
    let n = params.n as usize;
    let sector_angle = TAU / params.n as f64 - gamma;
    if sector_angle < 0.0 {
        return Err(Error::InfeasibleScenario {
            message: format!(
                "start offset {gamma} exceeds the per-sweeper sector {}",
                TAU / params.n as f64
            ),
        });
    }
    let radial = params.r0 - params.r;
    let mut poses = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n / 2);
    for p in 0..n / 2 {
        let anchor = normalize_angle(p as f64 * 2.0 * TAU / params.n as f64);
        let ccw = SweeperPose::new(radial, anchor, anchor, RotationSense::CounterClockwise)?;
        let cw = SweeperPose::new(radial, anchor, anchor, RotationSense::Clockwise)?;
        pairs.push((poses.len(), poses.len() + 1));
        poses.push(ccw);
        poses.push(cw);
    }
    Ok(Deployment {
        poses,
        sector_half_pairs: pairs,
        sector_angle,
        gamma,
    })
}

/// Fan footprint region for fast point-containment queries.
#[derive(Debug, Clone, Copy)]
pub struct SectorFan {
    pub apex: Point2,
    axis: Point2,
    cos_alpha: f64,
    radius: f64,
}

impl SectorFan {
    pub fn new(pose: &SweeperPose, sensor: &SensorGeometry) -> Self {
        let pos = pose.position();
        let axis = Point2::unit(pose.heading);
        Self {
            apex: Point2::new(pos.x - sensor.r * axis.x, pos.y - sensor.r * axis.y),
            axis,
            cos_alpha: sensor.alpha.cos(),
            radius: 2.0 * sensor.r,
        }
    }

    /// Closed-region membership: the apex and boundary belong to the fan.
    pub fn contains(&self, p: Point2) -> bool {
        let vx = p.x - self.apex.x;
        let vy = p.y - self.apex.y;
        let d2 = vx * vx + vy * vy;
        if d2 > self.radius * self.radius {
            return false;
        }
        let along = vx * self.axis.x + vy * self.axis.y;
        if along < 0.0 {
            return false;
        }
        // along >= |v| * cos(alpha), squared to avoid the sqrt
        along * along >= d2 * self.cos_alpha * self.cos_alpha
    }

    /// Reach of the fan from its apex.
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// True iff `point` lies within the sweeper's fan footprint.
pub fn footprint_contains(pose: &SweeperPose, sensor: &SensorGeometry, point: Point2) -> bool {
    match sensor.footprint_model {
        FootprintModel::SectorApexInner => SectorFan::new(pose, sensor).contains(point),
    }
}

/// Convex quadrilateral region, used for the ribbon a moving central line
/// sweeps between two sample instants.
///
/// The fan's curved outer boundary only touches the expanding wavefront at
/// the tangency instant, so sampling the fan at discrete times misses the
/// contact; the axis ribbon closes that gap with the exact swept band of the
/// central line.
#[derive(Debug, Clone, Copy)]
pub struct SweptQuad {
    corners: [Point2; 4],
}

impl SweptQuad {
    /// Ribbon between two poses of the same sensor: the quadrilateral
    /// spanned by the central line at each pose.
    pub fn between(a: &SweeperPose, b: &SweeperPose, sensor: &SensorGeometry) -> Self {
        let line = |p: &SweeperPose| {
            let pos = p.position();
            let u = Point2::unit(p.heading);
            (
                Point2::new(pos.x - sensor.r * u.x, pos.y - sensor.r * u.y),
                Point2::new(pos.x + sensor.r * u.x, pos.y + sensor.r * u.y),
            )
        };
        let (apex_a, tip_a) = line(a);
        let (apex_b, tip_b) = line(b);
        Self {
            corners: [apex_a, apex_b, tip_b, tip_a],
        }
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.corners {
            min.x = min.x.min(c.x);
            min.y = min.y.min(c.y);
            max.x = max.x.max(c.x);
            max.y = max.y.max(c.y);
        }
        (min, max)
    }

    /// Point-in-convex-quad by uniform cross-product sign; boundary counts
    /// as inside.
    pub fn contains(&self, p: Point2) -> bool {
        let mut sign = 0.0f64;
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            if cross.abs() < 1e-12 {
                continue;
            }
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return false;
            }
        }
        true
    }
}

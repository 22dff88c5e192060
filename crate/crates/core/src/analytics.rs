//! Speed benchmarks and the spiral trajectory solution.
//!
//! Three speeds matter for a scenario:
//! - `v_lb`: protocol-independent lower bound `pi*r0*vt/(n*r)`,
//! - `v_simplified`: the closed-form speed that confines the region over one
//!   sweep, ignoring expansion during the inward dash,
//! - `v_critical`: the exact threshold accounting for dash-time expansion,
//!   found by Newton-Raphson on the confinement balance with a guaranteed
//!   bisection fallback.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::gamma_offset;

/// How the sweeper speed is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpeedSpec {
    /// Absolute sweeper speed.
    Absolute(f64),
    /// Multiple of the exact critical speed for the same scenario.
    CriticalMultiple(f64),
}

/// One problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Team size; must be even and at least 2.
    pub n: u32,
    /// Initial evader-region radius.
    pub r0: f64,
    /// Sensor half-length.
    pub r: f64,
    /// Fan half-angle in radians.
    pub alpha: f64,
    /// Evader maximum speed.
    pub vt: f64,
    pub speed: SpeedSpec,
}

impl ScenarioParams {
    pub fn new(n: u32, r0: f64, r: f64, alpha: f64, vt: f64, speed: SpeedSpec) -> Result<Self> {
        let p = Self {
            n,
            r0,
            r,
            alpha,
            vt,
            speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                message: format!("team size must be even and >= 2, got {}", self.n),
            });
        }
        if !(self.r > 0.0 && self.r < self.r0) {
            return Err(Error::InvalidParameter {
                name: "r",
                message: format!("need 0 < r < r0, got r = {}, r0 = {}", self.r, self.r0),
            });
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                message: format!("fan half-angle must lie in [0, pi/2), got {}", self.alpha),
            });
        }
        if !(self.vt >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "vt",
                message: format!("evader speed must be non-negative, got {}", self.vt),
            });
        }
        match self.speed {
            SpeedSpec::Absolute(v) if !(v > 0.0) => Err(Error::InvalidParameter {
                name: "vs",
                message: format!("sweeper speed must be positive, got {v}"),
            }),
            SpeedSpec::CriticalMultiple(m) if !(m > 0.0) => Err(Error::InvalidParameter {
                name: "multiplier",
                message: format!("speed multiplier must be positive, got {m}"),
            }),
            _ => Ok(()),
        }
    }

    /// Spiral traversal angle per sweep, `2*pi/n - gamma`.
    pub fn sector_angle(&self, gamma: f64) -> f64 {
        TAU / self.n as f64 - gamma
    }
}

/// The three speed benchmarks of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBenchmarks {
    /// Protocol-independent lower bound.
    pub v_lb: f64,
    /// Single-sweep confinement speed (no dash-expansion correction).
    pub v_simplified: f64,
    /// Exact critical speed.
    pub v_critical: f64,
    /// Relative residual of the confinement balance at `v_critical`,
    /// `|(r0-r)(lambda-1) - 2 r v/(v+vt)| / (2r)`.
    pub residual: f64,
}

/// Scenario constants derived for a resolved sweeper speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Start offset angle.
    pub gamma: f64,
    /// Heading offset `arcsin(vt/vs)`.
    pub phi: f64,
    /// Wavefront expansion factor over one spiral sweep.
    pub lambda: f64,
    /// Offset of the shifted-radius recursion (negative).
    pub c1: f64,
    /// Ratio of the shifted-radius recursion (> 1 whenever lambda > 1).
    pub c2: f64,
    /// Offset of the sweep-time recursion (non-positive).
    pub c3: f64,
    /// Resolved sweeper speed the constants were computed for.
    pub vs: f64,
}

/// Lower bound on the sweeper speed, independent of the sweep protocol:
/// `pi * r0 * vt / (n * r)`.
pub fn lower_bound_speed(n: u32, r0: f64, r: f64, vt: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            message: "team size must be at least 1".into(),
        });
    }
    if !(r > 0.0) || !(r0 > 0.0) || !(vt >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            message: format!("need r0, r > 0 and vt >= 0, got r0={r0}, r={r}, vt={vt}"),
        });
    }
    Ok(std::f64::consts::PI * r0 * vt / (n as f64 * r))
}

/// Expansion factor of the sweeper-center radius over one spiral sweep:
/// `exp((2*pi/n - gamma) * vt / sqrt(vs^2 - vt^2))`.
///
/// Strictly decreasing in `vs`; tends to 1 as `vs -> inf` and for `vt = 0`.
pub fn lambda_factor(n: u32, gamma: f64, vs: f64, vt: f64) -> Result<f64> {
    let sector = TAU / n as f64 - gamma;
    if sector < 0.0 {
        return Err(Error::Domain {
            context: "lambda_factor",
            message: format!("negative sweep angle {sector}"),
        });
    }
    if vt == 0.0 {
        return Ok(1.0);
    }
    if !(vs > vt) {
        return Err(Error::InfeasibleSpeed {
            speed: vs,
            required: vt,
            context: "lambda_factor needs vs > vt",
        });
    }
    Ok((sector * vt / (vs * vs - vt * vt).sqrt()).exp())
}

/// Closed-form speed that keeps the region within `r0 + r` over one sweep:
/// `vt * sqrt((2*pi/n - gamma)^2 / ln^2((r0+r)/(r0-r)) + 1)`.
pub fn simplified_critical_speed(n: u32, r0: f64, r: f64, gamma: f64, vt: f64) -> Result<f64> {
    if !(r0 > r) {
        return Err(Error::Domain {
            context: "simplified_critical_speed",
            message: format!("need r0 > r, got r0 = {r0}, r = {r}"),
        });
    }
    let sector = TAU / n as f64 - gamma;
    let l = ((r0 + r) / (r0 - r)).ln();
    Ok(vt * (sector * sector / (l * l) + 1.0).sqrt())
}

/// Confinement balance whose root is the critical speed:
/// `g(v) = (r0 - r)(lambda(v) - 1) - 2 r v / (v + vt)`.
fn balance(v: f64, n: u32, r0: f64, r: f64, gamma: f64, vt: f64) -> f64 {
    let sector = TAU / n as f64 - gamma;
    let lam = (sector * vt / (v * v - vt * vt).sqrt()).exp();
    (r0 - r) * (lam - 1.0) - 2.0 * r * v / (v + vt)
}

fn balance_derivative(v: f64, n: u32, r0: f64, r: f64, gamma: f64, vt: f64) -> f64 {
    let sector = TAU / n as f64 - gamma;
    let s2 = v * v - vt * vt;
    let lam = (sector * vt / s2.sqrt()).exp();
    let dlam = -lam * sector * vt * v / s2.powf(1.5);
    (r0 - r) * dlam - 2.0 * r * vt / ((v + vt) * (v + vt))
}

const BALANCE_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// Solve the confinement balance for the exact critical speed.
///
/// Newton-Raphson from the simplified speed; falls back to bisection on a
/// doubling bracket if Newton leaves the domain or stalls. Converged when
/// `|g(v)|/(2r) < 1e-12`.
pub fn critical_speed(params: &ScenarioParams) -> Result<SpeedBenchmarks> {
    params.validate()?;
    let ScenarioParams { n, r0, r, vt, .. } = *params;
    let gamma = gamma_offset(r0, r, params.alpha)?;
    let v_lb = lower_bound_speed(n, r0, r, vt)?;
    let v_simplified = simplified_critical_speed(n, r0, r, gamma, vt)?;

    if vt == 0.0 {
        // Stationary evaders: any positive speed confines.
        return Ok(SpeedBenchmarks {
            v_lb: 0.0,
            v_simplified: 0.0,
            v_critical: 0.0,
            residual: 0.0,
        });
    }
    let sector = params.sector_angle(gamma);
    if sector <= 0.0 {
        // lambda == 1 for a zero-angle sweep; the balance has no root.
        return Err(Error::InfeasibleScenario {
            message: format!("sweep angle {sector} <= 0 leaves no confinement root"),
        });
    }

    let lo = vt * (1.0 + 1e-9);
    let g = |v: f64| balance(v, n, r0, r, gamma, vt);

    // Newton from the simplified speed.
    let mut v = v_simplified.max(lo);
    let mut converged = None;
    for _ in 0..NEWTON_MAX_ITER {
        let gv = g(v);
        if gv.abs() / (2.0 * r) < BALANCE_TOL {
            converged = Some(v);
            break;
        }
        let dv = balance_derivative(v, n, r0, r, gamma, vt);
        if dv == 0.0 || !dv.is_finite() {
            break;
        }
        let next = v - gv / dv;
        if !next.is_finite() || next <= lo {
            break;
        }
        v = next;
    }

    let v_critical = match converged {
        Some(v) => v,
        None => bisect_balance(lo, n, r0, r, gamma, vt)?,
    };
    let residual = g(v_critical).abs() / (2.0 * r);
    Ok(SpeedBenchmarks {
        v_lb,
        v_simplified,
        v_critical,
        residual,
    })
}

/// Bisection fallback on a sign-changing bracket; the balance is continuous
/// and strictly decreasing for v > vt, so the bracket always closes.
fn bisect_balance(lo0: f64, n: u32, r0: f64, r: f64, gamma: f64, vt: f64) -> Result<f64> {
    let g = |v: f64| balance(v, n, r0, r, gamma, vt);
    let mut lo = lo0;
    let mut hi = (2.0 * vt).max(lo0 * 2.0).max(1.0);
    let mut guard = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::InfeasibleScenario {
                message: "confinement balance never turns negative".into(),
            });
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..300 {
        mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() / (2.0 * r) < BALANCE_TOL {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The interval shrank by 2^-300; accept the midpoint if it is close.
    if g(mid).abs() / (2.0 * r) < 1e-9 {
        Ok(mid)
    } else {
        Err(Error::NoConvergence {
            context: "critical speed bisection",
            last: mid,
        })
    }
}

/// Sweep angle reached after time `t` of spiral tracking that started with
/// the sensor center at radius `ri - r`.
pub fn spiral_theta(t: f64, ri: f64, r: f64, vs: f64, vt: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("time must be non-negative, got {t}"),
        });
    }
    if !(ri > r) {
        return Err(Error::Domain {
            context: "spiral_theta",
            message: format!("need ri > r, got ri = {ri}, r = {r}"),
        });
    }
    if vt == 0.0 {
        if !(vs > 0.0) {
            return Err(Error::InfeasibleSpeed {
                speed: vs,
                required: 0.0,
                context: "spiral_theta needs vs > 0",
            });
        }
        // Constant-radius limit: angular speed vs / (ri - r).
        return Ok(vs * t / (ri - r));
    }
    if !(vs > vt) {
        return Err(Error::InfeasibleSpeed {
            speed: vs,
            required: vt,
            context: "spiral_theta needs vs > vt",
        });
    }
    let rt = ri - r;
    Ok(((vs * vs - vt * vt).sqrt() / vt) * ((vt * t + rt) / rt).ln())
}

/// Sensor-center distance from the region center after sweeping angle
/// `theta` of a spiral that started at radius `ri - r`.
pub fn spiral_radius(theta: f64, ri: f64, r: f64, vs: f64, vt: f64) -> f64 {
    let rt = ri - r;
    if vt == 0.0 {
        return rt;
    }
    rt * (vt * theta / (vs * vs - vt * vt).sqrt()).exp()
}

/// Derive the per-scenario constants for a resolved sweeper speed.
pub fn derive_constants(params: &ScenarioParams, vs: f64) -> Result<DerivedConstants> {
    let gamma = gamma_offset(params.r0, params.r, params.alpha)?;
    let vt = params.vt;
    let phi = crate::geometry::phi_heading(vs, vt)?;
    let lambda = lambda_factor(params.n, gamma, vs, vt)?;
    let r = params.r;
    let c1 = -2.0 * r * vs / (vs + vt);
    let c2 = (vt + vs * lambda) / (vs + vt);
    let sector = params.sector_angle(gamma);
    // c3 = -2 r vs (lambda - 1) / ((vs + vt) vt); for vt = 0 use the limit
    // (lambda - 1)/vt -> sector / vs.
    let c3 = if vt == 0.0 {
        -2.0 * r * sector / (vs + vt)
    } else {
        -2.0 * r * vs * (lambda - 1.0) / ((vs + vt) * vt)
    };
    Ok(DerivedConstants {
        gamma,
        phi,
        lambda,
        c1,
        c2,
        c3,
        vs,
    })
}

/// Resolve the speed specification to an absolute sweeper speed.
pub fn resolve_speed(params: &ScenarioParams, benchmarks: &SpeedBenchmarks) -> Result<f64> {
    match params.speed {
        SpeedSpec::Absolute(v) => Ok(v),
        SpeedSpec::CriticalMultiple(m) => {
            if benchmarks.v_critical <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "multiplier",
                    message: "critical speed is zero (vt = 0); specify an absolute speed".into(),
                });
            }
            Ok(m * benchmarks.v_critical)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const R0: f64 = 1000.0;
    const R: f64 = 100.0;

    fn fig_params(n: u32) -> ScenarioParams {
        ScenarioParams::new(
            n,
            R0,
            R,
            10f64.to_radians(),
            1.0,
            SpeedSpec::CriticalMultiple(1.1),
        )
        .unwrap()
    }

    /// Independent root oracle: plain bisection on the confinement balance.
    fn bisection_oracle(n: u32, gamma: f64, vt: f64) -> f64 {
        let g = |v: f64| balance(v, n, R0, R, gamma, vt);
        let mut lo = vt * (1.0 + 1e-9);
        let mut hi = 100.0 * vt.max(1.0);
        assert!(g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lower_bound_examples() {
        let v = lower_bound_speed(2, R0, R, 1.0).unwrap();
        assert_relative_eq!(v, 5.0 * PI, max_relative = 1e-14);
        assert_eq!(lower_bound_speed(4, R0, R, 0.0).unwrap(), 0.0);
        // Doubling n halves the bound exactly.
        let v4 = lower_bound_speed(4, R0, R, 1.0).unwrap();
        assert_relative_eq!(v4, v / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn lambda_examples() {
        // Huge speed: exponent collapses.
        let l = lambda_factor(2, 0.1, 1e9, 1.0).unwrap();
        assert_relative_eq!(l, 1.0, epsilon = 1e-8);
        // Zero-angle sweep.
        let g = TAU / 2.0;
        assert_relative_eq!(lambda_factor(2, g, 5.0, 1.0).unwrap(), 1.0, epsilon = 0.0);
        // Frozen reference evaluation.
        let l2 = lambda_factor(2, 0.1055, 20.0, 1.0).unwrap();
        assert_relative_eq!(l2, 1.164154118792321, max_relative = 1e-12);
        assert!(matches!(
            lambda_factor(2, 0.1, 0.5, 1.0),
            Err(Error::InfeasibleSpeed { .. })
        ));
    }

    #[test]
    fn simplified_speed_examples() {
        let gamma = gamma_offset(R0, R, 10f64.to_radians()).unwrap();
        assert_eq!(
            simplified_critical_speed(2, R0, R, gamma, 0.0).unwrap(),
            0.0
        );
        let v = simplified_critical_speed(2, R0, R, gamma, 1.0).unwrap();
        assert_relative_eq!(v, 15.162562912372, max_relative = 1e-9);
        // Confinement holds with equality at this speed:
        // (r0 - r) * lambda(v) == r0 + r.
        let lam = lambda_factor(2, gamma, v, 1.0).unwrap();
        assert_relative_eq!((R0 - R) * lam, R0 + R, max_relative = 1e-9);
        // Monotone decrease in n.
        let v16 = simplified_critical_speed(16, R0, R, gamma, 1.0).unwrap();
        assert!(v16 < v);
        assert!(matches!(
            simplified_critical_speed(2, 50.0, 100.0, 0.1, 1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn critical_speed_matches_bisection_oracle() {
        for n in (2..=16).step_by(2) {
            let p = fig_params(n);
            let b = critical_speed(&p).unwrap();
            let gamma = gamma_offset(R0, R, p.alpha).unwrap();
            let oracle = bisection_oracle(n, gamma, 1.0);
            assert_relative_eq!(b.v_critical, oracle, max_relative = 1e-9);
            assert!(b.residual < 1e-9, "residual {} at n = {n}", b.residual);
            assert!(b.v_critical > b.v_lb, "ordering violated at n = {n}");
            assert!(
                b.v_critical > b.v_simplified,
                "ordering violated at n = {n}"
            );
        }
    }

    #[test]
    fn critical_speed_reference_values() {
        // Frozen from the bisection oracle.
        let b2 = critical_speed(&fig_params(2)).unwrap();
        assert_relative_eq!(b2.v_critical, 16.016522266525, max_relative = 1e-9);
        let b16 = critical_speed(&fig_params(16)).unwrap();
        assert_relative_eq!(b16.v_critical, 2.243562135404, max_relative = 1e-9);
    }

    #[test]
    fn critical_speed_stationary_evaders() {
        let p = ScenarioParams::new(4, R0, R, 0.1, 0.0, SpeedSpec::Absolute(5.0)).unwrap();
        let b = critical_speed(&p).unwrap();
        assert_eq!(b.v_critical, 0.0);
        assert_eq!(b.v_lb, 0.0);
    }

    #[test]
    fn spiral_theta_and_radius() {
        let (ri, vs, vt) = (1000.0, 16.0, 1.0);
        assert_eq!(spiral_theta(0.0, ri, R, vs, vt).unwrap(), 0.0);
        assert_relative_eq!(spiral_radius(0.0, ri, R, vs, vt), ri - R, epsilon = 0.0);

        // Round trip: radius(theta(t)) == vt*t + ri - r.
        for &t in &[0.5, 3.0, 17.0, 120.0] {
            let th = spiral_theta(t, ri, R, vs, vt).unwrap();
            assert_relative_eq!(
                spiral_radius(th, ri, R, vs, vt),
                vt * t + ri - R,
                max_relative = 1e-12
            );
        }

        // Sweeping the sector takes (ri - r)(lambda - 1)/vt.
        let gamma = gamma_offset(R0, R, 10f64.to_radians()).unwrap();
        let sector = TAU / 2.0 - gamma;
        let lam = lambda_factor(2, gamma, vs, vt).unwrap();
        let t_sector = (ri - R) * (lam - 1.0) / vt;
        assert_relative_eq!(
            spiral_theta(t_sector, ri, R, vs, vt).unwrap(),
            sector,
            max_relative = 1e-12
        );
        // Sector end radius is (ri - r) * lambda.
        assert_relative_eq!(
            spiral_radius(sector, ri, R, vs, vt),
            (ri - R) * lam,
            max_relative = 1e-12
        );

        // vt = 0 limit.
        assert_relative_eq!(
            spiral_theta(2.0, ri, R, 10.0, 0.0).unwrap(),
            20.0 / (ri - R),
            max_relative = 1e-15
        );
        assert_eq!(spiral_radius(1.0, ri, R, 10.0, 0.0), ri - R);
    }

    #[test]
    fn derive_constants_signs() {
        let p = fig_params(4);
        let b = critical_speed(&p).unwrap();
        let vs = resolve_speed(&p, &b).unwrap();
        let c = derive_constants(&p, vs).unwrap();
        assert!(c.lambda > 1.0);
        assert!(c.c2 > 1.0);
        assert!(c.c1 < 0.0);
        assert!(c.c3 < 0.0);
        assert!(c.phi > 0.0 && c.phi < PI / 2.0);
    }

    #[test]
    fn resolve_speed_multiplier_needs_moving_evaders() {
        let p = ScenarioParams::new(4, R0, R, 0.1, 0.0, SpeedSpec::CriticalMultiple(1.1)).unwrap();
        let b = critical_speed(&p).unwrap();
        assert!(matches!(
            resolve_speed(&p, &b),
            Err(Error::InvalidParameter { .. })
        ));
    }

    proptest! {
        #[test]
        fn lambda_strictly_decreasing_in_speed(
            v1 in 1.5..60.0f64,
            dv in 0.1..40.0f64,
            gamma in 0.0..0.5f64,
        ) {
            let l1 = lambda_factor(2, gamma, v1, 1.0).unwrap();
            let l2 = lambda_factor(2, gamma, v1 + dv, 1.0).unwrap();
            prop_assert!(l2 < l1);
        }

        #[test]
        fn spiral_theta_increasing_and_concave(
            t in 0.1..200.0f64,
            dt in 0.1..50.0f64,
        ) {
            let th = |t| spiral_theta(t, 1000.0, 100.0, 16.0, 1.0).unwrap();
            let (a, b, c) = (th(t), th(t + dt), th(t + 2.0 * dt));
            prop_assert!(b > a);
            // Concavity: increments shrink.
            prop_assert!(c - b < b - a + 1e-12);
        }

        #[test]
        fn balance_strictly_decreasing(v in 1.2..50.0f64, dv in 0.05..10.0f64) {
            let gamma = gamma_offset(R0, R, 0.2).unwrap();
            let g1 = balance(v, 4, R0, R, gamma, 1.0);
            let g2 = balance(v + dv, 4, R0, R, gamma, 1.0);
            prop_assert!(g2 < g1);
        }
    }
}

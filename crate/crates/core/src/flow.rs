//! Local flows near the two saddle-foci and the transitions between them.
//!
//! Cylinder `V1` around the first equilibrium is entered through its wall
//! (`In1`, height `z`) and left through its top (`Out1`, radius `ρ`);
//! cylinder `V2` is entered through its top (`In2`, radius `ρ`) and left
//! through its wall (`Out2`, height `z`). Only the upper half `z > 0` is
//! modelled. Heights and radii shrink like `z^(δ^n)`, so points carry
//! `ln z` / `ln ρ` instead of the coordinates themselves.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{BykovError, Result};
use crate::params::{DerivedConstants, PerturbationSpec, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    In1,
    Out1,
    In2,
    Out2,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::In1 => "In1",
            Chart::Out1 => "Out1",
            Chart::In2 => "In2",
            Chart::Out2 => "Out2",
        }
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point on one of the four cross sections.
///
/// For `In1`/`Out2` the log-coordinate is `ln z`; for `Out1`/`In2` it is
/// `ln ρ`. The other cylindrical coordinate is fixed to 1 by the section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionPoint {
    pub chart: Chart,
    /// Unwrapped angle of the current leg.
    pub theta_lifted: f64,
    log_coord: DoubleDouble,
}

impl SectionPoint {
    /// Builds a point from its log-coordinate; fails unless
    /// `-∞ < log_coord < 0`.
    pub fn new(chart: Chart, theta: f64, log_coord: f64) -> Result<Self> {
        Self::from_log_dd(chart, theta, DoubleDouble::from(log_coord))
    }

    pub fn from_coordinate(chart: Chart, theta: f64, coord: f64) -> Result<Self> {
        if !(coord > 0.0 && coord < 1.0) {
            return Err(BykovError::DegenerateInput(format!(
                "section coordinate {coord} must lie in (0,1)"
            )));
        }
        Self::new(chart, theta, coord.ln())
    }

    pub(crate) fn from_log_dd(chart: Chart, theta: f64, log_coord: DoubleDouble) -> Result<Self> {
        check_log(log_coord)?;
        if !theta.is_finite() {
            return Err(BykovError::DegenerateInput(format!("angle {theta}")));
        }
        Ok(SectionPoint {
            chart,
            theta_lifted: theta,
            log_coord,
        })
    }

    pub fn theta(&self) -> f64 {
        reduce_angle(self.theta_lifted)
    }

    pub fn log_coord(&self) -> f64 {
        self.log_coord.to_f64()
    }

    pub fn log_coord_dd(&self) -> DoubleDouble {
        self.log_coord
    }

    /// `z` or `ρ`; underflows to 0 long before the log-coordinate does.
    pub fn coordinate(&self) -> f64 {
        self.log_coord().exp()
    }

    fn expect(&self, chart: Chart) -> Result<()> {
        if self.chart == chart {
            Ok(())
        } else {
            Err(BykovError::WrongChart {
                expected: chart,
                found: self.chart,
            })
        }
    }
}

fn check_log(l: DoubleDouble) -> Result<()> {
    if l.hi == f64::NEG_INFINITY {
        return Err(BykovError::DegenerateInput(
            "point lies on the invariant connection and never exits".into(),
        ));
    }
    if !l.is_finite() {
        return Err(BykovError::DegenerateInput(format!(
            "log-coordinate {}",
            l.hi
        )));
    }
    if l.hi >= 0.0 {
        return Err(BykovError::DegenerateInput(format!(
            "log-coordinate {} must be < 0 (point on or beyond the section boundary)",
            l.hi
        )));
    }
    Ok(())
}

/// An exit point together with the time spent getting there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Passage {
    pub exit: SectionPoint,
    pub duration: DoubleDouble,
    /// `ln(1 + S/x)`: log-correction added to the exit coordinate by the
    /// higher-order terms. Zero in the idealized model.
    pub log_correction: f64,
}

impl Passage {
    pub fn time(&self) -> f64 {
        self.duration.to_f64()
    }
}

/// Higher-order terms of one local map, as seen in log-space.
///
/// The family is `S_coord = c·x^(δ(1+ε))·cos θ` on the exit coordinate and
/// `S_angle = c·x^(δ(1+ε))·sin θ` on the exit angle, `x` being the entry
/// coordinate and `θ` the entry angle.
fn higher_order_terms(
    c: f64,
    spec: &PerturbationSpec,
    exponent: f64,
    log_entry: f64,
    theta: f64,
) -> Result<(f64, f64)> {
    if c == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ratio = c * (exponent * spec.eps * log_entry).exp() * theta.cos();
    if ratio <= -1.0 {
        return Err(BykovError::DegenerateInput(format!(
            "higher-order term swamps the leading term (ratio {ratio})"
        )));
    }
    let angle = c * (exponent * (1.0 + spec.eps) * log_entry).exp() * theta.sin();
    Ok((ratio.ln_1p(), angle))
}

/// Shared body of both local maps: entry log-coordinate `l`, exit
/// coordinate `exponent·l`, transit `-l/expansion`, angle advanced by
/// `-(omega/expansion)·l`.
#[allow(clippy::too_many_arguments)]
fn local_map(
    q: &SectionPoint,
    exit_chart: Chart,
    expansion: f64,
    omega: f64,
    exponent: DoubleDouble,
    c: f64,
    spec: Option<&PerturbationSpec>,
) -> Result<Passage> {
    check_log(q.log_coord)?;
    let l = q.log_coord;
    let duration = -l / expansion;
    let (log_correction, angle_correction) = match spec {
        Some(s) => higher_order_terms(c, s, exponent.to_f64(), l.to_f64(), q.theta())?,
        None => (0.0, 0.0),
    };
    let exit_log = exponent * l + log_correction;
    let theta = (DoubleDouble::from(q.theta_lifted) + duration * omega + angle_correction).to_f64();
    Ok(Passage {
        exit: SectionPoint::from_log_dd(exit_chart, theta, exit_log)?,
        duration,
        log_correction,
    })
}

/// Flow through `V1`: `In1` (height `z`) to `Out1` (radius `ρ' = z^δ1 + S1`)
/// after time `-ln z / E1`.
pub fn phi1(q: &SectionPoint, p: &SystemParams) -> Result<Passage> {
    q.expect(Chart::In1)?;
    let d = p.derived()?;
    phi1_with(q, p, &d)
}

pub(crate) fn phi1_with(
    q: &SectionPoint,
    p: &SystemParams,
    d: &DerivedConstants,
) -> Result<Passage> {
    let spec = p.active_perturbation();
    let c = spec.map_or(0.0, |s| s.c1);
    local_map(q, Chart::Out1, p.e1, p.omega1, d.delta1, c, spec)
}

/// Flow through `V2`: `In2` (radius `ρ`) to `Out2` (height `z' = ρ^δ2 + T2`)
/// after time `-ln ρ / E2`.
pub fn phi2(q: &SectionPoint, p: &SystemParams) -> Result<Passage> {
    q.expect(Chart::In2)?;
    let d = p.derived()?;
    phi2_with(q, p, &d)
}

pub(crate) fn phi2_with(
    q: &SectionPoint,
    p: &SystemParams,
    d: &DerivedConstants,
) -> Result<Passage> {
    let spec = p.active_perturbation();
    let c = spec.map_or(0.0, |s| s.c2);
    local_map(q, Chart::Out2, p.e2, p.omega2, d.delta2, c, spec)
}

/// Transition along the one-dimensional connection: the identity in these
/// coordinates, only the chart label changes.
pub fn psi12(q: &SectionPoint) -> Result<SectionPoint> {
    q.expect(Chart::Out1)?;
    Ok(SectionPoint {
        chart: Chart::In2,
        ..*q
    })
}

/// Transition along the two-dimensional connection, `(θ, z) ↦ (θ/a, a·z)`.
///
/// The angle divided is the section coordinate in `[0, 2π)`, so the
/// result's lifted angle lies in `[0, 2π/a)`.
pub fn psi21(q: &SectionPoint, p: &SystemParams) -> Result<SectionPoint> {
    q.expect(Chart::Out2)?;
    let log_a = p.log_a();
    SectionPoint::from_log_dd(Chart::In1, q.theta() / p.a, q.log_coord + log_a)
}

/// First return to `In1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Return {
    pub point: SectionPoint,
    pub return_time: DoubleDouble,
}

/// First-return map on `In1`.
///
/// Idealized model: `ln z' = ln a + δ·ln z`, angle
/// `((θ - K ln z) mod 2π) / a`, return time `-τ·ln z`. With higher-order
/// terms switched on the map is evaluated as the composition of the local
/// maps and transitions.
pub fn poincare(q: &SectionPoint, p: &SystemParams) -> Result<Return> {
    q.expect(Chart::In1)?;
    let d = p.derived()?;
    if p.active_perturbation().is_some() {
        let out1 = phi1_with(q, p, &d)?;
        let out2 = phi2_with(&psi12(&out1.exit)?, p, &d)?;
        return Ok(Return {
            point: psi21(&out2.exit, p)?,
            return_time: out1.duration + out2.duration,
        });
    }
    check_log(q.log_coord)?;
    let l = q.log_coord;
    let spun = (DoubleDouble::from(q.theta_lifted) - d.k * l).to_f64();
    let theta = reduce_angle(spun) / p.a;
    let log_z = d.delta * l + d.log_a;
    Ok(Return {
        point: SectionPoint::from_log_dd(Chart::In1, theta, log_z)?,
        return_time: -(d.tau * l),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cylinder {
    V1,
    V2,
}

/// State inside one of the linearizing cylinders, in log-coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowState {
    pub cylinder: Cylinder,
    pub rho_log: f64,
    pub z_log: f64,
    pub theta_lifted: f64,
}

impl FlowState {
    /// State just after crossing an entry section (`In1` or `In2`).
    pub fn entering(q: &SectionPoint) -> Result<Self> {
        let l = q.log_coord();
        match q.chart {
            Chart::In1 => Ok(FlowState {
                cylinder: Cylinder::V1,
                rho_log: 0.0,
                z_log: l,
                theta_lifted: q.theta_lifted,
            }),
            Chart::In2 => Ok(FlowState {
                cylinder: Cylinder::V2,
                rho_log: l,
                z_log: 0.0,
                theta_lifted: q.theta_lifted,
            }),
            other => Err(BykovError::WrongChart {
                expected: Chart::In1,
                found: other,
            }),
        }
    }

    /// Time left before the state reaches the exit section of its cylinder.
    pub fn time_to_exit(&self, p: &SystemParams) -> f64 {
        match self.cylinder {
            Cylinder::V1 => -self.z_log / p.e1,
            Cylinder::V2 => -self.rho_log / p.e2,
        }
    }
}

/// Linear flow inside the current cylinder after time `t`.
pub fn flow_at(t: f64, s: &FlowState, p: &SystemParams) -> Result<FlowState> {
    let exit = s.time_to_exit(p);
    // a few ulps of slack so the exact exit time is accepted
    let slack = 4.0 * f64::EPSILON * exit.abs().max(1.0);
    if !(t >= 0.0 && t <= exit + slack) {
        return Err(BykovError::OutOfSojourn { t, exit });
    }
    let next = match s.cylinder {
        Cylinder::V1 => FlowState {
            rho_log: s.rho_log - p.c1 * t,
            z_log: s.z_log + p.e1 * t,
            theta_lifted: s.theta_lifted + p.omega1 * t,
            ..*s
        },
        Cylinder::V2 => FlowState {
            rho_log: s.rho_log + p.e2 * t,
            z_log: s.z_log - p.c2 * t,
            theta_lifted: s.theta_lifted + p.omega2 * t,
            ..*s
        },
    };
    Ok(next)
}

//! Quasi-static 2D Stokes flow through a vessel carrying a rigid circular
//! robot, by a direct boundary-integral method.
//!
//! Walls are no-slip, the inlet carries a parabolic profile, and outlets
//! have zero normal traction with no tangential velocity. The robot is
//! force- and torque-free; its rigid motion is solved together with the
//! surface tractions.

mod kernel;
mod operator;

use std::io::Write;

use thiserror::Error;

use crate::geometry::{GeometryError, Vec2};

pub use operator::{solve_mobility, FlowField, FlowProblem, MobilitySolution, SolverOptions, VesselOperator};

/// Robots closer than this fraction of their radius to a wall are refused.
pub const MIN_GAP_FRACTION: f64 = 0.05;

/// Sensors on the robot surface.
pub const DEFAULT_SENSORS: usize = 36;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("robot too close to the boundary: gap {gap:.4} µm < {min:.4} µm")]
    GapTooSmall { gap: f64, min: f64 },
    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("point ({x}, {y}) is not in the fluid")]
    OutsideFluid { x: f64, y: f64 },
    #[error("invalid flow problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Rigid motion of the robot: µm/s and rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidMotion {
    pub velocity: Vec2,
    pub angular_velocity: f64,
}

impl RigidMotion {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// Surface stress sampled at uniformly spaced sensors. `angles` are in the
/// robot frame (from the front marker); `stress` vectors are world-frame
/// fluid force per area on the robot, in Pa.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionField {
    pub angles: Vec<f64>,
    pub stress: Vec<Vec2>,
    pub orientation: f64,
    pub radius: f64,
}

impl TractionField {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Outward normal and counterclockwise tangential components per sensor.
    pub fn normal_tangential(&self) -> Vec<(f64, f64)> {
        self.angles
            .iter()
            .zip(&self.stress)
            .map(|(&theta, s)| {
                let phi = self.orientation + theta;
                let (sin, cos) = phi.sin_cos();
                (s.x * cos + s.y * sin, -s.x * sin + s.y * cos)
            })
            .collect()
    }

    /// Net force per unit depth by the trapezoid rule over the sensors.
    pub fn net_force(&self) -> Vec2 {
        let ds = self.radius * std::f64::consts::TAU / self.len() as f64;
        self.stress.iter().sum::<Vec2>() * ds
    }

    /// Net torque about the robot center, trapezoid rule.
    pub fn net_torque(&self) -> f64 {
        let ds = self.radius * std::f64::consts::TAU / self.len() as f64;
        self.angles
            .iter()
            .zip(&self.stress)
            .map(|(&theta, s)| {
                let (sin, cos) = (self.orientation + theta).sin_cos();
                self.radius * (cos * s.y - sin * s.x)
            })
            .sum::<f64>()
            * ds
    }

    /// Root-mean-square stress magnitude.
    pub fn rms(&self) -> f64 {
        (self.stress.iter().map(|s| s.norm_squared()).sum::<f64>() / self.len() as f64).sqrt()
    }
}

/// Parabolic inlet speed at transverse offset `y` from the inlet centerline.
pub fn inlet_profile(y: f64, u_max: f64, d: f64) -> Result<f64, FlowError> {
    if !(d > 0.0) {
        return Err(FlowError::InvalidProblem(format!("diameter {d} must be positive")));
    }
    if y.abs() > 0.5 * d * (1.0 + 1e-12) {
        return Err(FlowError::InvalidProblem(format!(
            "offset {y} lies outside the inlet of diameter {d}"
        )));
    }
    let q = 2.0 * y / d;
    Ok(u_max * (1.0 - q * q).max(0.0))
}

/// Largest stress magnitude over the sensors, in Pa.
pub fn max_surface_stress(traction: &TractionField) -> f64 {
    traction.stress.iter().map(|s| s.norm()).fold(0.0, f64::max)
}

/// Writes `x,y,ux,uy,speed` rows for a regular grid; points outside the
/// fluid are skipped.
pub fn write_velocity_grid<W: Write>(
    out: &mut W,
    field: &FlowField,
    lower: Vec2,
    upper: Vec2,
    step: f64,
) -> std::io::Result<usize> {
    writeln!(out, "# format_version=1")?;
    writeln!(out, "x_um,y_um,ux_um_s,uy_um_s,speed_um_s")?;
    let nx = ((upper.x - lower.x) / step).floor() as usize + 1;
    let ny = ((upper.y - lower.y) / step).floor() as usize + 1;
    let mut rows = 0;
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(lower.x + i as f64 * step, lower.y + j as f64 * step);
            if let Ok(u) = field.velocity_at(p) {
                writeln!(out, "{},{},{},{},{}", p.x, p.y, u.x, u.y, u.norm())?;
                rows += 1;
            }
        }
    }
    Ok(rows)
}

//! Planar vessel geometry: straight, curved and Y-branch segments, their
//! boundary meshes, and robot placement queries.
//!
//! Lengths are in µm throughout. Vessel records carry angles in degrees;
//! everything built from them works in radians.

mod build;
mod mesh;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{build_geometry, build_geometry_with, GeometryOptions};
pub use mesh::{
    discretize, discretize_graded, wall_gap, Arm, ArmPosition, BcTag, BoundaryMesh, Edge, EdgeShape, Element,
};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Boundary resolution for flow solves: fine walls where the robot travels,
/// coarse spans and walls near the vessel ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub h_fine: f64,
    pub h_coarse: f64,
    /// Walls closer than this to an inlet or outlet span use `h_coarse`.
    pub end_zone: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            h_fine: 0.25,
            h_coarse: 0.5,
            end_zone: 6.0,
        }
    }
}

impl MeshOptions {
    /// Uniform resolution `h` everywhere.
    pub fn uniform(h: f64) -> Self {
        Self {
            h_fine: h,
            h_coarse: h,
            end_zone: 0.0,
        }
    }

    pub fn refined(&self, factor: f64) -> Self {
        Self {
            h_fine: self.h_fine / factor,
            h_coarse: self.h_coarse / factor,
            end_zone: self.end_zone,
        }
    }
}

/// Builds and discretizes a vessel in one step.
pub fn vessel_mesh(
    spec: &VesselSpec,
    geometry: &GeometryOptions,
    mesh: &MeshOptions,
) -> Result<BoundaryMesh, GeometryError> {
    let outline = build_geometry_with(spec, geometry)?;
    discretize_graded(&outline, mesh.h_fine, mesh.h_coarse, mesh.end_zone)
}

/// Relative tolerance on Murray's law for branch records.
pub const MURRAY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("missing parameter {0} for this vessel variant")]
    MissingParameter(&'static str),
    #[error("vessel geometry self-intersects ({0})")]
    SelfIntersecting(String),
    #[error("mesh size h = {h} exceeds the shortest geometric feature ({shortest})")]
    ResolutionTooCoarse { h: f64, shortest: f64 },
    #[error("point ({x}, {y}) lies outside the vessel")]
    OutsideDomain { x: f64, y: f64 },
}

/// Newtonian fluid properties in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// kg/m³
    pub density: f64,
    /// Pa·s
    pub viscosity: f64,
}

impl FluidParams {
    pub fn new(density: f64, viscosity: f64) -> Result<Self, GeometryError> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "density",
                value: density,
                reason: "must be positive",
            });
        }
        if !(viscosity > 0.0) || !viscosity.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "viscosity",
                value: viscosity,
                reason: "must be positive",
            });
        }
        Ok(Self { density, viscosity })
    }

    /// Water-like plasma: 10³ kg/m³, 10⁻³ Pa·s.
    pub fn water() -> Self {
        Self {
            density: 1e3,
            viscosity: 1e-3,
        }
    }

    /// m²/s
    pub fn kinematic_viscosity(&self) -> f64 {
        self.viscosity / self.density
    }

    /// Reynolds number for a peak speed in µm/s and a diameter in µm.
    pub fn reynolds(&self, u_max_um_s: f64, d_um: f64) -> f64 {
        (u_max_um_s * 1e-6).abs() * (d_um * 1e-6) / self.kinematic_viscosity()
    }
}

impl Default for FluidParams {
    fn default() -> Self {
        Self::water()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VesselKind {
    Straight,
    Curve,
    Branch,
}

/// Parametric vessel record. Angles in degrees, lengths in µm.
///
/// Absent parameters serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselSpec {
    pub variant: VesselKind,
    /// Inlet (main vessel) diameter.
    pub d: f64,
    #[serde(default)]
    pub d1: Option<f64>,
    #[serde(default)]
    pub d2: Option<f64>,
    #[serde(default)]
    pub bend_deg: Option<f64>,
    #[serde(default)]
    pub alpha1_deg: Option<f64>,
    #[serde(default)]
    pub alpha2_deg: Option<f64>,
    pub arm_um: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub const DEFAULT_ARM_UM: f64 = 30.0;
const DIAMETER_RANGE: (f64, f64) = (5.0, 13.0);
const ANGLE_RANGE: (f64, f64) = (25.0, 75.0);

impl VesselSpec {
    pub fn straight(d: f64, arm_um: f64) -> Self {
        Self {
            variant: VesselKind::Straight,
            d,
            d1: None,
            d2: None,
            bend_deg: None,
            alpha1_deg: None,
            alpha2_deg: None,
            arm_um,
            seed: None,
        }
    }

    pub fn curve(d: f64, bend_deg: f64, arm_um: f64) -> Self {
        Self {
            variant: VesselKind::Curve,
            bend_deg: Some(bend_deg),
            ..Self::straight(d, arm_um)
        }
    }

    /// Branch with the main diameter fixed by Murray's law.
    pub fn branch(d1: f64, d2: f64, alpha1_deg: f64, alpha2_deg: f64, arm_um: f64) -> Self {
        let d = (d1.powi(3) + d2.powi(3)).cbrt();
        Self {
            variant: VesselKind::Branch,
            d,
            d1: Some(d1),
            d2: Some(d2),
            bend_deg: None,
            alpha1_deg: Some(alpha1_deg),
            alpha2_deg: Some(alpha2_deg),
            arm_um,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_diameter("d", self.d)?;
        if !(self.arm_um > 0.0) || !self.arm_um.is_finite() {
            return Err(GeometryError::InvalidParameter {
                name: "arm_um",
                value: self.arm_um,
                reason: "must be positive",
            });
        }
        match self.variant {
            VesselKind::Straight => Ok(()),
            VesselKind::Curve => {
                let bend = self.bend_deg.ok_or(GeometryError::MissingParameter("bend_deg"))?;
                check_angle("bend_deg", bend, ANGLE_RANGE.0, ANGLE_RANGE.1)
            }
            VesselKind::Branch => {
                let d1 = self.d1.ok_or(GeometryError::MissingParameter("d1"))?;
                let d2 = self.d2.ok_or(GeometryError::MissingParameter("d2"))?;
                check_diameter("d1", d1)?;
                check_diameter("d2", d2)?;
                let murray = d1.powi(3) + d2.powi(3);
                if ((self.d.powi(3) - murray) / murray).abs() > MURRAY_TOLERANCE {
                    return Err(GeometryError::InvalidParameter {
                        name: "d",
                        value: self.d,
                        reason: "violates Murray's law d³ = d1³ + d2³",
                    });
                }
                let a1 = self.alpha1_deg.ok_or(GeometryError::MissingParameter("alpha1_deg"))?;
                let a2 = self.alpha2_deg.ok_or(GeometryError::MissingParameter("alpha2_deg"))?;
                check_angle("alpha1_deg", a1, ANGLE_RANGE.0, ANGLE_RANGE.1)?;
                check_angle("alpha2_deg", a2, -ANGLE_RANGE.1, -ANGLE_RANGE.0)
            }
        }
    }

    /// Diameters of the vessel's outlets.
    pub fn outlet_diameters(&self) -> Vec<f64> {
        match self.variant {
            VesselKind::Branch => vec![self.d1.unwrap_or(0.0), self.d2.unwrap_or(0.0)],
            _ => vec![self.d],
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("vessel record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

fn check_diameter(name: &'static str, v: f64) -> Result<(), GeometryError> {
    if !(DIAMETER_RANGE.0..=DIAMETER_RANGE.1).contains(&v) {
        return Err(GeometryError::InvalidParameter {
            name,
            value: v,
            reason: "diameter outside [5, 13] µm",
        });
    }
    Ok(())
}

fn check_angle(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<(), GeometryError> {
    if !(lo..=hi).contains(&v) {
        return Err(GeometryError::InvalidParameter {
            name,
            value: v,
            reason: "angle outside its admissible range",
        });
    }
    Ok(())
}

/// Circular robot pose. `orientation` is the world-frame angle of the
/// robot's "front" marker, from which surface angles are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub center: Vec2,
    pub orientation: f64,
    pub radius: f64,
}

impl RobotState {
    pub const DEFAULT_RADIUS: f64 = 1.0;

    pub fn new(x: f64, y: f64, orientation: f64) -> Self {
        Self {
            center: Vec2::new(x, y),
            orientation,
            radius: Self::DEFAULT_RADIUS,
        }
    }
}

/// Parent diameter from Murray's law, d³ = d1³ + d2³.
pub fn murray_main_diameter(d1: f64, d2: f64) -> Result<f64, GeometryError> {
    if !(d1 > 0.0) || !d1.is_finite() {
        return Err(GeometryError::InvalidParameter {
            name: "d1",
            value: d1,
            reason: "must be positive",
        });
    }
    if !(d2 >= 0.0) || !d2.is_finite() {
        return Err(GeometryError::InvalidParameter {
            name: "d2",
            value: d2,
            reason: "must be non-negative",
        });
    }
    Ok((d1.powi(3) + d2.powi(3)).cbrt())
}

//! The two worked scenarios: a symmetric branch and a left-turning curve,
//! both with 7.8 µm inlets, each with a reference robot pose.

use crate::geometry::{RobotState, Vec2, VesselSpec, DEFAULT_ARM_UM};
use crate::path::ScenarioSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoCase {
    pub name: &'static str,
    pub vessel: VesselSpec,
    /// Peak inlet speed, µm/s.
    pub u_max: f64,
    /// Pose where motion and stresses are reported.
    pub pose: RobotState,
    /// Published speed at that pose, µm/s.
    pub reference_speed: f64,
    /// Published angular velocity at that pose, rad/s.
    pub reference_angular_velocity: f64,
    /// Start of the simulated path through the vessel.
    pub scenario: ScenarioSpec,
}

/// Largest published stress over both reference poses, Pa.
pub const REFERENCE_MAX_STRESS: f64 = 0.58;
/// Published correlation between the two reference stress patterns.
pub const REFERENCE_CORRELATION: f64 = 0.98;

/// Branch first, curve second. The poses minimize the relative mismatch
/// with the published speed and angular velocity over a 0.12 µm grid of
/// the junction and bend regions.
pub fn demo_cases() -> [DemoCase; 2] {
    let branch = VesselSpec::branch(6.2, 6.2, 50.0, -50.0, DEFAULT_ARM_UM);
    let curve = VesselSpec::curve(7.8, 50.0, DEFAULT_ARM_UM);
    [
        DemoCase {
            name: "branch",
            scenario: ScenarioSpec::new(branch.clone(), 1000.0, 0.5, 0.0),
            vessel: branch,
            u_max: 1000.0,
            pose: RobotState {
                center: Vec2::new(34.8, 0.6),
                orientation: 0.0,
                radius: RobotState::DEFAULT_RADIUS,
            },
            reference_speed: 189.0,
            reference_angular_velocity: -34.0,
        },
        DemoCase {
            name: "curve",
            scenario: ScenarioSpec::new(curve.clone(), 530.0, 2.0, 0.0),
            vessel: curve,
            u_max: 530.0,
            pose: RobotState {
                center: Vec2::new(30.04, 2.8),
                orientation: 0.0,
                radius: RobotState::DEFAULT_RADIUS,
            },
            reference_speed: 186.0,
            reference_angular_velocity: 39.0,
        },
    ]
}

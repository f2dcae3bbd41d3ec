//! Quasi-static robot trajectories through a vessel, randomized scenarios
//! and path corpora.

mod corpus;
mod io;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{encode_pattern, StressPattern};
use crate::geometry::{
    vessel_mesh, BoundaryMesh, FluidParams, GeometryError, GeometryOptions, MeshOptions, RobotState, Vec2, VesselKind,
    VesselSpec, DEFAULT_ARM_UM,
};
use crate::stokes::{FlowError, MobilitySolution, RigidMotion, SolverOptions, TractionField, VesselOperator};

pub use corpus::{generate_corpus, Corpus, CorpusConfig, CorpusEntry, Manifest, Split, MANIFEST_FORMAT_VERSION};
pub use io::PATH_FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("malformed path data: {0}")]
    Format(String),
    #[error("corpus generation failed: {failures} of {attempts} paths hit solver failures")]
    Corpus { failures: usize, attempts: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathLabel {
    Branch,
    Curve,
    Straight,
}

impl From<VesselKind> for PathLabel {
    fn from(k: VesselKind) -> Self {
        match k {
            VesselKind::Branch => PathLabel::Branch,
            VesselKind::Curve => PathLabel::Curve,
            VesselKind::Straight => PathLabel::Straight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalReason {
    ReachedOutlet,
    StepLimit,
    SolverFailure,
}

/// Everything needed to reproduce one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub vessel: VesselSpec,
    /// Peak inlet speed, µm/s.
    pub u_max: f64,
    /// Transverse offset of the start from the inlet axis, µm.
    pub initial_y_c: f64,
    pub initial_orientation: f64,
    pub seed: u64,
    pub direction: Direction,
}

/// Distance of the starting center from the inlet, µm.
pub const START_DISTANCE_UM: f64 = 8.0;
/// Smallest initial gap to the wall, in robot radii.
pub const START_GAP_FRACTION: f64 = 0.2;

impl ScenarioSpec {
    pub fn new(vessel: VesselSpec, u_max: f64, initial_y_c: f64, initial_orientation: f64) -> Self {
        Self {
            vessel,
            u_max,
            initial_y_c,
            initial_orientation,
            seed: 0,
            direction: Direction::Forward,
        }
    }

    pub fn label(&self) -> PathLabel {
        self.vessel.variant.into()
    }

    /// Starting pose in a built vessel.
    pub fn start_pose(&self, mesh: &BoundaryMesh) -> RobotState {
        let arm = &mesh.arms[0];
        let left = Vec2::new(-arm.axis.y, arm.axis.x);
        let c = arm.start + arm.axis * START_DISTANCE_UM + left * self.initial_y_c;
        RobotState::new(c.x, c.y, self.initial_orientation)
    }

    pub fn validate(&self) -> Result<(), PathError> {
        self.vessel.validate()?;
        if !self.u_max.is_finite() || self.u_max <= 0.0 {
            return Err(PathError::InvalidScenario(format!(
                "u_max {} must be positive",
                self.u_max
            )));
        }
        let limit = 0.5 * self.vessel.d - (1.0 + START_GAP_FRACTION) * RobotState::DEFAULT_RADIUS;
        if !(self.initial_y_c.abs() <= limit + 1e-12) {
            return Err(PathError::InvalidScenario(format!(
                "initial offset {} leaves less than {START_GAP_FRACTION} radii to the wall",
                self.initial_y_c
            )));
        }
        if !self.initial_orientation.is_finite() {
            return Err(PathError::InvalidScenario("orientation must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Branch,
    Curve,
}

pub const U_MAX_RANGE: (f64, f64) = (800.0, 1000.0);
pub const BRANCH_DIAMETER_RANGE: (f64, f64) = (6.0, 10.0);
pub const CURVE_DIAMETER_RANGE: (f64, f64) = (6.0, 13.0);
pub const ANGLE_RANGE_DEG: (f64, f64) = (25.0, 75.0);

/// Draws a random scenario. Vessels that cannot be built are redrawn from
/// the same stream, so the result depends on the seed alone.
pub fn draw_scenario(kind: ScenarioKind, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let vessel = match kind {
            ScenarioKind::Branch => {
                let d1 = rng.random_range(BRANCH_DIAMETER_RANGE.0..=BRANCH_DIAMETER_RANGE.1);
                let d2 = rng.random_range(BRANCH_DIAMETER_RANGE.0..=BRANCH_DIAMETER_RANGE.1);
                let a1 = rng.random_range(ANGLE_RANGE_DEG.0..=ANGLE_RANGE_DEG.1);
                let a2 = -rng.random_range(ANGLE_RANGE_DEG.0..=ANGLE_RANGE_DEG.1);
                VesselSpec::branch(d1, d2, a1, a2, DEFAULT_ARM_UM)
            }
            ScenarioKind::Curve => {
                let d = rng.random_range(CURVE_DIAMETER_RANGE.0..=CURVE_DIAMETER_RANGE.1);
                let bend = rng.random_range(ANGLE_RANGE_DEG.0..=ANGLE_RANGE_DEG.1);
                VesselSpec::curve(d, bend, DEFAULT_ARM_UM)
            }
        }
        .with_seed(seed);
        let u_max = rng.random_range(U_MAX_RANGE.0..=U_MAX_RANGE.1);
        let limit = 0.5 * vessel.d - (1.0 + START_GAP_FRACTION) * RobotState::DEFAULT_RADIUS;
        let y_c = rng.random_range(-limit..=limit);
        let orientation = rng.random_range(0.0..TAU);
        if crate::geometry::build_geometry(&vessel).is_ok() {
            return ScenarioSpec {
                vessel,
                u_max,
                initial_y_c: y_c,
                initial_orientation: orientation,
                seed,
                direction: Direction::Forward,
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedSample {
    /// ms from the start of the path.
    pub t: f64,
    pub robot: RobotState,
    pub motion: RigidMotion,
    pub pattern: StressPattern,
    /// Set when the step ending here was shortened by wall contact.
    pub contact: bool,
    pub raw_traction: Option<TractionField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub scenario: ScenarioSpec,
    pub label: PathLabel,
    pub terminal_reason: TerminalReason,
    /// Sampling interval, ms.
    pub sample_ms: f64,
    pub samples: Vec<TimedSample>,
}

impl PathRecord {
    pub fn direction(&self) -> Direction {
        self.scenario.direction
    }

    pub fn duration_ms(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Cumulative distance travelled by the center up to each sample.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.samples.len());
        let mut acc = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                acc += (s.robot.center - self.samples[i - 1].robot.center).norm();
            }
            out.push(acc);
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.arc_lengths().last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// Integration step, ms.
    pub dt_ms: f64,
    /// Sampling interval, ms; a multiple of `dt_ms`.
    pub sample_ms: f64,
    pub max_time_ms: f64,
    /// The path ends once the center is this close to an outlet, µm.
    pub outlet_stop_um: f64,
    pub mesh: MeshOptions,
    pub geometry: GeometryOptions,
    pub solver: SolverOptions,
    pub fluid: FluidParams,
    pub keep_traction: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            dt_ms: 0.5,
            sample_ms: 1.0,
            max_time_ms: 600.0,
            outlet_stop_um: 8.0,
            mesh: MeshOptions::default(),
            geometry: GeometryOptions::default(),
            solver: SolverOptions::default(),
            fluid: FluidParams::water(),
            keep_traction: false,
        }
    }
}

impl PathOptions {
    fn steps_per_sample(&self) -> Result<usize, PathError> {
        if !(self.dt_ms > 0.0 && self.dt_ms <= 2.0) {
            return Err(PathError::InvalidScenario(format!(
                "dt {} ms outside (0, 2]",
                self.dt_ms
            )));
        }
        let ratio = self.sample_ms / self.dt_ms;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 {
            return Err(PathError::InvalidScenario(format!(
                "sampling interval {} ms is not a multiple of dt {} ms",
                self.sample_ms, self.dt_ms
            )));
        }
        Ok(n as usize)
    }

    pub fn operator(&self, vessel: &VesselSpec) -> Result<VesselOperator, PathError> {
        let mesh = vessel_mesh(vessel, &self.geometry, &self.mesh)?;
        Ok(VesselOperator::new(&mesh, self.solver)?)
    }
}

/// Builds the vessel and integrates the path.
pub fn simulate_path(spec: &ScenarioSpec, options: &PathOptions) -> Result<PathRecord, PathError> {
    spec.validate()?;
    let op = options.operator(&spec.vessel)?;
    simulate_with(spec, &op, options)
}

/// Integrates a path in an already built vessel operator.
///
/// Each step is a Heun (explicit trapezoid) step on center and orientation.
/// Poses that come closer than the minimum gap are pushed back out along
/// the nearest-boundary normal. Solver failures end the record early.
pub fn simulate_with(spec: &ScenarioSpec, op: &VesselOperator, options: &PathOptions) -> Result<PathRecord, PathError> {
    let per_sample = options.steps_per_sample()?;
    let mesh = op.mesh();
    let dt = options.dt_ms * 1e-3;
    let hold = crate::stokes::MIN_GAP_FRACTION * RobotState::DEFAULT_RADIUS * (1.0 + 1e-6);
    let max_samples = (options.max_time_ms / options.sample_ms).floor() as usize;
    let solve = |r: &RobotState| op.solve(r, &options.fluid, spec.u_max);

    let mut record = PathRecord {
        scenario: spec.clone(),
        label: spec.label(),
        terminal_reason: TerminalReason::StepLimit,
        sample_ms: options.sample_ms,
        samples: Vec::new(),
    };
    let mut pose = spec.start_pose(mesh);
    let mut contact = false;
    for k in 0..=max_samples {
        let Ok(sol) = solve(&pose) else {
            record.terminal_reason = TerminalReason::SolverFailure;
            return Ok(record);
        };
        let Ok(pattern) = encode_pattern(&sol.traction) else {
            record.terminal_reason = TerminalReason::SolverFailure;
            return Ok(record);
        };
        record.samples.push(TimedSample {
            t: k as f64 * options.sample_ms,
            robot: pose,
            motion: sol.motion,
            pattern,
            contact,
            raw_traction: options.keep_traction.then(|| sol.traction.clone()),
        });
        if mesh.nearest_outlet(pose.center).1 <= options.outlet_stop_um {
            record.terminal_reason = TerminalReason::ReachedOutlet;
            return Ok(record);
        }
        if k == max_samples {
            break;
        }
        contact = false;
        let mut first = Some(sol);
        for _ in 0..per_sample {
            let s0 = match first.take() {
                Some(s) => s,
                None => match solve(&pose) {
                    Ok(s) => s,
                    Err(_) => {
                        record.terminal_reason = TerminalReason::SolverFailure;
                        return Ok(record);
                    }
                },
            };
            match heun_step(&pose, &s0, dt, mesh, hold, &solve) {
                Some((next, touched)) => {
                    pose = next;
                    contact |= touched;
                }
                None => {
                    record.terminal_reason = TerminalReason::SolverFailure;
                    return Ok(record);
                }
            }
        }
    }
    Ok(record)
}

fn advance(pose: &RobotState, m: &RigidMotion, dt: f64) -> RobotState {
    RobotState {
        center: pose.center + m.velocity * dt,
        orientation: pose.orientation + m.angular_velocity * dt,
        radius: pose.radius,
    }
}

fn heun_step(
    pose: &RobotState,
    s0: &MobilitySolution,
    dt: f64,
    mesh: &BoundaryMesh,
    hold: f64,
    solve: &impl Fn(&RobotState) -> Result<MobilitySolution, FlowError>,
) -> Option<(RobotState, bool)> {
    let (mid, c1) = keep_clear(advance(pose, &s0.motion, dt), mesh, hold)?;
    let s1 = solve(&mid).ok()?;
    let avg = RigidMotion {
        velocity: (s0.motion.velocity + s1.motion.velocity) * 0.5,
        angular_velocity: 0.5 * (s0.motion.angular_velocity + s1.motion.angular_velocity),
    };
    let (next, c2) = keep_clear(advance(pose, &avg, dt), mesh, hold)?;
    let next = split_tie(next, mesh);
    Some((next, c1 || c2))
}

/// Nearest point on any boundary element.
fn nearest_boundary(mesh: &BoundaryMesh, p: Vec2) -> (Vec2, f64) {
    let mut best = (p, f64::INFINITY);
    for e in &mesh.elements {
        let ab = e.b - e.a;
        let t = ((p - e.a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        let q = e.a + ab * t;
        let d = (p - q).norm();
        if d < best.1 {
            best = (q, d);
        }
    }
    best
}

/// Pushes a pose whose gap fell below `hold` back to exactly `hold`.
fn keep_clear(pose: RobotState, mesh: &BoundaryMesh, hold: f64) -> Option<(RobotState, bool)> {
    let inside = mesh.contains(pose.center);
    let (q, d) = nearest_boundary(mesh, pose.center);
    if inside && d - pose.radius >= hold {
        return Some((pose, false));
    }
    if d == 0.0 {
        return None;
    }
    let mut n = (pose.center - q) / d;
    if !inside {
        n = -n;
    }
    let moved = RobotState {
        center: q + n * (pose.radius + hold),
        ..pose
    };
    let (_, d2) = nearest_boundary(mesh, moved.center);
    (mesh.contains(moved.center) && d2 - moved.radius >= hold * (1.0 - 1e-9)).then_some((moved, true))
}

const TIE_UM: f64 = 1e-3;

/// A robot sitting on the dividing streamline in front of the apex is
/// nudged toward branch 1.
fn split_tie(pose: RobotState, mesh: &BoundaryMesh) -> RobotState {
    let (Some(apex), [_, a1, a2, ..]) = (mesh.apex, mesh.arms.as_slice()) else {
        return pose;
    };
    let bisector = (a1.axis + a2.axis).normalize();
    let toward_one = {
        let left = Vec2::new(-bisector.y, bisector.x);
        if left.dot(&a1.axis) >= 0.0 {
            left
        } else {
            -left
        }
    };
    let rel = pose.center - apex;
    if rel.norm() < pose.radius + 1.0 && rel.dot(&toward_one).abs() < TIE_UM {
        return RobotState {
            center: pose.center + toward_one * TIE_UM,
            ..pose
        };
    }
    pose
}

/// The same measurements in reverse time order, as seen by a robot moving
/// the other way through the vessel. Patterns are kept as recorded;
/// velocities change sign.
pub fn reverse_measurements(path: &PathRecord) -> PathRecord {
    let end = path.duration_ms();
    let samples = path
        .samples
        .iter()
        .rev()
        .map(|s| TimedSample {
            t: end - s.t,
            motion: RigidMotion {
                velocity: -s.motion.velocity,
                angular_velocity: -s.motion.angular_velocity,
            },
            ..s.clone()
        })
        .collect();
    let mut scenario = path.scenario.clone();
    scenario.direction = scenario.direction.flipped();
    PathRecord {
        scenario,
        label: path.label,
        terminal_reason: path.terminal_reason,
        sample_ms: path.sample_ms,
        samples,
    }
}

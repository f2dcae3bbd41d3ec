use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use super::kernel::{dl_segment, sl_segment, ArcElement, Mat2};
use super::{FlowError, RigidMotion, TractionField, DEFAULT_SENSORS, MIN_GAP_FRACTION};
use crate::geometry::{BcTag, BoundaryMesh, Element, FluidParams, RobotState, Vec2};

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Uniform arc elements on the robot surface before refinement.
    pub robot_elements: usize,
    pub sensors: usize,
    /// Robot arcs longer than this multiple of their distance to the
    /// nearest boundary element are bisected.
    pub refine_ratio: f64,
    pub max_refine_depth: u32,
    /// Largest accepted 1-norm condition estimate.
    pub max_condition: f64,
    /// Skip the u_max and Reynolds range checks.
    pub unchecked: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            robot_elements: 36,
            sensors: DEFAULT_SENSORS,
            refine_ratio: 0.5,
            max_refine_depth: 5,
            max_condition: 1e12,
            unchecked: false,
        }
    }
}

/// One mobility problem: vessel, robot pose, fluid and peak inlet speed
/// (µm/s; negative values reverse the flow).
#[derive(Debug, Clone, Copy)]
pub struct FlowProblem<'a> {
    pub mesh: &'a BoundaryMesh,
    pub robot: RobotState,
    pub fluid: FluidParams,
    pub u_max: f64,
}

impl FlowProblem<'_> {
    pub fn validate(&self) -> Result<(), FlowError> {
        check_flow(&self.fluid, self.u_max, self.mesh.inlet_diameter)
    }
}

fn check_flow(fluid: &FluidParams, u_max: f64, d: f64) -> Result<(), FlowError> {
    if !(fluid.density > 0.0 && fluid.viscosity > 0.0) {
        return Err(FlowError::InvalidProblem("fluid properties must be positive".into()));
    }
    if !(200.0..=2000.0).contains(&u_max.abs()) {
        return Err(FlowError::InvalidProblem(format!(
            "|u_max| = {} µm/s outside [200, 2000]",
            u_max.abs()
        )));
    }
    let re = fluid.reynolds(u_max, d);
    if re >= 0.04 {
        return Err(FlowError::InvalidProblem(format!(
            "Reynolds number {re:.4} is not below 0.04"
        )));
    }
    Ok(())
}

/// Solves a single problem from scratch. For many poses in one vessel,
/// build a [`VesselOperator`] once and call [`VesselOperator::solve`].
pub fn solve_mobility(problem: &FlowProblem) -> Result<(RigidMotion, TractionField), FlowError> {
    let op = VesselOperator::new(problem.mesh, SolverOptions::default())?;
    let sol = op.solve(&problem.robot, &problem.fluid, problem.u_max)?;
    Ok((sol.motion, sol.traction))
}

/// Vessel boundary operator with the wall block factored once; each robot
/// pose then costs a Schur-complement solve in the robot unknowns.
///
/// Unknowns per boundary element: traction/viscosity (walls, inlet), or
/// tangential traction/viscosity and outflow speed (outlets).
#[derive(Debug, Clone)]
pub struct VesselOperator {
    mesh: BoundaryMesh,
    options: SolverOptions,
    /// Inlet speed at each element midpoint for unit peak speed.
    inlet_speed: Vec<f64>,
    ainv: DMatrix<f64>,
    /// Boundary unknowns of the robot-free vessel at unit peak speed.
    base: DVector<f64>,
    condition: f64,
}

#[derive(Debug, Clone)]
pub struct MobilitySolution {
    pub robot: RobotState,
    pub u_max: f64,
    pub viscosity: f64,
    pub motion: RigidMotion,
    pub traction: TractionField,
    /// Traction on every robot element, Pa.
    pub element_traction: Vec<Vec2>,
    /// Condition estimate of the robot system.
    pub condition: f64,
    arcs: Vec<ArcElement>,
    robot_unknowns: DVector<f64>,
}

impl VesselOperator {
    pub fn new(mesh: &BoundaryMesh, options: SolverOptions) -> Result<Self, FlowError> {
        if options.sensors < 16 || !options.sensors.is_multiple_of(2) {
            return Err(FlowError::InvalidProblem(format!(
                "sensor count {} must be even and at least 16",
                options.sensors
            )));
        }
        if options.robot_elements < 8 {
            return Err(FlowError::InvalidProblem(format!(
                "{} robot elements are too few",
                options.robot_elements
            )));
        }
        if !(options.refine_ratio >= 0.0) {
            return Err(FlowError::InvalidProblem("refine ratio must be non-negative".into()));
        }
        let els = &mesh.elements;
        let (span_a, span_b) = mesh.inlet_span();
        let inlet_d = (span_b - span_a).norm();
        let inlet_mid = (span_a + span_b) * 0.5;
        let inlet_speed: Vec<f64> = els
            .iter()
            .map(|e| {
                if e.tag == BcTag::Inlet {
                    let y = (e.midpoint() - inlet_mid).dot(&e.tangent());
                    super::inlet_profile(y, 1.0, inlet_d).unwrap_or(0.0)
                } else {
                    0.0
                }
            })
            .collect();

        let n = 2 * els.len();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (i, ei) in els.iter().enumerate() {
            let x0 = ei.midpoint();
            let (cols, rhs) = boundary_row(els, &inlet_speed, x0, Some(i));
            for (e, block) in cols.iter().enumerate() {
                for j in 0..2 {
                    a[(2 * i + j, 2 * e)] = block[(j, 0)];
                    a[(2 * i + j, 2 * e + 1)] = block[(j, 1)];
                }
            }
            b[2 * i] = rhs.x;
            b[2 * i + 1] = rhs.y;
        }
        let norm_a = one_norm(&a);
        let ainv = a.lu().try_inverse().ok_or(FlowError::Singular {
            condition: f64::INFINITY,
        })?;
        let condition = norm_a * one_norm(&ainv);
        if !condition.is_finite() || condition > options.max_condition {
            return Err(FlowError::Singular { condition });
        }
        let base = &ainv * b;
        Ok(Self {
            mesh: mesh.clone(),
            options,
            inlet_speed,
            ainv,
            base,
            condition,
        })
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Condition estimate of the vessel block.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn nearest_boundary_point(&self, p: Vec2) -> (Vec2, f64) {
        let mut best = (p, f64::INFINITY);
        for e in &self.mesh.elements {
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

    /// Uniform arcs, bisected near the boundary until each is no longer
    /// than `refine_ratio` times its midpoint's distance to the boundary.
    fn robot_arcs(&self, robot: &RobotState) -> Vec<ArcElement> {
        let n = self.options.robot_elements;
        let dphi = TAU / n as f64;
        // The layout is anchored to the direction of the nearest boundary
        // point, so turning the robot in place leaves it unchanged.
        let (near, _) = self.nearest_boundary_point(robot.center);
        let rel = near - robot.center;
        let anchor = if rel.norm() > 0.0 { rel.y.atan2(rel.x) } else { 0.0 };
        let mut out = Vec::with_capacity(2 * n);
        let mut stack = Vec::new();
        for k in (0..n).rev() {
            let mid = anchor + k as f64 * dphi;
            stack.push((
                ArcElement {
                    center: robot.center,
                    radius: robot.radius,
                    phi0: mid - 0.5 * dphi,
                    phi1: mid + 0.5 * dphi,
                },
                0u32,
            ));
        }
        while let Some((arc, depth)) = stack.pop() {
            let dist = self
                .mesh
                .elements
                .iter()
                .map(|e| e.distance_to(arc.midpoint()))
                .fold(f64::INFINITY, f64::min);
            if depth < self.options.max_refine_depth && arc.length() > self.options.refine_ratio * dist {
                let mid = arc.mid_angle();
                stack.push((ArcElement { phi0: mid, ..arc }, depth + 1));
                stack.push((ArcElement { phi1: mid, ..arc }, depth + 1));
            } else {
                out.push(arc);
            }
        }
        out
    }

    /// Mean traction over each sensor's arc of the surface.
    fn sensor_tractions(&self, robot: &RobotState, arcs: &[ArcElement], traction: &[Vec2]) -> Vec<Vec2> {
        let m = self.options.sensors;
        let width = TAU / m as f64;
        let mut out = vec![Vec2::zeros(); m];
        for (arc, t) in arcs.iter().zip(traction) {
            let lo = arc.phi0 - robot.orientation + 0.5 * width;
            let hi = arc.phi1 - robot.orientation + 0.5 * width;
            // Sensor i covers [i·w, (i+1)·w) in these shifted angles.
            let first = (lo / width).floor() as i64;
            let last = (hi / width).ceil() as i64;
            for j in first..last {
                let overlap = hi.min((j + 1) as f64 * width) - lo.max(j as f64 * width);
                if overlap > 0.0 {
                    out[j.rem_euclid(m as i64) as usize] += t * (overlap / width);
                }
            }
        }
        out
    }

    /// Clearance between the robot surface and the nearest boundary element.
    pub fn clearance(&self, robot: &RobotState) -> Result<f64, FlowError> {
        if !self.mesh.contains(robot.center) {
            return Err(FlowError::OutsideFluid {
                x: robot.center.x,
                y: robot.center.y,
            });
        }
        let d = self
            .mesh
            .elements
            .iter()
            .map(|e| e.distance_to(robot.center))
            .fold(f64::INFINITY, f64::min);
        Ok(d - robot.radius)
    }

    pub fn solve(&self, robot: &RobotState, fluid: &FluidParams, u_max: f64) -> Result<MobilitySolution, FlowError> {
        if !self.options.unchecked {
            check_flow(fluid, u_max, self.mesh.inlet_diameter)?;
        }
        let gap = self.clearance(robot)?;
        let min = MIN_GAP_FRACTION * robot.radius;
        if gap < min {
            return Err(FlowError::GapTooSmall { gap, min });
        }
        let els = &self.mesh.elements;
        let arcs = self.robot_arcs(robot);
        let (nb, nr) = (2 * els.len(), 2 * arcs.len());

        let mut a_wr = DMatrix::zeros(nb, nr);
        for (i, e) in els.iter().enumerate() {
            let x0 = e.midpoint();
            for (m, arc) in arcs.iter().enumerate() {
                put(&mut a_wr, 2 * i, 2 * m, &arc.sl(x0));
            }
        }
        let mut a_rw = DMatrix::zeros(nr, nb);
        let mut b_r = DVector::zeros(nr + 3);
        let mut s = DMatrix::zeros(nr + 3, nr + 3);
        for (k, arc) in arcs.iter().enumerate() {
            let x0 = arc.midpoint();
            let (cols, rhs) = boundary_row(els, &self.inlet_speed, x0, None);
            for (e, block) in cols.iter().enumerate() {
                put(&mut a_rw, 2 * k, 2 * e, block);
            }
            b_r[2 * k] = rhs.x;
            b_r[2 * k + 1] = rhs.y;
            for (m, other) in arcs.iter().enumerate() {
                let g = if m == k { other.sl_self() } else { other.sl(x0) };
                put(&mut s, 2 * k, 2 * m, &g);
            }
            let rel = x0 - robot.center;
            s[(2 * k, nr)] = FOUR_PI;
            s[(2 * k + 1, nr + 1)] = FOUR_PI;
            s[(2 * k, nr + 2)] = -FOUR_PI * rel.y;
            s[(2 * k + 1, nr + 2)] = FOUR_PI * rel.x;
        }
        for (m, arc) in arcs.iter().enumerate() {
            let len = arc.length();
            let mom = arc.first_moment();
            s[(nr, 2 * m)] = len;
            s[(nr + 1, 2 * m + 1)] = len;
            s[(nr + 2, 2 * m)] = -mom.y;
            s[(nr + 2, 2 * m + 1)] = mom.x;
        }

        let w = &a_rw * &self.ainv;
        let coupling = &w * &a_wr;
        let mut top = s.view_mut((0, 0), (nr, nr));
        top -= &coupling;
        let base_r = &a_rw * &self.base;
        let mut rhs = b_r;
        for i in 0..nr {
            rhs[i] -= base_r[i];
        }
        rhs *= u_max;

        let norm_s = one_norm(&s);
        let lu = s.lu();
        let inv = lu.try_inverse().ok_or(FlowError::Singular {
            condition: f64::INFINITY,
        })?;
        let condition = norm_s * one_norm(&inv);
        if !condition.is_finite() || condition > self.options.max_condition {
            return Err(FlowError::Singular { condition });
        }
        let x = &inv * rhs;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::Singular { condition });
        }

        let mu = fluid.viscosity;
        let element_traction: Vec<Vec2> = (0..arcs.len())
            .map(|m| Vec2::new(x[2 * m], x[2 * m + 1]) * mu)
            .collect();
        let motion = RigidMotion {
            velocity: Vec2::new(x[nr], x[nr + 1]),
            angular_velocity: x[nr + 2],
        };
        let dtheta = TAU / self.options.sensors as f64;
        let traction = TractionField {
            angles: (0..self.options.sensors).map(|i| i as f64 * dtheta).collect(),
            stress: self.sensor_tractions(robot, &arcs, &element_traction),
            orientation: robot.orientation,
            radius: robot.radius,
        };
        Ok(MobilitySolution {
            robot: *robot,
            u_max,
            viscosity: mu,
            motion,
            traction,
            element_traction,
            condition,
            arcs,
            robot_unknowns: x,
        })
    }

    /// Flow field of a mobility solution.
    pub fn field(&self, sol: &MobilitySolution) -> FlowField<'_> {
        let arcs = sol.arcs.clone();
        let nb = 2 * self.mesh.elements.len();
        let mut a_wr = DMatrix::zeros(nb, 2 * arcs.len());
        for (i, e) in self.mesh.elements.iter().enumerate() {
            for (m, arc) in arcs.iter().enumerate() {
                put(&mut a_wr, 2 * i, 2 * m, &arc.sl(e.midpoint()));
            }
        }
        let robot_f = sol.robot_unknowns.rows(0, 2 * arcs.len()).into_owned();
        let boundary = &self.base * sol.u_max - &self.ainv * (a_wr * &robot_f);
        FlowField {
            op: self,
            u_max: sol.u_max,
            boundary,
            robot: Some((sol.robot, arcs, robot_f)),
        }
    }

    /// Flow through the vessel with no robot present.
    pub fn empty_field(&self, u_max: f64) -> FlowField<'_> {
        FlowField {
            op: self,
            u_max,
            boundary: &self.base * u_max,
            robot: None,
        }
    }
}

/// Fluid velocity and boundary data of one solved configuration.
#[derive(Debug, Clone)]
pub struct FlowField<'a> {
    op: &'a VesselOperator,
    u_max: f64,
    boundary: DVector<f64>,
    robot: Option<(RobotState, Vec<ArcElement>, DVector<f64>)>,
}

impl FlowField<'_> {
    /// Velocity (µm/s) at a point strictly inside the fluid.
    pub fn velocity_at(&self, p: Vec2) -> Result<Vec2, FlowError> {
        let mesh = &self.op.mesh;
        let outside = FlowError::OutsideFluid { x: p.x, y: p.y };
        if !mesh.contains(p) {
            return Err(outside);
        }
        let mut acc = Vec2::zeros();
        for (e, el) in mesh.elements.iter().enumerate() {
            let x = Vec2::new(self.boundary[2 * e], self.boundary[2 * e + 1]);
            match el.tag {
                BcTag::Wall => acc -= sl_segment(el.a, el.b, p) * x,
                BcTag::Inlet => {
                    acc -= sl_segment(el.a, el.b, p) * x;
                    let u = el.inward_normal() * (self.op.inlet_speed[e] * self.u_max);
                    acc += dl_segment(el.a, el.b, p) * u;
                }
                BcTag::Outlet => {
                    acc -= sl_segment(el.a, el.b, p) * el.tangent() * x.x;
                    acc += dl_segment(el.a, el.b, p) * el.outward_normal * x.y;
                }
            }
        }
        if let Some((robot, arcs, f)) = &self.robot {
            if (p - robot.center).norm() <= robot.radius {
                return Err(outside);
            }
            for (m, arc) in arcs.iter().enumerate() {
                acc -= arc.sl(p) * Vec2::new(f[2 * m], f[2 * m + 1]);
            }
        }
        Ok(acc / FOUR_PI)
    }

    /// Volume flux per unit depth entering through the inlet, µm²/s.
    pub fn inlet_flux(&self) -> f64 {
        self.op
            .mesh
            .elements
            .iter()
            .zip(&self.op.inlet_speed)
            .filter(|(e, _)| e.tag == BcTag::Inlet)
            .map(|(e, u)| u * self.u_max * e.length())
            .sum()
    }

    /// Flux leaving through each outlet, indexed by outlet.
    pub fn outlet_fluxes(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.op.mesh.outlet_count()];
        for (e, el) in self.op.mesh.elements.iter().enumerate() {
            if el.tag == BcTag::Outlet {
                q[el.outlet.unwrap_or(0)] += self.boundary[2 * e + 1] * el.length();
            }
        }
        q
    }
}

fn put(m: &mut DMatrix<f64>, r: usize, c: usize, block: &Mat2) {
    for j in 0..2 {
        for k in 0..2 {
            m[(r + j, c + k)] = block[(j, k)];
        }
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Coefficient blocks (one 2×2 block per boundary element) and known
/// right-hand side of the two equations collocated at `x0`, for unit peak
/// inlet speed. `own` is the element containing `x0`, if any.
fn boundary_row(els: &[Element], inlet_speed: &[f64], x0: Vec2, own: Option<usize>) -> (Vec<Mat2>, Vec2) {
    let mut rhs = Vec2::zeros();
    let cols = els
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let g = sl_segment(el.a, el.b, x0);
            match el.tag {
                BcTag::Wall => g,
                BcTag::Inlet => {
                    let u = el.inward_normal() * inlet_speed[e];
                    rhs += dl_segment(el.a, el.b, x0) * u;
                    if own == Some(e) {
                        rhs -= u * (2.0 * PI);
                    }
                    g
                }
                BcTag::Outlet => {
                    let nu = el.outward_normal;
                    let mut flow = -(dl_segment(el.a, el.b, x0) * nu);
                    if own == Some(e) {
                        flow += nu * (2.0 * PI);
                    }
                    let t = g * el.tangent();
                    Mat2::new(t.x, flow.x, t.y, flow.y)
                }
            }
        })
        .collect();
    (cols, rhs)
}

use serde::{Deserialize, Serialize};

use super::{GeometryError, RobotState, Vec2, VesselKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcTag {
    Wall,
    Inlet,
    Outlet,
}

/// Geometric primitive of the vessel outline. Arcs run from `start`
/// through `sweep` radians (positive = counterclockwise).
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeShape {
    Line {
        a: Vec2,
        b: Vec2,
    },
    Arc {
        center: Vec2,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl EdgeShape {
    pub fn point_at(&self, frac: f64) -> Vec2 {
        match *self {
            EdgeShape::Line { a, b } => {
                if frac == 1.0 {
                    b
                } else {
                    a + (b - a) * frac
                }
            }
            EdgeShape::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let t = start + sweep * frac;
                center + Vec2::new(t.cos(), t.sin()) * radius
            }
        }
    }

    pub fn start_point(&self) -> Vec2 {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> Vec2 {
        self.point_at(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            EdgeShape::Line { a, b } => (b - a).norm(),
            EdgeShape::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub shape: EdgeShape,
    pub tag: BcTag,
    /// Index of the outlet this edge belongs to (outlet edges only).
    pub outlet: Option<usize>,
}

/// Straight boundary element. The outline runs counterclockwise, so the
/// fluid lies to the left of `b - a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub a: Vec2,
    pub b: Vec2,
    pub tag: BcTag,
    pub outward_normal: Vec2,
    pub outlet: Option<usize>,
}

impl Element {
    pub fn new(a: Vec2, b: Vec2, tag: BcTag, outlet: Option<usize>) -> Self {
        let t = (b - a).normalize();
        Self {
            a,
            b,
            tag,
            outward_normal: Vec2::new(t.y, -t.x),
            outlet,
        }
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.a + self.b) * 0.5
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn tangent(&self) -> Vec2 {
        (self.b - self.a).normalize()
    }

    /// Unit normal pointing into the fluid.
    pub fn inward_normal(&self) -> Vec2 {
        -self.outward_normal
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        segment_distance(self.a, self.b, p)
    }
}

/// Straight stretch of a vessel: centerline from `start` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub start: Vec2,
    pub axis: Vec2,
    pub length: f64,
    pub diameter: f64,
}

impl Arm {
    /// Axial and signed transverse coordinates of `p` (transverse is
    /// positive to the left of the axis).
    pub fn local(&self, p: Vec2) -> (f64, f64) {
        let rel = p - self.start;
        let left = Vec2::new(-self.axis.y, self.axis.x);
        (rel.dot(&self.axis), rel.dot(&left))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (s, y) = self.local(p);
        (0.0..=self.length).contains(&s) && y.abs() <= 0.5 * self.diameter
    }
}

/// Ground-truth location of a point inside one of the straight arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPosition {
    pub arm: usize,
    pub along: f64,
    pub offset: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub kind: VesselKind,
    pub edges: Vec<Edge>,
    pub elements: Vec<Element>,
    pub inlet_axis: Vec2,
    pub outlet_axes: Vec<Vec2>,
    /// `arms[0]` is the inlet arm, `arms[1 + k]` the arm ending at outlet
    /// `k`. A straight vessel has a single arm serving both roles.
    pub arms: Vec<Arm>,
    /// Inner corner between the two branches.
    pub apex: Option<Vec2>,
    pub inlet_diameter: f64,
}

impl BoundaryMesh {
    pub fn corners(&self) -> Vec<Vec2> {
        self.edges.iter().map(|e| e.shape.start_point()).collect()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.shape.length())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn perimeter(&self) -> f64 {
        self.elements.iter().map(Element::length).sum()
    }

    pub fn outlet_count(&self) -> usize {
        self.outlet_axes.len()
    }

    /// Endpoints of the inlet span.
    pub fn inlet_span(&self) -> (Vec2, Vec2) {
        let e = self
            .edges
            .iter()
            .find(|e| e.tag == BcTag::Inlet)
            .expect("mesh has an inlet");
        (e.shape.start_point(), e.shape.end_point())
    }

    pub fn outlet_spans(&self) -> Vec<(Vec2, Vec2)> {
        let mut spans: Vec<(usize, Vec2, Vec2)> = self
            .edges
            .iter()
            .filter(|e| e.tag == BcTag::Outlet)
            .map(|e| (e.outlet.unwrap_or(0), e.shape.start_point(), e.shape.end_point()))
            .collect();
        spans.sort_by_key(|s| s.0);
        spans.into_iter().map(|(_, a, b)| (a, b)).collect()
    }

    /// Total width of the spans carrying `tag`.
    pub fn span_width(&self, tag: BcTag) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| e.shape.length())
            .sum()
    }

    /// Distance from `p` to the nearest outlet span, with the outlet index.
    pub fn nearest_outlet(&self, p: Vec2) -> (usize, f64) {
        self.outlet_spans()
            .iter()
            .enumerate()
            .map(|(k, (a, b))| (k, segment_distance(*a, *b, p)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    /// Even-odd test against the discretized outline.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for e in &self.elements {
            let (a, b) = (e.a, e.b);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the nearest wall element.
    pub fn wall_distance(&self, p: Vec2) -> f64 {
        self.nearest_wall(p).1
    }

    /// Nearest point on any wall element and its distance.
    pub fn nearest_wall(&self, p: Vec2) -> (Vec2, f64) {
        let mut best = (p, f64::INFINITY);
        for e in self.elements.iter().filter(|e| e.tag == BcTag::Wall) {
            let q = segment_closest(e.a, e.b, p);
            let dist = (p - q).norm();
            if dist < best.1 {
                best = (q, dist);
            }
        }
        best
    }

    pub fn locate(&self, p: Vec2) -> Option<ArmPosition> {
        self.arms.iter().enumerate().find_map(|(i, arm)| {
            arm.contains(p).then(|| {
                let (along, offset) = arm.local(p);
                ArmPosition {
                    arm: i,
                    along,
                    offset,
                    diameter: arm.diameter,
                }
            })
        })
    }
}

pub(crate) fn segment_closest(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub(crate) fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    (p - segment_closest(a, b, p)).norm()
}

fn split_edge(edge: &Edge, n: usize) -> Vec<(Vec2, Vec2)> {
    let pts: Vec<Vec2> = (0..=n).map(|i| edge.shape.point_at(i as f64 / n as f64)).collect();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Uniform discretization: every edge is split into equal pieces no longer
/// than `h`. Edge endpoints (corners) are kept exactly.
pub fn discretize(mesh: &BoundaryMesh, h: f64) -> Result<BoundaryMesh, GeometryError> {
    check_resolution(mesh, h)?;
    let mut elements = Vec::new();
    for edge in &mesh.edges {
        let n = pieces(edge.shape.length(), h);
        for (a, b) in split_edge(edge, n) {
            elements.push(Element::new(a, b, edge.tag, edge.outlet));
        }
    }
    Ok(BoundaryMesh {
        elements,
        ..mesh.clone()
    })
}

/// Two-level discretization: walls in the robot's transit corridor get
/// `h_fine`; inlet and outlet spans, and walls within `end_zone` of them,
/// get `h_coarse`. Coarse elements are unions of fine pieces, so corners are
/// still preserved.
pub fn discretize_graded(
    mesh: &BoundaryMesh,
    h_fine: f64,
    h_coarse: f64,
    end_zone: f64,
) -> Result<BoundaryMesh, GeometryError> {
    check_resolution(mesh, h_fine)?;
    if !(h_coarse >= h_fine) {
        return Err(GeometryError::InvalidParameter {
            name: "h_coarse",
            value: h_coarse,
            reason: "must not be finer than h_fine",
        });
    }
    let group = ((h_coarse / h_fine).round() as usize).max(1);
    let mut ends = vec![mesh.inlet_span()];
    ends.extend(mesh.outlet_spans());
    let coarse_at =
        |tag: BcTag, p: Vec2| tag != BcTag::Wall || ends.iter().any(|(a, b)| segment_distance(*a, *b, p) < end_zone);

    let mut elements = Vec::new();
    for edge in &mesh.edges {
        let n = pieces(edge.shape.length(), h_fine).div_ceil(group) * group;
        let fine = split_edge(edge, n);
        for chunk in fine.chunks(group) {
            let all_coarse = chunk.iter().all(|(a, b)| coarse_at(edge.tag, (a + b) * 0.5));
            if all_coarse && chunk.len() > 1 {
                let a = chunk[0].0;
                let b = chunk[chunk.len() - 1].1;
                elements.push(Element::new(a, b, edge.tag, edge.outlet));
            } else {
                for (a, b) in chunk {
                    elements.push(Element::new(*a, *b, edge.tag, edge.outlet));
                }
            }
        }
    }
    Ok(BoundaryMesh {
        elements,
        ..mesh.clone()
    })
}

fn pieces(len: f64, h: f64) -> usize {
    ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn check_resolution(mesh: &BoundaryMesh, h: f64) -> Result<(), GeometryError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeometryError::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be positive",
        });
    }
    let shortest = mesh.shortest_edge();
    if h > shortest {
        return Err(GeometryError::ResolutionTooCoarse { h, shortest });
    }
    Ok(())
}

/// Clearance between the robot surface and the nearest wall; negative
/// values mean penetration.
pub fn wall_gap(robot: &RobotState, mesh: &BoundaryMesh) -> Result<f64, GeometryError> {
    if !mesh.contains(robot.center) {
        return Err(GeometryError::OutsideDomain {
            x: robot.center.x,
            y: robot.center.y,
        });
    }
    Ok(mesh.wall_distance(robot.center) - robot.radius)
}

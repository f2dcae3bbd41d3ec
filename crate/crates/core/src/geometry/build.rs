use super::mesh::{Arm, BcTag, BoundaryMesh, Edge, EdgeShape, Element};
use super::{GeometryError, Vec2, VesselKind, VesselSpec};

/// Free construction parameters the vessel record does not fix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryOptions {
    /// Outer-corner fillet radius of a Y-junction, as a fraction of the
    /// main diameter.
    pub fillet_factor: f64,
    /// Centerline arc length of a curve, as a multiple of its diameter.
    pub curve_arc_factor: f64,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self {
            fillet_factor: 0.25,
            curve_arc_factor: 1.0,
        }
    }
}

pub fn build_geometry(spec: &VesselSpec) -> Result<BoundaryMesh, GeometryError> {
    build_geometry_with(spec, &GeometryOptions::default())
}

/// Builds the closed outline of a vessel (one element per geometric edge;
/// arcs are coarsely polygonized until [`super::discretize`] is applied).
pub fn build_geometry_with(spec: &VesselSpec, opts: &GeometryOptions) -> Result<BoundaryMesh, GeometryError> {
    spec.validate()?;
    let mesh = match spec.variant {
        VesselKind::Straight => straight(spec),
        VesselKind::Curve => curve(spec, opts)?,
        VesselKind::Branch => branch(spec, opts)?,
    };
    check_simple(&mesh, spec)?;
    Ok(mesh)
}

fn rot(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

fn left(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

fn line(a: Vec2, b: Vec2, tag: BcTag) -> Edge {
    Edge {
        shape: EdgeShape::Line { a, b },
        tag,
        outlet: None,
    }
}

fn outlet(a: Vec2, b: Vec2, k: usize) -> Edge {
    Edge {
        shape: EdgeShape::Line { a, b },
        tag: BcTag::Outlet,
        outlet: Some(k),
    }
}

fn assemble(
    kind: VesselKind,
    edges: Vec<Edge>,
    outlet_axes: Vec<Vec2>,
    arms: Vec<Arm>,
    apex: Option<Vec2>,
    d: f64,
) -> BoundaryMesh {
    let elements = edges
        .iter()
        .flat_map(|e| {
            let n = match e.shape {
                EdgeShape::Line { .. } => 1,
                EdgeShape::Arc { sweep, .. } => (sweep.abs() / 8f64.to_radians()).ceil() as usize,
            };
            (0..n)
                .map(|i| {
                    Element::new(
                        e.shape.point_at(i as f64 / n as f64),
                        e.shape.point_at((i + 1) as f64 / n as f64),
                        e.tag,
                        e.outlet,
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    BoundaryMesh {
        kind,
        edges,
        elements,
        inlet_axis: Vec2::x(),
        outlet_axes,
        arms,
        apex,
        inlet_diameter: d,
    }
}

fn straight(spec: &VesselSpec) -> BoundaryMesh {
    let (h, len) = (0.5 * spec.d, 2.0 * spec.arm_um);
    let p0 = Vec2::new(0.0, -h);
    let p1 = Vec2::new(len, -h);
    let p2 = Vec2::new(len, h);
    let p3 = Vec2::new(0.0, h);
    let edges = vec![
        line(p0, p1, BcTag::Wall),
        outlet(p1, p2, 0),
        line(p2, p3, BcTag::Wall),
        line(p3, p0, BcTag::Inlet),
    ];
    let arm = Arm {
        start: Vec2::zeros(),
        axis: Vec2::x(),
        length: len,
        diameter: spec.d,
    };
    assemble(VesselKind::Straight, edges, vec![Vec2::x()], vec![arm], None, spec.d)
}

fn curve(spec: &VesselSpec, opts: &GeometryOptions) -> Result<BoundaryMesh, GeometryError> {
    let (d, arm) = (spec.d, spec.arm_um);
    let bend = spec.bend_deg.expect("validated").to_radians();
    let rc = opts.curve_arc_factor * d / bend;
    if rc - 0.5 * d <= 0.0 {
        return Err(GeometryError::SelfIntersecting(format!(
            "curve d = {d}, bend = {}°: inner wall radius is not positive",
            bend.to_degrees()
        )));
    }
    let center = Vec2::new(arm, rc);
    let start = -std::f64::consts::FRAC_PI_2;
    let axis_out = rot(bend);
    let arc_end = center + rot(start + bend) * rc;
    let out_mid = arc_end + axis_out * arm;
    let half = 0.5 * d;
    let right_end = out_mid - left(axis_out) * half;
    let left_end = out_mid + left(axis_out) * half;
    let edges = vec![
        line(Vec2::new(0.0, -half), Vec2::new(arm, -half), BcTag::Wall),
        Edge {
            shape: EdgeShape::Arc {
                center,
                radius: rc + half,
                start,
                sweep: bend,
            },
            tag: BcTag::Wall,
            outlet: None,
        },
        line(center + rot(start + bend) * (rc + half), right_end, BcTag::Wall),
        outlet(right_end, left_end, 0),
        line(left_end, center + rot(start + bend) * (rc - half), BcTag::Wall),
        Edge {
            shape: EdgeShape::Arc {
                center,
                radius: rc - half,
                start: start + bend,
                sweep: -bend,
            },
            tag: BcTag::Wall,
            outlet: None,
        },
        line(Vec2::new(arm, half), Vec2::new(0.0, half), BcTag::Wall),
        line(Vec2::new(0.0, half), Vec2::new(0.0, -half), BcTag::Inlet),
    ];
    let arms = vec![
        Arm {
            start: Vec2::zeros(),
            axis: Vec2::x(),
            length: arm,
            diameter: d,
        },
        Arm {
            start: arc_end,
            axis: axis_out,
            length: arm,
            diameter: d,
        },
    ];
    Ok(assemble(VesselKind::Curve, edges, vec![axis_out], arms, None, d))
}

/// Solves p + s u = q + t v for (s, t).
fn intersect(p: Vec2, u: Vec2, q: Vec2, v: Vec2) -> Option<(f64, f64)> {
    let det = u.x * (-v.y) - u.y * (-v.x);
    if det.abs() < 1e-14 {
        return None;
    }
    let r = q - p;
    let s = (r.x * (-v.y) - r.y * (-v.x)) / det;
    let t = (u.x * r.y - u.y * r.x) / det;
    Some((s, t))
}

struct Fillet {
    start: Vec2,
    end: Vec2,
    edge: Edge,
}

/// Rounds the corner `p` between incoming direction `a` and outgoing `b`.
fn fillet(p: Vec2, a: Vec2, b: Vec2, radius: f64) -> Fillet {
    let turn = (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
    let tangent_len = radius * (0.5 * turn.abs()).tan();
    let start = p - a * tangent_len;
    let end = p + b * tangent_len;
    let center = start + left(a) * radius * turn.signum();
    let rel = start - center;
    Fillet {
        start,
        end,
        edge: Edge {
            shape: EdgeShape::Arc {
                center,
                radius,
                start: rel.y.atan2(rel.x),
                sweep: turn,
            },
            tag: BcTag::Wall,
            outlet: None,
        },
    }
}

fn branch(spec: &VesselSpec, opts: &GeometryOptions) -> Result<BoundaryMesh, GeometryError> {
    let d = spec.d;
    let d1 = spec.d1.expect("validated");
    let d2 = spec.d2.expect("validated");
    let a1 = spec.alpha1_deg.expect("validated").to_radians();
    let a2 = spec.alpha2_deg.expect("validated").to_radians();
    let arm = spec.arm_um;
    let describe = || {
        format!(
            "branch d = {d:.4}, d1 = {d1}, d2 = {d2}, alpha1 = {}°, alpha2 = {}°",
            a1.to_degrees(),
            a2.to_degrees()
        )
    };

    // Junction point at the origin for now; shifted at the end.
    let (e1, e2) = (rot(a1), rot(a2));
    let (n1, n2) = (left(e1), left(e2));
    let half = 0.5 * d;

    let (_, s1) = intersect(Vec2::new(0.0, half), Vec2::x(), n1 * (0.5 * d1), e1)
        .ok_or_else(|| GeometryError::SelfIntersecting(describe()))?;
    let (_, s2) = intersect(Vec2::new(0.0, -half), Vec2::x(), -n2 * (0.5 * d2), e2)
        .ok_or_else(|| GeometryError::SelfIntersecting(describe()))?;
    let c1 = e1 * s1 + n1 * (0.5 * d1);
    let c2 = e2 * s2 - n2 * (0.5 * d2);
    let (sa, _) = intersect(-n1 * (0.5 * d1), e1, n2 * (0.5 * d2), e2)
        .ok_or_else(|| GeometryError::SelfIntersecting(describe()))?;
    let apex = e1 * sa - n1 * (0.5 * d1);

    let radius = opts.fillet_factor * d;
    let f1 = fillet(c1, -e1, -Vec2::x(), radius);
    let f2 = fillet(c2, Vec2::x(), e2, radius);

    if apex.x <= f1.end.x.max(f2.start.x) {
        return Err(GeometryError::SelfIntersecting(describe()));
    }
    // Main straight run ends where the first fillet starts.
    let shift = Vec2::new(arm - f1.end.x.min(f2.start.x), 0.0);
    let feature_end1 = apex.dot(&e1).max(f1.start.dot(&e1));
    let feature_end2 = apex.dot(&e2).max(f2.end.dot(&e2));
    let out1 = e1 * (feature_end1 + arm);
    let out2 = e2 * (feature_end2 + arm);

    let p = |v: Vec2| v + shift;
    let shift_arc = |mut e: Edge| {
        if let EdgeShape::Arc { ref mut center, .. } = e.shape {
            *center += shift;
        }
        e
    };
    let edges = vec![
        line(Vec2::new(0.0, -half), p(f2.start), BcTag::Wall),
        shift_arc(f2.edge),
        line(p(f2.end), p(out2 - n2 * (0.5 * d2)), BcTag::Wall),
        outlet(p(out2 - n2 * (0.5 * d2)), p(out2 + n2 * (0.5 * d2)), 1),
        line(p(out2 + n2 * (0.5 * d2)), p(apex), BcTag::Wall),
        line(p(apex), p(out1 - n1 * (0.5 * d1)), BcTag::Wall),
        outlet(p(out1 - n1 * (0.5 * d1)), p(out1 + n1 * (0.5 * d1)), 0),
        line(p(out1 + n1 * (0.5 * d1)), p(f1.start), BcTag::Wall),
        shift_arc(f1.edge),
        line(p(f1.end), Vec2::new(0.0, half), BcTag::Wall),
        line(Vec2::new(0.0, half), Vec2::new(0.0, -half), BcTag::Inlet),
    ];
    for e in &edges {
        if e.shape.length() <= 0.0 {
            return Err(GeometryError::SelfIntersecting(describe()));
        }
    }
    let arms = vec![
        Arm {
            start: Vec2::zeros(),
            axis: Vec2::x(),
            length: arm,
            diameter: d,
        },
        Arm {
            start: p(e1 * feature_end1),
            axis: e1,
            length: arm,
            diameter: d1,
        },
        Arm {
            start: p(e2 * feature_end2),
            axis: e2,
            length: arm,
            diameter: d2,
        },
    ];
    Ok(assemble(
        VesselKind::Branch,
        edges,
        vec![e1, e2],
        arms,
        Some(p(apex)),
        d,
    ))
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let orient = |p: Vec2, q: Vec2, r: Vec2| (q - p).perp(&(r - p));
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn check_simple(mesh: &BoundaryMesh, spec: &VesselSpec) -> Result<(), GeometryError> {
    let segs: Vec<(Vec2, Vec2)> = mesh.elements.iter().map(|e| (e.a, e.b)).collect();
    let n = segs.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                return Err(GeometryError::SelfIntersecting(format!(
                    "{:?} d = {}, d1 = {:?}, d2 = {:?}, bend = {:?}°, alpha1 = {:?}°, alpha2 = {:?}°",
                    spec.variant, spec.d, spec.d1, spec.d2, spec.bend_deg, spec.alpha1_deg, spec.alpha2_deg
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{discretize, discretize_graded, wall_gap, RobotState};
    use super::*;
    use approx::assert_relative_eq;

    fn closed(mesh: &BoundaryMesh) {
        let n = mesh.elements.len();
        for i in 0..n {
            let next = &mesh.elements[(i + 1) % n];
            assert!((mesh.elements[i].b - next.a).norm() < 1e-12, "gap after element {i}");
        }
    }

    #[test]
    fn straight_is_a_rectangle() {
        let m = build_geometry(&VesselSpec::straight(8.0, 30.0)).unwrap();
        closed(&m);
        assert_relative_eq!(m.perimeter(), 136.0);
        assert_eq!(m.edges.iter().filter(|e| e.tag == BcTag::Inlet).count(), 1);
        assert_eq!(m.outlet_spans().len(), 1);
        let (a, b) = m.inlet_span();
        assert_eq!((a.x, b.x), (0.0, 0.0));
        let (a, b) = m.outlet_spans()[0];
        assert_eq!((a.x, b.x), (60.0, 60.0));
        assert_relative_eq!(m.span_width(BcTag::Inlet), 8.0);
        assert_relative_eq!(m.span_width(BcTag::Outlet), 8.0);
    }

    #[test]
    fn curve_axes_differ_by_bend() {
        let m = build_geometry(&VesselSpec::curve(8.0, 50.0, 30.0)).unwrap();
        closed(&m);
        let ang = m.outlet_axes[0].y.atan2(m.outlet_axes[0].x) - m.inlet_axis.y.atan2(m.inlet_axis.x);
        assert_relative_eq!(ang.to_degrees(), 50.0, epsilon = 1e-12);
        assert_relative_eq!(m.span_width(BcTag::Outlet), 8.0, epsilon = 1e-12);
        // wall-to-wall distance along the outlet arm equals d
        let arm = m.arms[1];
        let fine = discretize(&m, 0.25).unwrap();
        let p = arm.start + arm.axis * 15.0;
        assert_relative_eq!(fine.wall_distance(p), 4.0, epsilon = 1e-9);
    }

    #[test]
    fn branch_widths_and_symmetry() {
        let spec = VesselSpec::branch(6.2, 6.2, 50.0, -50.0, 30.0);
        let m = build_geometry(&spec).unwrap();
        closed(&m);
        assert_eq!(m.outlet_spans().len(), 2);
        assert_relative_eq!(m.span_width(BcTag::Inlet), spec.d, epsilon = 1e-12);
        assert_relative_eq!(m.span_width(BcTag::Outlet), 12.4, epsilon = 1e-12);
        let h = 0.25;
        let fine = discretize(&m, h).unwrap();
        let nodes: Vec<Vec2> = fine.elements.iter().map(|e| e.a).collect();
        for p in &nodes {
            let mirror = Vec2::new(p.x, -p.y);
            let nearest = nodes.iter().map(|q| (q - mirror).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < h / 10.0, "node {p:?} has no mirror image ({nearest})");
        }
        let apex = m.apex.unwrap();
        assert!(apex.y.abs() < 1e-12);
        assert!(nodes.iter().any(|q| (q - apex).norm() == 0.0));
    }

    #[test]
    fn branch_arm_diameters() {
        let spec = VesselSpec::branch(6.0, 9.5, 30.0, -70.0, 30.0);
        let m = discretize(&build_geometry(&spec).unwrap(), 0.25).unwrap();
        for (k, arm) in m.arms.iter().enumerate() {
            let p = arm.start + arm.axis * (0.5 * arm.length);
            assert_relative_eq!(m.wall_distance(p), 0.5 * arm.diameter, epsilon = 1e-9);
            assert_eq!(m.locate(p).unwrap().arm, k);
        }
        assert_relative_eq!(m.arms[0].length, 30.0);
    }

    #[test]
    fn build_is_deterministic() {
        let spec = VesselSpec::branch(7.3, 8.1, 33.0, -61.0, 30.0);
        let a = discretize(&build_geometry(&spec).unwrap(), 0.3).unwrap();
        let b = discretize(&build_geometry(&spec).unwrap(), 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_extreme_generated_branches_build() {
        for &d1 in &[6.0, 10.0] {
            for &d2 in &[6.0, 10.0] {
                for &a1 in &[25.0, 75.0] {
                    for &a2 in &[-25.0, -75.0] {
                        let spec = VesselSpec::branch(d1, d2, a1, a2, 30.0);
                        build_geometry(&spec).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
                    }
                }
            }
        }
        for &d in &[6.0, 13.0] {
            for &b in &[25.0, 75.0] {
                build_geometry(&VesselSpec::curve(d, b, 30.0)).unwrap();
            }
        }
    }

    #[test]
    fn tight_curve_is_rejected() {
        let opts = GeometryOptions {
            curve_arc_factor: 0.5,
            ..Default::default()
        };
        let err = build_geometry_with(&VesselSpec::curve(8.0, 75.0, 30.0), &opts).unwrap_err();
        assert!(matches!(err, GeometryError::SelfIntersecting(ref s) if s.contains("bend")));
    }

    #[test]
    fn discretize_bounds() {
        let m = build_geometry(&VesselSpec::straight(8.0, 30.0)).unwrap();
        let a = discretize(&m, 0.5).unwrap();
        assert!(a.elements.len() >= 272);
        assert!(a.elements.iter().all(|e| e.length() <= 0.5 + 1e-12));
        let b = discretize(&m, 0.25).unwrap();
        let ratio = b.elements.len() as f64 / a.elements.len() as f64;
        assert!((ratio - 2.0).abs() <= 0.2, "{ratio}");
        assert!(discretize(&m, 9.0).is_err());
        assert!(discretize(&m, 0.0).is_err());
    }

    #[test]
    fn discretize_preserves_tags_and_corners() {
        let m = build_geometry(&VesselSpec::branch(6.5, 8.0, 45.0, -35.0, 30.0)).unwrap();
        for h in [0.5, 0.25, 0.125] {
            let fine = discretize(&m, h).unwrap();
            let nodes: Vec<Vec2> = fine.elements.iter().map(|e| e.a).collect();
            for c in m.corners() {
                assert!(nodes.contains(&c), "corner {c:?} lost at h = {h}");
            }
            assert!((fine.span_width(BcTag::Outlet) - m.span_width(BcTag::Outlet)).abs() < 1e-9);
            let outlet_len: f64 = fine
                .elements
                .iter()
                .filter(|e| e.tag == BcTag::Outlet)
                .map(|e| e.length())
                .sum();
            assert_relative_eq!(outlet_len, 6.5 + 8.0, epsilon = 1e-9);
            assert!(fine
                .elements
                .iter()
                .all(|e| e.length() <= h * (1.0 + 1e-12) && e.length() > h / 3.0));
        }
    }

    #[test]
    fn graded_mesh_is_coarse_near_ends() {
        let m = build_geometry(&VesselSpec::straight(8.0, 30.0)).unwrap();
        let g = discretize_graded(&m, 0.25, 0.5, 5.0).unwrap();
        let uniform = discretize(&m, 0.25).unwrap();
        assert!(g.elements.len() < uniform.elements.len());
        for e in &g.elements {
            let x = e.midpoint().x;
            let expect = if e.tag != BcTag::Wall || !(5.0..=55.0).contains(&x) {
                0.5
            } else {
                0.25
            };
            assert_relative_eq!(e.length(), expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn wall_gap_examples() {
        let m = discretize(&build_geometry(&VesselSpec::straight(8.0, 30.0)).unwrap(), 0.5).unwrap();
        let r = RobotState::new(20.0, 0.0, 0.0);
        assert_relative_eq!(wall_gap(&r, &m).unwrap(), 3.0, epsilon = 1e-12);
        let r = RobotState::new(20.0, 3.0, 0.0);
        assert!(wall_gap(&r, &m).unwrap().abs() < 1e-12);
        let r = RobotState::new(-1.0, 0.0, 0.0);
        assert!(matches!(wall_gap(&r, &m), Err(GeometryError::OutsideDomain { .. })));
    }
}

//! Integrals of the 2D Stokeslet and stresslet over boundary elements.
//!
//! With x̂ = x − x0 and r = |x̂|:
//!   G_ij = −δ_ij ln r + x̂_i x̂_j / r²
//!   T_ijk = −4 x̂_i x̂_j x̂_k / r⁴
//! Straight elements are integrated in closed form, arcs by adaptive
//! Gauss-Legendre quadrature.

use std::sync::OnceLock;

use nalgebra::Matrix2;

use crate::geometry::Vec2;

pub(crate) type Mat2 = Matrix2<f64>;

fn left(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

fn sym(a: Vec2, b: Vec2) -> Mat2 {
    a * b.transpose() + b * a.transpose()
}

/// ∫ G(x − x0) ds over the segment a → b.
pub(crate) fn sl_segment(a: Vec2, b: Vec2, x0: Vec2) -> Mat2 {
    let d = b - a;
    let len = d.norm();
    let t = d / len;
    let n = left(t);
    let rel = a - x0;
    let h = rel.dot(&n);
    let s0 = rel.dot(&t);
    // (∫ ln r, ∫ s²/r², ∫ s h/r², ∫ h²/r²)
    let prim = |s: f64| {
        let r2 = s * s + h * h;
        let ln_r = if r2 > 0.0 { 0.5 * r2.ln() } else { 0.0 };
        let at = if h != 0.0 { h * (s / h).atan() } else { 0.0 };
        [s * ln_r - s + at, s - at, h * ln_r, at]
    };
    let (p0, p1) = (prim(s0), prim(s0 + len));
    let i = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2], p1[3] - p0[3]];
    -Mat2::identity() * i[0] + t * t.transpose() * i[1] + sym(t, n) * i[2] + n * n.transpose() * i[3]
}

/// ∫ T_ijk(x − x0) n_k ds over the segment a → b, with n the left normal
/// of the segment (the fluid side of a counterclockwise outline).
/// Principal value zero when x0 is collinear with the segment.
pub(crate) fn dl_segment(a: Vec2, b: Vec2, x0: Vec2) -> Mat2 {
    let d = b - a;
    let len = d.norm();
    let t = d / len;
    let n = left(t);
    let rel = a - x0;
    let h = rel.dot(&n);
    if h.abs() <= 1e-13 * len {
        return Mat2::zeros();
    }
    let s0 = rel.dot(&t);
    let prim = |s: f64| {
        let r2 = s * s + h * h;
        let at = 2.0 * (s / h).atan();
        [2.0 * h * s / r2 - at, 2.0 * h * h / r2, -2.0 * h * s / r2 - at]
    };
    let (p0, p1) = (prim(s0), prim(s0 + len));
    t * t.transpose() * (p1[0] - p0[0]) + sym(t, n) * (p1[1] - p0[1]) + n * n.transpose() * (p1[2] - p0[2])
}

fn stokeslet(xh: Vec2) -> Mat2 {
    let r2 = xh.norm_squared();
    -Mat2::identity() * (0.5 * r2.ln()) + xh * xh.transpose() / r2
}

/// Nodes and weights on [−1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R4: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        4 => R4.get_or_init(|| gauss_legendre(4)),
        8 => R8.get_or_init(|| gauss_legendre(8)),
        _ => R16.get_or_init(|| gauss_legendre(16)),
    }
}

/// Circular arc element of the robot surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ArcElement {
    pub center: Vec2,
    pub radius: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl ArcElement {
    pub fn point(&self, phi: f64) -> Vec2 {
        self.center + Vec2::new(phi.cos(), phi.sin()) * self.radius
    }

    pub fn mid_angle(&self) -> f64 {
        0.5 * (self.phi0 + self.phi1)
    }

    pub fn midpoint(&self) -> Vec2 {
        self.point(self.mid_angle())
    }

    pub fn length(&self) -> f64 {
        self.radius * (self.phi1 - self.phi0)
    }

    /// ∫ (x − center) ds.
    pub fn first_moment(&self) -> Vec2 {
        let r2 = self.radius * self.radius;
        Vec2::new(
            r2 * (self.phi1.sin() - self.phi0.sin()),
            -r2 * (self.phi1.cos() - self.phi0.cos()),
        )
    }

    /// ∫ G(x − x0) ds over the arc, for x0 off the arc.
    pub fn sl(&self, x0: Vec2) -> Mat2 {
        sl_arc_adaptive(self, self.phi0, self.phi1, x0, 0)
    }

    /// ∫ G(x − x0) ds with x0 the arc midpoint; the logarithm is
    /// subtracted and integrated analytically.
    pub fn sl_self(&self) -> Mat2 {
        let (nodes, weights) = rule(16);
        let x0 = self.midpoint();
        let pm = self.mid_angle();
        let len = self.length();
        let mut acc = Mat2::zeros();
        for (lo, hi) in [(self.phi0, pm), (pm, self.phi1)] {
            let (c, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (z, w) in nodes.iter().zip(weights) {
                let phi = c + half * z;
                let s = self.radius * (phi - pm);
                let g = stokeslet(self.point(phi) - x0) + Mat2::identity() * s.abs().ln();
                acc += g * (w * half * self.radius);
            }
        }
        acc - Mat2::identity() * (len * (0.5 * len).ln() - len)
    }
}

const MAX_DEPTH: u32 = 16;

fn sl_arc_adaptive(arc: &ArcElement, lo: f64, hi: f64, x0: Vec2, depth: u32) -> Mat2 {
    let len = arc.radius * (hi - lo);
    let mid = 0.5 * (lo + hi);
    let dist = (arc.point(mid) - x0).norm();
    let n = if dist > 4.0 * len {
        4
    } else if dist > 1.5 * len || depth >= MAX_DEPTH {
        8
    } else {
        return sl_arc_adaptive(arc, lo, mid, x0, depth + 1) + sl_arc_adaptive(arc, mid, hi, x0, depth + 1);
    };
    let (nodes, weights) = rule(n);
    let half = 0.5 * (hi - lo);
    let mut acc = Mat2::zeros();
    for (z, w) in nodes.iter().zip(weights) {
        acc += stokeslet(arc.point(mid + half * z) - x0) * (w * half * arc.radius);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force composite quadrature of a kernel over a segment.
    fn brute(a: Vec2, b: Vec2, pieces: usize, f: impl Fn(Vec2) -> Mat2) -> Mat2 {
        let (nodes, weights) = gauss_legendre(16);
        let len = (b - a).norm() / pieces as f64;
        let mut acc = Mat2::zeros();
        for p in 0..pieces {
            for (z, w) in nodes.iter().zip(&weights) {
                let frac = (p as f64 + 0.5 * (z + 1.0)) / pieces as f64;
                acc += f(a + (b - a) * frac) * (0.5 * w * len);
            }
        }
        acc
    }

    fn stresslet_n(xh: Vec2, n: Vec2) -> Mat2 {
        let r2 = xh.norm_squared();
        xh * xh.transpose() * (-4.0 * xh.dot(&n) / (r2 * r2))
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(q, 2.0 / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn segment_single_layer_matches_quadrature() {
        let a = Vec2::new(0.3, -0.2);
        let b = Vec2::new(1.1, 0.4);
        for x0 in [Vec2::new(0.5, 0.6), Vec2::new(-2.0, 1.0), Vec2::new(0.7, 0.13)] {
            let exact = sl_segment(a, b, x0);
            let num = brute(a, b, 64, |x| stokeslet(x - x0));
            assert!((exact - num).amax() < 1e-9, "{exact} vs {num}");
        }
    }

    #[test]
    fn segment_single_layer_self_term() {
        let (a, b) = (Vec2::new(0.0, 0.0), Vec2::new(0.4, 0.3));
        let mid = (a + b) * 0.5;
        let t = (b - a).normalize();
        let l: f64 = 0.5;
        let expect = -Mat2::identity() * (l * (l / 2.0).ln() - l) + t * t.transpose() * l;
        assert!((sl_segment(a, b, mid) - expect).amax() < 1e-14);
    }

    #[test]
    fn segment_double_layer_matches_quadrature() {
        let a = Vec2::new(0.3, -0.2);
        let b = Vec2::new(1.1, 0.4);
        let n = left((b - a).normalize());
        for x0 in [Vec2::new(0.5, 0.6), Vec2::new(-2.0, 1.0), Vec2::new(0.9, -0.5)] {
            let exact = dl_segment(a, b, x0);
            let num = brute(a, b, 64, |x| stresslet_n(x - x0, n));
            assert!((exact - num).amax() < 1e-9, "{exact} vs {num}");
        }
        assert_eq!(dl_segment(a, b, (a + b) * 0.5), Mat2::zeros());
    }

    #[test]
    fn double_layer_of_closed_contour_is_identity_inside() {
        // counterclockwise square, fluid inside
        let c = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.5),
            Vec2::new(0.0, 1.5),
        ];
        for x0 in [Vec2::new(0.4, 0.3), Vec2::new(1.7, 1.2)] {
            let mut acc = Mat2::zeros();
            for i in 0..4 {
                acc += dl_segment(c[i], c[(i + 1) % 4], x0);
            }
            let want = Mat2::identity() * (4.0 * std::f64::consts::PI);
            assert!((acc - want).amax() < 1e-12, "{acc}");
            let mut out = Mat2::zeros();
            for i in 0..4 {
                out += dl_segment(c[i], c[(i + 1) % 4], Vec2::new(3.0, 0.2));
            }
            assert!(out.amax() < 1e-12);
        }
    }

    #[test]
    fn arc_quadrature_near_and_self() {
        let arc = ArcElement {
            center: Vec2::new(1.0, 2.0),
            radius: 1.0,
            phi0: 0.2,
            phi1: 0.2 + std::f64::consts::PI / 18.0,
        };
        // reference: many straight chords are not exact, so compare against
        // a dense composite rule in angle
        let dense = |x0: Vec2, skip_mid: bool| {
            let (nodes, weights) = gauss_legendre(16);
            let pieces = 4000;
            let dphi = (arc.phi1 - arc.phi0) / pieces as f64;
            let mut acc = Mat2::zeros();
            for p in 0..pieces {
                for (z, w) in nodes.iter().zip(&weights) {
                    let phi = arc.phi0 + dphi * (p as f64 + 0.5 * (z + 1.0));
                    if skip_mid && (phi - arc.mid_angle()).abs() < 1e-12 {
                        continue;
                    }
                    acc += stokeslet(arc.point(phi) - x0) * (0.5 * w * dphi * arc.radius);
                }
            }
            acc
        };
        let outside = arc.midpoint() + (arc.midpoint() - arc.center).normalize() * 0.05;
        assert!((arc.sl(outside) - dense(outside, false)).amax() < 1e-8);
        let far = Vec2::new(-3.0, 0.0);
        assert!((arc.sl(far) - dense(far, false)).amax() < 1e-10);
        assert!((arc.sl_self() - dense(arc.midpoint(), true)).amax() < 1e-5);
    }

    #[test]
    fn arc_first_moment() {
        let arc = ArcElement {
            center: Vec2::zeros(),
            radius: 2.0,
            phi0: 0.0,
            phi1: std::f64::consts::FRAC_PI_2,
        };
        assert_relative_eq!(arc.first_moment(), Vec2::new(4.0, 4.0), epsilon = 1e-14);
    }
}

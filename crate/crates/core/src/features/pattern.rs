use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::stokes::TractionField;

/// Highest retained Fourier mode.
pub const MODES: usize = 6;
/// Reals per stress component: mode 0, then (re, im) for modes 1..=6.
pub const COMPONENT_LEN: usize = 1 + 2 * MODES;
pub const PATTERN_LEN: usize = 2 * COMPONENT_LEN;

/// Robot-frame Fourier encoding of a surface stress pattern.
///
/// For each component (normal first, then tangential), with
/// a_k = (1/M) Σ s(θ_i) e^{−ikθ_i}, the layout is
/// `[a_0, Re a_1, Im a_1, …, Re a_6, Im a_6]`, and
/// s(θ) ≈ a_0 + 2 Σ_k Re(a_k e^{ikθ}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressPattern {
    #[serde(with = "coeff_array")]
    pub coeffs: [f64; PATTERN_LEN],
}

mod coeff_array {
    use super::PATTERN_LEN;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; PATTERN_LEN], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; PATTERN_LEN], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("expected 26 coefficients"))
    }
}

impl StressPattern {
    pub fn zeros() -> Self {
        Self {
            coeffs: [0.0; PATTERN_LEN],
        }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self, FeatureError> {
        let coeffs = v
            .try_into()
            .map_err(|_| FeatureError::InvalidInput(format!("expected {PATTERN_LEN} coefficients, got {}", v.len())))?;
        Ok(Self { coeffs })
    }

    /// Mode `k` of component `c` (0 = normal, 1 = tangential) as (re, im).
    pub fn mode(&self, c: usize, k: usize) -> (f64, f64) {
        let base = c * COMPONENT_LEN;
        if k == 0 {
            (self.coeffs[base], 0.0)
        } else {
            (self.coeffs[base + 2 * k - 1], self.coeffs[base + 2 * k])
        }
    }

    fn set_mode(&mut self, c: usize, k: usize, re: f64, im: f64) {
        let base = c * COMPONENT_LEN;
        if k == 0 {
            self.coeffs[base] = re;
        } else {
            self.coeffs[base + 2 * k - 1] = re;
            self.coeffs[base + 2 * k] = im;
        }
    }

    /// (normal, tangential) stress at robot-frame angle θ.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.mode(c, 0).0;
            for k in 1..=MODES {
                let (re, im) = self.mode(c, k);
                let (s, co) = (k as f64 * theta).sin_cos();
                *o += 2.0 * (re * co - im * s);
            }
        }
        (out[0], out[1])
    }

    /// The pattern turned by φ on the robot: result(θ) = self(θ − φ).
    pub fn rotate(&self, phi: f64) -> Self {
        let mut out = *self;
        for c in 0..2 {
            for k in 1..=MODES {
                let (re, im) = self.mode(c, k);
                let (s, co) = (k as f64 * phi).sin_cos();
                out.set_mode(c, k, re * co + im * s, im * co - re * s);
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// ∫ s·s dθ from the coefficients.
    pub fn norm_squared(&self) -> f64 {
        inner(self, self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Euclidean norm of the raw 26-vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// ∫₀^{2π} f·g dθ by Parseval.
fn inner(f: &StressPattern, g: &StressPattern) -> f64 {
    let mut acc = 0.0;
    for c in 0..2 {
        acc += f.mode(c, 0).0 * g.mode(c, 0).0;
        for k in 1..=MODES {
            let (a, b) = (f.mode(c, k), g.mode(c, k));
            acc += 2.0 * (a.0 * b.0 + a.1 * b.1);
        }
    }
    TAU * acc
}

/// Fourier encoding of the normal and tangential stress at the sensors.
pub fn encode_pattern(traction: &TractionField) -> Result<StressPattern, FeatureError> {
    let m = traction.len();
    if m < 2 * MODES + 2 {
        return Err(FeatureError::InvalidInput(format!(
            "{m} sensors cannot resolve {MODES} modes"
        )));
    }
    let step = TAU / m as f64;
    let theta0 = traction.angles[0];
    for (i, &theta) in traction.angles.iter().enumerate() {
        if (theta - theta0 - i as f64 * step).abs() > 1e-9 {
            return Err(FeatureError::InvalidInput(
                "sensor angles are not uniformly spaced".into(),
            ));
        }
    }
    let nt = traction.normal_tangential();
    let mut p = StressPattern::zeros();
    for c in 0..2 {
        for k in 0..=MODES {
            let (mut re, mut im) = (0.0, 0.0);
            for (&theta, v) in traction.angles.iter().zip(&nt) {
                let s = if c == 0 { v.0 } else { v.1 };
                let (sn, co) = (k as f64 * theta).sin_cos();
                re += s * co;
                im -= s * sn;
            }
            p.set_mode(c, k, re / m as f64, im / m as f64);
        }
    }
    Ok(p)
}

fn check_nonzero(p: &StressPattern) -> Result<f64, FeatureError> {
    let n = p.norm_squared();
    if !(n > 0.0) || !n.is_finite() {
        return Err(FeatureError::ZeroPattern);
    }
    Ok(n.sqrt())
}

/// Normalized inner product of two stress patterns, in [−1, 1].
pub fn correlation(f: &StressPattern, g: &StressPattern) -> Result<f64, FeatureError> {
    let (nf, ng) = (check_nonzero(f)?, check_nonzero(g)?);
    Ok((inner(f, g) / (nf * ng)).clamp(-1.0, 1.0))
}

/// cor(a(θ), b(θ + Δ)) = Σ_k w_k [p_k cos kΔ + q_k sin kΔ] / norms, as
/// coefficients (p_k, q_k) of a trigonometric polynomial in Δ.
struct Shifted {
    p: [f64; MODES + 1],
    q: [f64; MODES + 1],
}

impl Shifted {
    fn new(a: &StressPattern, b: &StressPattern, scale: f64) -> Self {
        let mut p = [0.0; MODES + 1];
        let mut q = [0.0; MODES + 1];
        for c in 0..2 {
            p[0] += a.mode(c, 0).0 * b.mode(c, 0).0;
            for k in 1..=MODES {
                let (x, y) = (a.mode(c, k), b.mode(c, k));
                // 2 Re(a_k conj(b_k e^{ikΔ}))
                p[k] += 2.0 * (x.0 * y.0 + x.1 * y.1);
                q[k] += 2.0 * (x.1 * y.0 - x.0 * y.1);
            }
        }
        for k in 0..=MODES {
            p[k] *= scale;
            q[k] *= scale;
        }
        Self { p, q }
    }

    fn value(&self, d: f64) -> f64 {
        let mut v = self.p[0];
        for k in 1..=MODES {
            let (s, c) = (k as f64 * d).sin_cos();
            v += self.p[k] * c + self.q[k] * s;
        }
        v
    }

    fn derivs(&self, d: f64) -> (f64, f64) {
        let (mut d1, mut d2) = (0.0, 0.0);
        for k in 1..=MODES {
            let kf = k as f64;
            let (s, c) = (kf * d).sin_cos();
            d1 += kf * (self.q[k] * c - self.p[k] * s);
            d2 -= kf * kf * (self.p[k] * c + self.q[k] * s);
        }
        (d1, d2)
    }
}

const GRID: usize = 360;
const CANDIDATES: usize = 3;

/// Maximum over Δθ of cor(a(θ), b(θ + Δθ)), with the maximizing Δθ in
/// [0, 2π). If b is a turned by φ, Δθ = φ.
pub fn max_correlation(a: &StressPattern, b: &StressPattern) -> Result<(f64, f64), FeatureError> {
    let (na, nb) = (check_nonzero(a)?, check_nonzero(b)?);
    // Evaluate in a canonical argument order so the result is exactly
    // symmetric: swapping the arguments negates Δθ.
    if a.total_cmp(b) == Ordering::Greater {
        let (c, d) = max_correlation(b, a)?;
        return Ok((c, (TAU - d).rem_euclid(TAU)));
    }
    let poly = Shifted::new(a, b, TAU / (na * nb));
    let step = TAU / GRID as f64;
    let values: Vec<f64> = (0..GRID).map(|i| poly.value(i as f64 * step)).collect();
    let mut peaks: Vec<usize> = (0..GRID)
        .filter(|&i| {
            let prev = values[(i + GRID - 1) % GRID];
            let next = values[(i + 1) % GRID];
            values[i] >= prev && values[i] >= next
        })
        .collect();
    peaks.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    peaks.truncate(CANDIDATES);
    if peaks.is_empty() {
        peaks.push(0);
    }

    let mut best = (f64::NEG_INFINITY, 0.0);
    for &i in &peaks {
        let (lo, hi) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
        let mut d = golden_max(&poly, lo, hi, 1e-4);
        // Newton polish on the derivative, kept inside the bracket.
        for _ in 0..8 {
            let (d1, d2) = poly.derivs(d);
            if d2 >= 0.0 {
                break;
            }
            let next = (d - d1 / d2).clamp(lo, hi);
            let done = (next - d).abs() < 1e-15;
            d = next;
            if done {
                break;
            }
        }
        let v = poly.value(d);
        if v > best.0 {
            best = (v, d);
        }
    }
    Ok((best.0.clamp(-1.0, 1.0), best.1.rem_euclid(TAU)))
}

fn golden_max(poly: &Shifted, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (poly.value(x1), poly.value(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = poly.value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = poly.value(x1);
        }
    }
    0.5 * (lo + hi)
}

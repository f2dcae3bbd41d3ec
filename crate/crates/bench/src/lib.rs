//! Shared fixtures for the benchmarks in `benches/`.

use stressnav::features::PATTERN_LEN;
use stressnav::{FeatureVector, StressPattern};

/// Deterministic, smooth-ish stress patterns without pulling in an RNG.
pub fn fixture_patterns(n: usize) -> Vec<StressPattern> {
    (0..n)
        .map(|k| {
            let v: Vec<f64> = (0..PATTERN_LEN)
                .map(|i| ((k * 31 + i * 17) as f64 * 0.37).sin() / (1.0 + (i % 13) as f64))
                .collect();
            StressPattern::from_slice(&v).expect("fixture pattern")
        })
        .collect()
}

/// Features and labels from a fixed logistic surface with label noise.
pub fn fixture_features(n: usize) -> (Vec<FeatureVector>, Vec<bool>) {
    (0..n)
        .map(|k| {
            let u = (k as f64 * 0.618_033_988_75).fract();
            let w = (k as f64 * 0.414_213_562_37).fract();
            let f = FeatureVector {
                lc: -6.0 * u,
                rho: w,
                p1: (k as f64 * 1.3).sin() * 0.4,
            };
            let b = -0.5 - 0.8 * f.lc + 2.0 * f.rho - 0.1 * f.lc * f.lc + 3.0 * f.p1;
            let flip = ((k as f64 * 2.7).sin() * 43_758.545).fract().abs() > 0.85;
            (f, (b > 0.0) != flip)
        })
        .unzip()
}

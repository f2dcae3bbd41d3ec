//! Stress-pattern features: Fourier encoding, rotation-maximized
//! correlation, relative position and the first principal component.

mod pattern;
mod pca;
mod series;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pattern::{correlation, encode_pattern, max_correlation, StressPattern, COMPONENT_LEN, MODES, PATTERN_LEN};
pub use pca::{canonicalize, fit_pca, PcaModel, MIN_PCA_PATTERNS, PCA_FORMAT_VERSION};
pub use series::{
    path_correlation_series, position_in_arm, steady_position_tracker, steady_position_tracker_in, CorrelationPoint,
    TrackedPosition, STEADY_LAGS_MS, STEADY_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("correlation is undefined for a zero stress pattern")]
    ZeroPattern,
    #[error("covariance of the training patterns is degenerate")]
    DegenerateCovariance,
    #[error("robot of radius {r} does not fit in a vessel of diameter {d}")]
    NoRoom { d: f64, r: f64 },
    #[error("relative position {0} exceeds 1")]
    OutOfRange(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed model file: {0}")]
    Format(String),
}

/// Smallest 1 − c kept before taking the logarithm.
pub const ONE_MINUS_C_FLOOR: f64 = 1e-12;

/// log(1 − c), clamped at log(1e-12) for numerically steady flow.
pub fn log_one_minus(c: f64) -> f64 {
    (1.0 - c).max(ONE_MINUS_C_FLOOR).ln()
}

/// |y_c| / (d/2 − r): 0 on the centerline, 1 in wall contact.
pub fn relative_position(y_c: f64, d: f64, r: f64) -> Result<f64, FeatureError> {
    let room = 0.5 * d - r;
    if !(room > 0.0) {
        return Err(FeatureError::NoRoom { d, r });
    }
    let rho = y_c.abs() / room;
    if rho > 1.0 + 1e-9 {
        return Err(FeatureError::OutOfRange(rho));
    }
    Ok(rho.min(1.0))
}

/// The classifier inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub lc: f64,
    pub rho: f64,
    pub p1: f64,
}

impl FeatureVector {
    pub fn from_correlation(c: f64, rho: f64, p1: f64) -> Self {
        Self {
            lc: log_one_minus(c),
            rho,
            p1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relative_position_examples() {
        assert_eq!(relative_position(0.0, 8.0, 1.0).unwrap(), 0.0);
        assert_eq!(relative_position(3.0, 8.0, 1.0).unwrap(), 1.0);
        assert_eq!(relative_position(-3.0, 8.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(relative_position(1.45, 7.8, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(relative_position(0.0, 2.0, 1.0).is_err());
        assert!(relative_position(3.5, 8.0, 1.0).is_err());
    }

    #[test]
    fn clamped_log() {
        assert_eq!(log_one_minus(1.0), ONE_MINUS_C_FLOOR.ln());
        assert_eq!(log_one_minus(1.0 - 1e-13), ONE_MINUS_C_FLOOR.ln());
        assert_relative_eq!(log_one_minus(0.9), 0.1f64.ln(), epsilon = 1e-14);
    }
}

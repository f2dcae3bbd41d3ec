use super::{max_correlation, relative_position, FeatureError};
use crate::geometry::{build_geometry, BoundaryMesh, GeometryError};
use crate::path::PathRecord;

/// Correlation between the patterns at `t` and `t − Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint {
    /// Sample index of the later pattern.
    pub index: usize,
    pub t: f64,
    pub c: f64,
    pub dtheta: f64,
}

fn lag_samples(path: &PathRecord, dt_ms: f64) -> Result<usize, FeatureError> {
    if !(dt_ms > 0.0) || !(path.sample_ms > 0.0) {
        return Err(FeatureError::InvalidInput(
            "lag and sampling interval must be positive".into(),
        ));
    }
    let ratio = dt_ms / path.sample_ms;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 {
        return Err(FeatureError::InvalidInput(format!(
            "lag {dt_ms} ms is not a multiple of the {} ms sampling interval",
            path.sample_ms
        )));
    }
    Ok(k as usize)
}

/// c(t, Δt) for every sample with a partner Δt earlier. Paths shorter than
/// the lag give an empty series.
pub fn path_correlation_series(path: &PathRecord, dt_ms: f64) -> Result<Vec<CorrelationPoint>, FeatureError> {
    let k = lag_samples(path, dt_ms)?;
    let s = &path.samples;
    (k..s.len())
        .map(|i| {
            let (c, dtheta) = max_correlation(&s[i].pattern, &s[i - k].pattern)?;
            Ok(CorrelationPoint {
                index: i,
                t: s[i].t,
                c,
                dtheta,
            })
        })
        .collect()
}

/// Lags of the steadiness test, ms.
pub const STEADY_LAGS_MS: [f64; 3] = [5.0, 10.0, 20.0];
pub const STEADY_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedPosition {
    /// Last relative position taken while the flow looked steady.
    pub rho_saved: f64,
    /// Ground-truth relative position, when the robot is inside an arm.
    pub rho_now: Option<f64>,
    pub arm: Option<usize>,
    pub steady: bool,
}

/// Ground-truth arm index and relative position of a center.
pub fn position_in_arm(outline: &BoundaryMesh, center: crate::geometry::Vec2, r: f64) -> Option<(usize, f64, f64)> {
    let pos = outline.locate(center)?;
    let rho = relative_position(pos.offset, pos.diameter, r).ok()?;
    Some((pos.arm, rho, pos.diameter))
}

/// Relative position held over the path, refreshed only while every
/// correlation over the steadiness lags stays at or above the threshold.
pub fn steady_position_tracker(path: &PathRecord) -> Result<Vec<TrackedPosition>, GeometryError> {
    let outline = build_geometry(&path.scenario.vessel)?;
    Ok(steady_position_tracker_in(path, &outline))
}

pub fn steady_position_tracker_in(path: &PathRecord, outline: &BoundaryMesh) -> Vec<TrackedPosition> {
    let lags: Vec<usize> = STEADY_LAGS_MS
        .iter()
        .filter_map(|&dt| lag_samples(path, dt).ok())
        .collect();
    let s = &path.samples;
    let mut saved = s
        .first()
        .and_then(|first| position_in_arm(outline, first.robot.center, first.robot.radius))
        .map_or(0.0, |p| p.1);
    s.iter()
        .enumerate()
        .map(|(i, sample)| {
            let steady = lags.iter().filter(|&&k| i >= k).all(|&k| {
                max_correlation(&sample.pattern, &s[i - k].pattern).is_ok_and(|(c, _)| c >= STEADY_THRESHOLD)
            });
            let here = position_in_arm(outline, sample.robot.center, sample.robot.radius);
            if steady {
                if let Some((_, rho, _)) = here {
                    saved = rho;
                }
            }
            TrackedPosition {
                rho_saved: saved,
                rho_now: here.map(|p| p.1),
                arm: here.map(|p| p.0),
                steady,
            }
        })
        .collect()
}

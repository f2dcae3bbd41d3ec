//! Logistic branch classifier on correlation, relative position and the
//! first principal component of the stress pattern.

mod evaluate;
mod logistic;
mod pipeline;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{path_correlation_series, position_in_arm, FeatureError, FeatureVector, PcaModel};
use crate::geometry::{build_geometry, GeometryError};
use crate::path::{PathLabel, PathRecord};

pub use evaluate::{
    classify_online, detection_position_analysis, evaluate_path, mean_and_se, noise_study, post_pass_verification,
    roc_auc, ClassifierOutcome, DetectionRow, DetectionSummary, DirectionStats, NoiseRow, NoiseTarget, OnlinePoint,
    PathEvaluation, PostPass, RocCurve, RocPoint, HIGH_TPF,
};
pub use logistic::{train_logistic, FitReport, L2_FALLBACK};
pub use pipeline::{evaluate_pipeline, roc_of, train_pipeline, EvaluationReport, TrainedModel};

pub const PARAMS_FORMAT_VERSION: u32 = 1;
/// Default correlation lag, ms.
pub const DEFAULT_DT_CORR_MS: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PARAM_NAMES: [&str; 6] = ["beta0", "beta1", "beta2", "beta11", "beta22", "beta3"];

/// Coefficients of b = β0 + β1·lc + β2·ρ + β11·lc² + β22·ρ² + β3·p1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionParams {
    pub beta: [f64; 6],
    pub standard_errors: [f64; 6],
    /// Set when the fit needed the ridge fallback.
    pub penalized: bool,
}

impl RegressionParams {
    pub fn new(beta: [f64; 6]) -> Self {
        Self {
            beta,
            standard_errors: [0.0; 6],
            penalized: false,
        }
    }

    /// Reference coefficients with their standard errors.
    pub fn reference() -> Self {
        Self {
            beta: [-0.8, -1.7, 9.0, -0.97, 6.8, 11.6],
            standard_errors: [0.7, 0.6, 1.8, 0.11, 2.3, 0.8],
            penalized: false,
        }
    }

    pub fn logit(&self, f: &FeatureVector) -> f64 {
        let b = &self.beta;
        b[0] + b[1] * f.lc + b[2] * f.rho + b[3] * f.lc * f.lc + b[4] * f.rho * f.rho + b[5] * f.p1
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "format_version,{PARAMS_FORMAT_VERSION}")?;
        writeln!(out, "penalized,{}", self.penalized)?;
        writeln!(out, "name,value,standard_error")?;
        for ((name, v), se) in PARAM_NAMES.iter().zip(&self.beta).zip(&self.standard_errors) {
            writeln!(out, "{name},{v},{se}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, ClassifierError> {
        let lines: Vec<String> = input.lines().collect::<Result<_, _>>()?;
        let bad = |m: &str| ClassifierError::Format(m.to_string());
        let mut it = lines.iter().filter(|l| !l.trim().is_empty());
        let version = it
            .next()
            .and_then(|l| l.strip_prefix("format_version,"))
            .ok_or_else(|| bad("missing format_version"))?;
        if version.trim() != PARAMS_FORMAT_VERSION.to_string() {
            return Err(ClassifierError::Format(format!(
                "unsupported parameter format version {version}"
            )));
        }
        let penalized = match it.next().and_then(|l| l.strip_prefix("penalized,")).map(str::trim) {
            Some("true") => true,
            Some("false") => false,
            _ => return Err(bad("missing penalized flag")),
        };
        if it.next().map(|l| l.trim()) != Some("name,value,standard_error") {
            return Err(bad("missing column header"));
        }
        let mut params = Self::new([0.0; 6]);
        params.penalized = penalized;
        for (k, name) in PARAM_NAMES.iter().enumerate() {
            let line = it.next().ok_or_else(|| bad("too few parameters"))?;
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 || f[0] != *name {
                return Err(ClassifierError::Format(format!("expected row {name}, got {line:?}")));
            }
            params.beta[k] = f[1].parse().map_err(|_| bad("bad value"))?;
            params.standard_errors[k] = f[2].parse().map_err(|_| bad("bad standard error"))?;
        }
        if params
            .beta
            .iter()
            .chain(&params.standard_errors)
            .any(|v| !v.is_finite())
        {
            return Err(bad("non-finite parameter"));
        }
        Ok(params)
    }
}

/// Branch probability 1 / (1 + e^{−b}).
pub fn p_branch(features: &FeatureVector, params: &RegressionParams) -> f64 {
    sigmoid(params.logit(features))
}

pub fn sigmoid(b: f64) -> f64 {
    if b >= 0.0 {
        1.0 / (1.0 + (-b).exp())
    } else {
        let e = b.exp();
        e / (1.0 + e)
    }
}

/// Logit of a probability threshold; 0 and 1 map to ∓∞.
pub fn threshold_logit(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        (p / (1.0 - p)).ln()
    }
}

/// Training features of a path: the smallest correlation along it, the
/// relative position at its start, and p1 of the pattern where the
/// correlation is smallest. Ties go to the earliest time.
pub fn extract_training_features(
    path: &PathRecord,
    dt_corr_ms: f64,
    pca: &PcaModel,
) -> Result<(FeatureVector, PathLabel), ClassifierError> {
    let (c, index) = min_correlation(path, dt_corr_ms)?;
    let p1 = pca.project(&path.samples[index].pattern)?;
    let rho = start_position(path)?;
    Ok((FeatureVector::from_correlation(c, rho, p1), path.label))
}

/// Smallest c(t, Δt) along the path and the index of its later sample.
pub fn min_correlation(path: &PathRecord, dt_corr_ms: f64) -> Result<(f64, usize), ClassifierError> {
    let series = path_correlation_series(path, dt_corr_ms)?;
    let mut best: Option<(f64, usize)> = None;
    for p in &series {
        if best.is_none_or(|b| p.c < b.0) {
            best = Some((p.c, p.index));
        }
    }
    best.ok_or_else(|| ClassifierError::InvalidInput("path is shorter than the correlation lag".into()))
}

/// Relative position of the first sample in its arm.
pub fn start_position(path: &PathRecord) -> Result<f64, ClassifierError> {
    let first = path
        .samples
        .first()
        .ok_or_else(|| ClassifierError::InvalidInput("empty path".into()))?;
    let outline = build_geometry(&path.scenario.vessel)?;
    position_in_arm(&outline, first.robot.center, first.robot.radius)
        .map(|p| p.1)
        .ok_or_else(|| ClassifierError::InvalidInput("path does not start inside a straight arm".into()))
}

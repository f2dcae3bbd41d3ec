use super::{
    detection_position_analysis, evaluate_path, min_correlation, roc_auc, start_position, train_logistic,
    ClassifierError, DetectionSummary, FitReport, PathEvaluation, RegressionParams, RocCurve,
};
use crate::features::{fit_pca, FeatureVector, PcaModel};
use crate::path::{Direction, PathLabel, PathRecord};

/// PCA and logistic model fitted to one training split.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub pca: PcaModel,
    pub fit: FitReport,
    /// Training inputs in path order.
    pub features: Vec<FeatureVector>,
    pub labels: Vec<PathLabel>,
}

/// Fits the principal direction to the stress patterns at each training
/// path's smallest correlation, orients it so branches score higher on
/// average, then fits the logistic model.
pub fn train_pipeline(paths: &[&PathRecord], dt_corr_ms: f64) -> Result<TrainedModel, ClassifierError> {
    let mut minima = Vec::with_capacity(paths.len());
    for path in paths {
        let (c, index) = min_correlation(path, dt_corr_ms)?;
        minima.push((c, path.samples[index].pattern, start_position(path)?));
    }
    let patterns: Vec<_> = minima.iter().map(|m| m.1).collect();
    let mut pca = fit_pca(&patterns)?;
    let (branch, curve): (Vec<_>, Vec<_>) = paths
        .iter()
        .zip(&patterns)
        .partition(|(p, _)| p.label == PathLabel::Branch);
    let branch: Vec<_> = branch.into_iter().map(|(_, s)| *s).collect();
    let curve: Vec<_> = curve.into_iter().map(|(_, s)| *s).collect();
    pca.orient(&branch, &curve)?;
    let features = minima
        .iter()
        .map(|(c, pattern, rho)| Ok(FeatureVector::from_correlation(*c, *rho, pca.project(pattern)?)))
        .collect::<Result<Vec<_>, ClassifierError>>()?;
    let labels: Vec<PathLabel> = paths.iter().map(|p| p.label).collect();
    let is_branch: Vec<bool> = labels.iter().map(|&l| l == PathLabel::Branch).collect();
    let fit = train_logistic(&features, &is_branch)?;
    Ok(TrainedModel {
        pca,
        fit,
        features,
        labels,
    })
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub evaluations: Vec<PathEvaluation>,
    /// All test paths.
    pub roc: RocCurve,
    /// Forward branch paths against the curves.
    pub roc_forward: RocCurve,
    /// Reversed branch paths against the curves.
    pub roc_reverse: RocCurve,
    pub detection: DetectionSummary,
}

/// ROC of per-path maximum logits over the evaluations `keep` selects.
pub fn roc_of(evals: &[PathEvaluation], keep: impl Fn(&PathEvaluation) -> bool) -> Result<RocCurve, ClassifierError> {
    let chosen: Vec<&PathEvaluation> = evals.iter().filter(|e| keep(e)).collect();
    let scores: Vec<f64> = chosen.iter().map(|e| e.max_logit()).collect();
    let positives: Vec<bool> = chosen.iter().map(|e| e.is_branch()).collect();
    roc_auc(&scores, &positives)
}

pub fn evaluate_pipeline(
    paths: &[&PathRecord],
    params: &RegressionParams,
    pca: &PcaModel,
    dt_corr_ms: f64,
) -> Result<EvaluationReport, ClassifierError> {
    let evaluations = paths
        .iter()
        .map(|p| evaluate_path(p, params, pca, dt_corr_ms))
        .collect::<Result<Vec<_>, _>>()?;
    let roc = roc_of(&evaluations, |_| true)?;
    let roc_forward = roc_of(&evaluations, |e| !e.is_branch() || e.direction == Direction::Forward)?;
    let roc_reverse = roc_of(&evaluations, |e| !e.is_branch() || e.direction == Direction::Reverse)?;
    let detection = detection_position_analysis(&evaluations, None)?;
    Ok(EvaluationReport {
        evaluations,
        roc,
        roc_forward,
        roc_reverse,
        detection,
    })
}

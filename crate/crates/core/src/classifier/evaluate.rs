use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{threshold_logit, ClassifierError, RegressionParams};
use crate::features::{
    log_one_minus, path_correlation_series, position_in_arm, steady_position_tracker_in, FeatureVector, PcaModel,
};
use crate::geometry::build_geometry;
use crate::path::{Direction, PathLabel, PathRecord};

/// One online evaluation of the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlinePoint {
    pub index: usize,
    pub t: f64,
    /// Distance travelled so far over the whole path length.
    pub fraction: f64,
    pub c: f64,
    pub rho_saved: f64,
    pub p1: f64,
    pub logit: f64,
}

impl OnlinePoint {
    pub fn features(&self) -> FeatureVector {
        FeatureVector::from_correlation(self.c, self.rho_saved, self.p1)
    }

    pub fn p_branch(&self) -> f64 {
        super::sigmoid(self.logit)
    }
}

/// The classifier evaluated at every sample of a path that has a partner
/// one correlation lag earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEvaluation {
    pub label: PathLabel,
    pub direction: Direction,
    pub points: Vec<OnlinePoint>,
}

impl PathEvaluation {
    /// Largest logit along the path; −∞ when nothing was evaluable.
    pub fn max_logit(&self) -> f64 {
        self.points.iter().map(|p| p.logit).fold(f64::NEG_INFINITY, f64::max)
    }

    /// First point whose logit exceeds `logit_threshold`.
    pub fn first_crossing(&self, logit_threshold: f64) -> Option<&OnlinePoint> {
        self.points.iter().find(|p| p.logit > logit_threshold)
    }

    pub fn is_branch(&self) -> bool {
        self.label == PathLabel::Branch
    }

    /// Same inputs, rescored with other parameters.
    pub fn rescored(&self, params: &RegressionParams) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.logit = params.logit(&p.features());
        }
        out
    }
}

pub fn evaluate_path(
    path: &PathRecord,
    params: &RegressionParams,
    pca: &PcaModel,
    dt_corr_ms: f64,
) -> Result<PathEvaluation, ClassifierError> {
    let outline = build_geometry(&path.scenario.vessel)?;
    let series = path_correlation_series(path, dt_corr_ms)?;
    let tracker = steady_position_tracker_in(path, &outline);
    let arc = path.arc_lengths();
    let total = arc.last().copied().unwrap_or(0.0);
    let mut points = Vec::with_capacity(series.len());
    for cp in series {
        let p1 = pca.project(&path.samples[cp.index].pattern)?;
        let rho_saved = tracker[cp.index].rho_saved;
        let fraction = if total > 0.0 { arc[cp.index] / total } else { 0.0 };
        let f = FeatureVector::from_correlation(cp.c, rho_saved, p1);
        points.push(OnlinePoint {
            index: cp.index,
            t: cp.t,
            fraction,
            c: cp.c,
            rho_saved,
            p1,
            logit: params.logit(&f),
        });
    }
    Ok(PathEvaluation {
        label: path.label,
        direction: path.direction(),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOutcome {
    pub label_true: PathLabel,
    pub detected: bool,
    /// Path fraction at the first threshold crossing; `None` when never crossed.
    pub first_crossing_fraction: Option<f64>,
    pub max_pbranch: f64,
}

impl ClassifierOutcome {
    pub fn from_evaluation(eval: &PathEvaluation, threshold: f64) -> Self {
        let crossing = eval.first_crossing(threshold_logit(threshold)).map(|p| p.fraction);
        Self {
            label_true: eval.label,
            detected: crossing.is_some(),
            first_crossing_fraction: crossing,
            max_pbranch: super::sigmoid(eval.max_logit()),
        }
    }
}

/// Walks the path in time order and reports where P_branch first exceeds
/// `threshold`.
pub fn classify_online(
    path: &PathRecord,
    params: &RegressionParams,
    pca: &PcaModel,
    threshold: f64,
    dt_corr_ms: f64,
) -> Result<ClassifierOutcome, ClassifierError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ClassifierError::InvalidInput(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let eval = evaluate_path(path, params, pca, dt_corr_ms)?;
    Ok(ClassifierOutcome::from_evaluation(&eval, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Score threshold; a path counts as detected when its score is at least this.
    pub threshold: f64,
    pub tpf: f64,
    pub fpf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// From (0, 0) to (1, 1), nondecreasing in both fractions.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve over every distinct score, with the area by the trapezoid
/// rule. Scores are per-path maxima, so any increasing transform of
/// P_branch (the logit, say) gives the same curve.
pub fn roc_auc(scores: &[f64], positives: &[bool]) -> Result<RocCurve, ClassifierError> {
    if scores.len() != positives.len() {
        return Err(ClassifierError::InvalidInput(
            "scores and labels differ in length".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(ClassifierError::InvalidInput("NaN score".into()));
    }
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ClassifierError::InvalidInput("ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        tpf: 0.0,
        fpf: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positives[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: s,
            tpf: tp as f64 / n_pos as f64,
            fpf: fp as f64 / n_neg as f64,
        });
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpf - w[0].fpf) * 0.5 * (w[1].tpf + w[0].tpf))
        .sum();
    Ok(RocCurve { points, auc })
}

/// Detection statistics of one direction at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionStats {
    pub tpf: f64,
    pub detected: usize,
    pub mean_fraction: f64,
    pub se_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRow {
    pub logit_threshold: f64,
    pub forward: DirectionStats,
    pub reverse: DirectionStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSummary {
    pub rows: Vec<DetectionRow>,
    /// Mean over thresholds where both directions reach 80% true positives
    /// of (reverse − forward) mean first-crossing fraction.
    pub gap_at_high_tpf: Option<f64>,
    pub rows_at_high_tpf: usize,
}

pub const HIGH_TPF: f64 = 0.8;

fn direction_stats(evals: &[&PathEvaluation], logit_threshold: f64) -> DirectionStats {
    let fractions: Vec<f64> = evals
        .iter()
        .filter_map(|e| e.first_crossing(logit_threshold).map(|p| p.fraction))
        .collect();
    let n = fractions.len();
    let (mean, se) = mean_and_se(&fractions);
    DirectionStats {
        tpf: if evals.is_empty() {
            0.0
        } else {
            n as f64 / evals.len() as f64
        },
        detected: n,
        mean_fraction: mean,
        se_fraction: se,
    }
}

/// Mean and standard error of the mean; NaN mean for an empty set and zero
/// error below two values.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    // Offset by the first value so identical inputs give it back exactly.
    let mean = v[0] + v.iter().map(|x| x - v[0]).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// First-crossing fraction of Forward and Reverse branch paths over a set
/// of logit thresholds. Without explicit thresholds every distinct
/// per-path maximum logit of the branch paths is used.
pub fn detection_position_analysis(
    evals: &[PathEvaluation],
    logit_thresholds: Option<&[f64]>,
) -> Result<DetectionSummary, ClassifierError> {
    let forward: Vec<&PathEvaluation> = evals
        .iter()
        .filter(|e| e.is_branch() && e.direction == Direction::Forward)
        .collect();
    let reverse: Vec<&PathEvaluation> = evals
        .iter()
        .filter(|e| e.is_branch() && e.direction == Direction::Reverse)
        .collect();
    if forward.is_empty() || reverse.is_empty() {
        return Err(ClassifierError::InvalidInput(
            "detection analysis needs branch paths in both directions".into(),
        ));
    }
    let thresholds: Vec<f64> = match logit_thresholds {
        Some(t) => t.to_vec(),
        None => {
            // Just below each maximum so that the path attaining it counts.
            let mut t: Vec<f64> = forward
                .iter()
                .chain(&reverse)
                .map(|e| e.max_logit())
                .filter(|v| v.is_finite())
                .map(|v| v - 1e-9 * v.abs().max(1.0))
                .collect();
            t.sort_by(f64::total_cmp);
            t.dedup();
            t
        }
    };
    let rows: Vec<DetectionRow> = thresholds
        .iter()
        .map(|&thr| DetectionRow {
            logit_threshold: thr,
            forward: direction_stats(&forward, thr),
            reverse: direction_stats(&reverse, thr),
        })
        .collect();
    let gaps: Vec<f64> = rows
        .iter()
        .filter(|r| r.forward.tpf >= HIGH_TPF && r.reverse.tpf >= HIGH_TPF)
        .map(|r| r.reverse.mean_fraction - r.forward.mean_fraction)
        .collect();
    Ok(DetectionSummary {
        rows_at_high_tpf: gaps.len(),
        gap_at_high_tpf: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
        rows,
    })
}

/// What the correlation noise multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseTarget {
    /// c itself, as c·(1 + ε).
    Correlation,
    /// The distance from perfect correlation, as (1 − c)·(1 + ε).
    OneMinusCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRow {
    pub sigma: f64,
    pub mean_auc: f64,
    pub se: f64,
}

fn noisy_max_logit(
    eval: &PathEvaluation,
    params: &RegressionParams,
    sigma: f64,
    target: NoiseTarget,
    normal: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for p in &eval.points {
        let f = if sigma == 0.0 {
            p.features()
        } else {
            let mut e = || 1.0 + sigma * normal.sample(rng);
            let c = match target {
                NoiseTarget::Correlation => (p.c * e()).min(1.0),
                NoiseTarget::OneMinusCorrelation => 1.0 - (1.0 - p.c) * e(),
            };
            let rho = p.rho_saved * e();
            let p1 = p.p1 * e();
            FeatureVector {
                lc: log_one_minus(c),
                rho,
                p1,
            }
        };
        best = best.max(params.logit(&f));
    }
    best
}

/// Mean AUC over `reps` noisy copies of the test evaluations for each
/// relative noise level. Each classifier input is multiplied by an
/// independent 1 + ε, ε ~ N(0, σ²), at every evaluation. Rep r of every
/// level draws from stream r of a generator seeded with `seed`.
pub fn noise_study(
    evals: &[PathEvaluation],
    params: &RegressionParams,
    levels: &[f64],
    reps: usize,
    seed: u64,
    target: NoiseTarget,
) -> Result<Vec<NoiseRow>, ClassifierError> {
    if reps == 0 {
        return Err(ClassifierError::InvalidInput(
            "noise study needs at least one rep".into(),
        ));
    }
    if let Some(bad) = levels.iter().find(|s| !(0.0..=0.5).contains(*s)) {
        return Err(ClassifierError::InvalidInput(format!(
            "noise level {bad} outside [0, 0.5]"
        )));
    }
    let positives: Vec<bool> = evals.iter().map(PathEvaluation::is_branch).collect();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows = Vec::with_capacity(levels.len());
    for &sigma in levels {
        let mut aucs = Vec::with_capacity(reps);
        for rep in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let scores: Vec<f64> = evals
                .iter()
                .map(|e| noisy_max_logit(e, params, sigma, target, &normal, &mut rng))
                .map(|s| if s.is_nan() { f64::NEG_INFINITY } else { s })
                .collect();
            aucs.push(roc_auc(&scores, &positives)?.auc);
        }
        let (mean_auc, se) = mean_and_se(&aucs);
        rows.push(NoiseRow { sigma, mean_auc, se });
    }
    Ok(rows)
}

/// Change of position, speed and diameter across the feature a path passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostPass {
    /// ρ after minus ρ before.
    pub delta_rho: f64,
    /// Speed after over speed before.
    pub speed_ratio: f64,
    /// Local diameter after over diameter before.
    pub diameter_ratio: f64,
    pub before_index: usize,
    pub after_index: usize,
}

/// Compares the last steady sample of the run that opens the path in its
/// first arm with the first steady sample of the run that closes it in its
/// last arm. A path that is steady throughout (a straight vessel) compares
/// its end points. `None` when the path does not end steady inside an arm.
pub fn post_pass_verification(path: &PathRecord) -> Result<Option<PostPass>, ClassifierError> {
    let outline = build_geometry(&path.scenario.vessel)?;
    let tracked = steady_position_tracker_in(path, &outline);
    let s = &path.samples;
    let n = s.len();
    if n < 2 {
        return Ok(None);
    }
    let (Some(first_arm), Some(last_arm)) = (tracked[0].arm, tracked[n - 1].arm) else {
        return Ok(None);
    };
    let ok = |i: usize, arm: usize| tracked[i].steady && tracked[i].arm == Some(arm);
    if !ok(n - 1, last_arm) {
        return Ok(None);
    }
    let prefix_end = (0..n)
        .take_while(|&i| tracked[i].arm == Some(first_arm))
        .filter(|&i| ok(i, first_arm))
        .last();
    let Some(mut before) = prefix_end else {
        return Ok(None);
    };
    let mut after = (0..n).rev().take_while(|&i| ok(i, last_arm)).last().unwrap_or(n - 1);
    if after <= before {
        before = 0;
        after = n - 1;
    }
    let here = |i: usize| position_in_arm(&outline, s[i].robot.center, s[i].robot.radius);
    let (Some((_, rho_b, d_b)), Some((_, rho_a, d_a))) = (here(before), here(after)) else {
        return Ok(None);
    };
    let (v_b, v_a) = (s[before].motion.speed(), s[after].motion.speed());
    if !(v_b > 0.0) {
        return Ok(None);
    }
    Ok(Some(PostPass {
        delta_rho: rho_a - rho_b,
        speed_ratio: v_a / v_b,
        diameter_ratio: d_a / d_b,
        before_index: before,
        after_index: after,
    }))
}

//! Delimited text tables. Every file opens with a format-version comment.

use std::io::{Result, Write};

use stressnav::classifier::{
    sigmoid, ClassifierOutcome, DetectionSummary, NoiseRow, PathEvaluation, PostPass, RocCurve, PARAM_NAMES,
};
use stressnav::features::CorrelationPoint;
use stressnav::{FeatureVector, PathLabel, RegressionParams, TractionField};

pub const TABLE_FORMAT_VERSION: u32 = 1;

fn header<W: Write>(out: &mut W, columns: &str) -> Result<()> {
    writeln!(out, "# format_version={TABLE_FORMAT_VERSION}")?;
    writeln!(out, "{columns}")
}

fn label(l: PathLabel) -> &'static str {
    match l {
        PathLabel::Branch => "branch",
        PathLabel::Curve => "curve",
        PathLabel::Straight => "straight",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn training_features<W: Write>(out: &mut W, features: &[FeatureVector], labels: &[PathLabel]) -> Result<()> {
    header(out, "label,lc,rho,p1")?;
    for (f, l) in features.iter().zip(labels) {
        writeln!(out, "{},{},{},{}", label(*l), f.lc, f.rho, f.p1)?;
    }
    Ok(())
}

pub fn parameter_table<W: Write>(out: &mut W, params: &RegressionParams) -> Result<()> {
    writeln!(out, "{:<8} {:>10} {:>10}", "param", "value", "std.err")?;
    for ((name, v), se) in PARAM_NAMES.iter().zip(&params.beta).zip(&params.standard_errors) {
        writeln!(out, "{name:<8} {v:>10.3} {se:>10.3}")?;
    }
    Ok(())
}

pub fn correlation_series<W: Write>(out: &mut W, series: &[CorrelationPoint]) -> Result<()> {
    header(out, "t_ms,c,dtheta_rad")?;
    for p in series {
        writeln!(out, "{},{},{}", p.t, p.c, p.dtheta)?;
    }
    Ok(())
}

pub fn pbranch_trace<W: Write>(out: &mut W, eval: &PathEvaluation) -> Result<()> {
    header(out, "t_ms,path_fraction,c,rho_saved,p1,logit,p_branch")?;
    for p in &eval.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.t,
            p.fraction,
            p.c,
            p.rho_saved,
            p.p1,
            p.logit,
            p.p_branch()
        )?;
    }
    Ok(())
}

/// Thresholds are per-path maximum logits; the probability column
/// saturates at 1 where the logit is large.
pub fn roc_table<W: Write>(out: &mut W, curves: &[(&str, &RocCurve)]) -> Result<()> {
    header(out, "set,threshold_logit,threshold_p,tpf,fpf")?;
    for (name, curve) in curves {
        for p in &curve.points {
            writeln!(
                out,
                "{name},{},{},{},{}",
                p.threshold,
                sigmoid(p.threshold),
                p.tpf,
                p.fpf
            )?;
        }
    }
    for (name, curve) in curves {
        writeln!(out, "# auc {name} {}", curve.auc)?;
    }
    Ok(())
}

pub fn detection_table<W: Write>(out: &mut W, summary: &DetectionSummary) -> Result<()> {
    header(
        out,
        "threshold_logit,forward_tpf,forward_mean_fraction,forward_se,reverse_tpf,reverse_mean_fraction,reverse_se",
    )?;
    let num = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    for r in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.logit_threshold,
            r.forward.tpf,
            num(r.forward.mean_fraction),
            num(r.forward.se_fraction),
            r.reverse.tpf,
            num(r.reverse.mean_fraction),
            num(r.reverse.se_fraction)
        )?;
    }
    writeln!(out, "# gap_at_tpf_0.8 {}", opt(summary.gap_at_high_tpf))
}

pub fn outcome_table<W: Write>(
    out: &mut W,
    ids: &[&str],
    evals: &[PathEvaluation],
    outcomes: &[ClassifierOutcome],
    threshold: f64,
) -> Result<()> {
    header(
        out,
        "id,label,direction,max_logit,max_pbranch,detected,first_crossing_fraction",
    )?;
    writeln!(out, "# threshold {threshold}")?;
    for ((id, e), o) in ids.iter().zip(evals).zip(outcomes) {
        writeln!(
            out,
            "{id},{},{:?},{},{},{},{}",
            label(o.label_true),
            e.direction,
            e.max_logit(),
            o.max_pbranch,
            o.detected,
            opt(o.first_crossing_fraction)
        )?;
    }
    Ok(())
}

pub fn post_pass_table<W: Write>(out: &mut W, rows: &[(&str, PathLabel, Option<PostPass>)]) -> Result<()> {
    header(out, "id,label,delta_rho,speed_ratio,diameter_ratio")?;
    for (id, l, p) in rows {
        match p {
            Some(p) => writeln!(
                out,
                "{id},{},{},{},{}",
                label(*l),
                p.delta_rho,
                p.speed_ratio,
                p.diameter_ratio
            )?,
            None => writeln!(out, "{id},{},,,", label(*l))?,
        }
    }
    Ok(())
}

pub fn noise_table<W: Write>(out: &mut W, rows: &[NoiseRow]) -> Result<()> {
    header(out, "sigma_rel,mean_auc,standard_error")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.sigma, r.mean_auc, r.se)?;
    }
    Ok(())
}

pub fn stress_vectors<W: Write>(out: &mut W, t: &TractionField) -> Result<()> {
    header(out, "angle_rad,sx_pa,sy_pa,normal_pa,tangential_pa")?;
    for ((a, s), (n, tg)) in t.angles.iter().zip(&t.stress).zip(t.normal_tangential()) {
        writeln!(out, "{a},{},{},{n},{tg}", s.x, s.y)?;
    }
    Ok(())
}

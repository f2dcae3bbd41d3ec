use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::pattern::{StressPattern, PATTERN_LEN};
use super::FeatureError;

pub const PCA_FORMAT_VERSION: u32 = 1;
pub const MIN_PCA_PATTERNS: usize = 30;

/// First principal component of canonicalized stress patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub format_version: u32,
    pub mean: Vec<f64>,
    pub pc1: Vec<f64>,
    /// Variance of the training patterns along `pc1`.
    pub variance: f64,
    /// True once the sign has been fixed from class means; `flipped`
    /// records whether that reversed the raw eigenvector.
    pub oriented: bool,
    pub flipped: bool,
}

/// Turns a pattern so its mode-1 normal coefficient is real and positive,
/// then scales the 26-vector to unit length.
pub fn canonicalize(p: &StressPattern) -> Result<StressPattern, FeatureError> {
    let (re, im) = p.mode(0, 1);
    let turned = if re.hypot(im) > 0.0 { p.rotate(im.atan2(re)) } else { *p };
    let n = turned.coeff_norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(FeatureError::ZeroPattern);
    }
    Ok(turned.scale(1.0 / n))
}

pub fn fit_pca(patterns: &[StressPattern]) -> Result<PcaModel, FeatureError> {
    if patterns.len() < MIN_PCA_PATTERNS {
        return Err(FeatureError::InvalidInput(format!(
            "PCA needs at least {MIN_PCA_PATTERNS} patterns, got {}",
            patterns.len()
        )));
    }
    let rows: Vec<StressPattern> = patterns.iter().map(canonicalize).collect::<Result<_, _>>()?;
    let n = rows.len() as f64;
    let mut mean = DVector::<f64>::zeros(PATTERN_LEN);
    for r in &rows {
        mean += DVector::from_column_slice(&r.coeffs);
    }
    mean /= n;
    let mut cov = DMatrix::<f64>::zeros(PATTERN_LEN, PATTERN_LEN);
    for r in &rows {
        let x = DVector::from_column_slice(&r.coeffs) - &mean;
        cov.ger(1.0, &x, &x, 1.0);
    }
    cov /= n - 1.0;

    let eig = SymmetricEigen::new(cov.clone());
    let (imax, &lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    if !(lmax > 1e-14) {
        return Err(FeatureError::DegenerateCovariance);
    }
    let mut v = eig.eigenvectors.column(imax).into_owned();
    v /= v.norm();
    // Deterministic raw sign: largest-magnitude entry positive.
    let lead = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if lead < 0.0 {
        v = -v;
    }
    Ok(PcaModel {
        format_version: PCA_FORMAT_VERSION,
        mean: mean.iter().copied().collect(),
        pc1: v.iter().copied().collect(),
        variance: lmax,
        oriented: false,
        flipped: false,
    })
}

impl PcaModel {
    pub fn project(&self, p: &StressPattern) -> Result<f64, FeatureError> {
        Ok(self.score(&canonicalize(p)?.coeffs))
    }

    /// Score of an already canonical coefficient vector.
    pub fn score(&self, coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .zip(&self.mean)
            .zip(&self.pc1)
            .map(|((x, m), w)| (x - m) * w)
            .sum()
    }

    /// Fixes the sign so the mean score of `positive` is at least that of
    /// `negative`.
    pub fn orient(&mut self, positive: &[StressPattern], negative: &[StressPattern]) -> Result<(), FeatureError> {
        let mean = |ps: &[StressPattern]| -> Result<f64, FeatureError> {
            if ps.is_empty() {
                return Err(FeatureError::InvalidInput(
                    "orientation needs patterns of both classes".into(),
                ));
            }
            let s: f64 = ps.iter().map(|p| self.project(p)).sum::<Result<f64, _>>()?;
            Ok(s / ps.len() as f64)
        };
        let (mp, mn) = (mean(positive)?, mean(negative)?);
        if mp < mn {
            self.pc1.iter_mut().for_each(|v| *v = -*v);
            self.flipped = !self.flipped;
        }
        self.oriented = true;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, FeatureError> {
        let model: PcaModel = serde_json::from_reader(input).map_err(|e| FeatureError::Format(e.to_string()))?;
        if model.format_version != PCA_FORMAT_VERSION {
            return Err(FeatureError::Format(format!(
                "unsupported PCA format version {}",
                model.format_version
            )));
        }
        if model.mean.len() != PATTERN_LEN || model.pc1.len() != PATTERN_LEN {
            return Err(FeatureError::Format("PCA vectors must have 26 entries".into()));
        }
        Ok(model)
    }
}

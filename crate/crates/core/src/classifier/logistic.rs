use nalgebra::{DMatrix, DVector};

use super::{ClassifierError, RegressionParams};
use crate::features::FeatureVector;

/// Ridge strength used when the classes are separable.
pub const L2_FALLBACK: f64 = 1e-3;

const MAX_ITER: usize = 200;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: RegressionParams,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub iterations: usize,
}

fn design_row(f: &FeatureVector) -> [f64; 6] {
    [1.0, f.lc, f.rho, f.lc * f.lc, f.rho * f.rho, f.p1]
}

/// log(1 + e^η) without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y).map(|(&e, &yi)| yi * e - softplus(e)).sum()
}

fn penalty(beta: &DVector<f64>, lambda: f64) -> f64 {
    0.5 * lambda * beta.iter().skip(1).map(|b| b * b).sum::<f64>()
}

struct Fit {
    beta: DVector<f64>,
    info: DMatrix<f64>,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
}

/// Newton steps on the (optionally ridge-penalized) log-likelihood, with
/// step halving whenever the objective would drop.
fn irls(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Fit {
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    let objective = |b: &DVector<f64>| log_likelihood(x, y, b) - penalty(b, lambda);
    let mut current = objective(&beta);
    let mut ridge = DMatrix::<f64>::identity(p, p) * lambda;
    ridge[(0, 0)] = 0.0;
    let mut info = DMatrix::zeros(p, p);
    for it in 1..=MAX_ITER {
        let eta = x * &beta;
        let mu: Vec<f64> = eta.iter().map(|&e| super::sigmoid(e)).collect();
        let mut grad = DVector::zeros(p);
        info.fill(0.0);
        for i in 0..x.nrows() {
            let row = x.row(i);
            let w = mu[i] * (1.0 - mu[i]);
            for a in 0..p {
                grad[a] += (y[i] - mu[i]) * row[a];
                for b in 0..p {
                    info[(a, b)] += w * row[a] * row[b];
                }
            }
        }
        grad -= &ridge * &beta;
        let h = &info + &ridge;
        let Some(step) = h
            .clone()
            .cholesky()
            .map(|c| c.solve(&grad))
            .or_else(|| h.lu().solve(&grad))
        else {
            return Fit {
                beta,
                info: info + ridge,
                log_likelihood: log_likelihood(x, y, &DVector::zeros(p)),
                iterations: it,
                converged: false,
            };
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &beta + &step * t;
            let val = objective(&trial);
            if val.is_finite() && val >= current - 1e-12 * current.abs() {
                accepted = Some((trial, val));
                break;
            }
            t *= 0.5;
        }
        let Some((next, val)) = accepted else {
            break;
        };
        let change = (val - current).abs();
        beta = next;
        current = val;
        if change < TOLERANCE {
            let info = refresh_info(x, &beta) + &ridge;
            return Fit {
                log_likelihood: log_likelihood(x, y, &beta),
                beta,
                info,
                iterations: it,
                converged: true,
            };
        }
    }
    let info = refresh_info(x, &beta) + &ridge;
    Fit {
        log_likelihood: log_likelihood(x, y, &beta),
        beta,
        info,
        iterations: MAX_ITER,
        converged: false,
    }
}

fn refresh_info(x: &DMatrix<f64>, beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = x * beta;
    let mut xw = x.clone();
    for (i, e) in eta.iter().enumerate() {
        let m = super::sigmoid(*e);
        xw.row_mut(i).scale_mut(m * (1.0 - m));
    }
    x.transpose() * xw
}

/// Signs of separation: the fit ran off to very large logits with every
/// training sample classified perfectly, or never converged.
fn separated(x: &DMatrix<f64>, y: &[f64], fit: &Fit) -> bool {
    if !fit.converged || fit.beta.iter().any(|b| !b.is_finite()) {
        return true;
    }
    let eta = x * &fit.beta;
    let perfect = eta.iter().zip(y).all(|(&e, &yi)| (e > 0.0) == (yi > 0.5));
    perfect && eta.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min) > 15.0
}

/// Maximum-likelihood logistic fit of the six-term linear predictor.
/// Separable data fall back to a ridge-penalized fit with `penalized` set.
pub fn train_logistic(features: &[FeatureVector], labels: &[bool]) -> Result<FitReport, ClassifierError> {
    if features.len() != labels.len() {
        return Err(ClassifierError::InvalidInput(
            "features and labels differ in length".into(),
        ));
    }
    if features.len() < 20 {
        return Err(ClassifierError::InvalidInput(format!(
            "training needs at least 20 samples, got {}",
            features.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(ClassifierError::InvalidInput("training needs both classes".into()));
    }
    if features
        .iter()
        .any(|f| !(f.lc.is_finite() && f.rho.is_finite() && f.p1.is_finite()))
    {
        return Err(ClassifierError::InvalidInput("non-finite training feature".into()));
    }
    let rows: Vec<[f64; 6]> = features.iter().map(design_row).collect();
    let x = DMatrix::from_fn(rows.len(), 6, |i, j| rows[i][j]);
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    let mut fit = irls(&x, &y, 0.0);
    let mut penalized = false;
    if separated(&x, &y, &fit) {
        fit = irls(&x, &y, L2_FALLBACK);
        penalized = true;
    }
    let cov = fit
        .info
        .clone()
        .try_inverse()
        .ok_or_else(|| ClassifierError::InvalidInput("information matrix is singular".into()))?;
    let mut params = RegressionParams::new([0.0; 6]);
    for k in 0..6 {
        params.beta[k] = fit.beta[k];
        params.standard_errors[k] = cov[(k, k)].max(0.0).sqrt();
    }
    params.penalized = penalized;
    if params.beta.iter().any(|b| !b.is_finite()) {
        return Err(ClassifierError::InvalidInput("fit diverged".into()));
    }
    let rate = positives as f64 / labels.len() as f64;
    let null = labels.len() as f64 * (rate * rate.ln() + (1.0 - rate) * (1.0 - rate).ln());
    Ok(FitReport {
        params,
        log_likelihood: fit.log_likelihood,
        null_log_likelihood: null,
        iterations: fit.iterations,
    })
}

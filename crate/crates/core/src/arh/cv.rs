use serde::Serialize;

use crate::arh::estimate::{EstimateOptions, Fitted};
use crate::error::{Error, Result};
use crate::hilbert::Curve;
use crate::reginv::RegScheme;
use crate::scalar::Scalar;

/// Default fraction of the sample used before the first forecast origin.
pub const DEFAULT_ORIGIN: f64 = 0.75;

#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub candidates: Vec<RegScheme>,
    /// Mean loss per candidate over all forecast origins.
    pub loss: Vec<f64>,
    pub selected: RegScheme,
    pub selected_index: usize,
    /// Index of the first predicted curve.
    pub first_origin: usize,
    pub folds: usize,
    /// Number of folds in which each candidate's cutoff was lowered to the admissible rank.
    pub clipped: Vec<usize>,
}

fn squared_l2<T: Scalar>(pred: &Curve<T>, truth: &Curve<T>) -> f64 {
    (pred - truth).norm_sq().as_f64()
}

/// Rolling-origin CV with squared L2 loss.
pub fn cross_validate<T: Scalar>(sample: &[Curve<T>], candidates: &[RegScheme], origin: f64, center: bool) -> Result<CvReport> {
    cross_validate_by(sample, candidates, origin, center, |t, pred| squared_l2(pred, &sample[t]))
}

/// Rolling-origin CV: for each `t` from `ceil(origin n)` on, fit on `X_0..X_{t-1}`
/// and score the prediction of `X_t` from `X_{t-1}` with `loss(t, prediction)`.
/// Ties go to the more regularized candidate.
pub fn cross_validate_by<T: Scalar>(
    sample: &[Curve<T>],
    candidates: &[RegScheme],
    origin: f64,
    center: bool,
    loss: impl Fn(usize, &Curve<T>) -> f64,
) -> Result<CvReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate schemes".into()));
    }
    for c in candidates {
        c.validate()?;
    }
    if !(origin > 0.0 && origin < 1.0) {
        return Err(Error::InvalidInput(format!("origin fraction must lie in (0,1), got {origin}")));
    }
    let n = sample.len();
    let first = ((origin * n as f64).ceil() as usize).max(3);
    if first + 5 > n {
        return Err(Error::InvalidInput(format!("{n} curves leave fewer than 5 forecast origins")));
    }
    let mut total = vec![0.0; candidates.len()];
    let mut clipped = vec![0; candidates.len()];
    for t in first..n {
        let fit = Fitted::new(&sample[..t], EstimateOptions { center })?;
        for (j, c) in candidates.iter().enumerate() {
            let eff = fit.clip(*c);
            if eff != *c {
                clipped[j] += 1;
            }
            total[j] += loss(t, &fit.predict(eff, &sample[t - 1]));
        }
    }
    let folds = n - first;
    let loss: Vec<f64> = total.iter().map(|s| s / folds as f64).collect();
    let selected_index = select(candidates, &loss);
    Ok(CvReport { candidates: candidates.to_vec(), selected: candidates[selected_index], selected_index, loss, first_origin: first, folds, clipped })
}

fn select(candidates: &[RegScheme], loss: &[f64]) -> usize {
    let best = loss.iter().cloned().fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * best.abs().max(f64::MIN_POSITIVE);
    (0..candidates.len())
        .filter(|&j| loss[j] - best <= tie)
        .min_by(|&a, &b| candidates[a].regularization_rank().partial_cmp(&candidates[b].regularization_rank()).unwrap())
        .expect("at least one candidate")
}

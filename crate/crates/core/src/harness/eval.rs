use serde::Serialize;

use crate::error::{Error, Result};

/// Forecast errors over the twelve months of a year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mse: f64,
    /// Percent; `None` when some actual value is within 1e-9 of zero.
    pub rmae_percent: Option<f64>,
    pub rmae_undefined: bool,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
}

impl EvalReport {
    /// Recomputes the metrics from the stored values.
    pub fn recompute(&self) -> Result<EvalReport> {
        evaluate(&self.predicted, &self.actual)
    }
}

/// MSE and relative mean absolute error with `|actual|` in the denominator.
pub fn evaluate(predicted: &[f64], actual: &[f64]) -> Result<EvalReport> {
    if predicted.len() != 12 || actual.len() != 12 {
        return Err(Error::InvalidInput(format!("need 12 values each, got {} and {}", predicted.len(), actual.len())));
    }
    if predicted.iter().chain(actual).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in evaluation".into()));
    }
    let mse = predicted.iter().zip(actual).map(|(p, a)| (a - p).powi(2)).sum::<f64>() / 12.0;
    let rmae_undefined = actual.iter().any(|a| a.abs() < 1e-9);
    let rmae_percent =
        (!rmae_undefined).then(|| 100.0 * predicted.iter().zip(actual).map(|(p, a)| (a - p).abs() / a.abs()).sum::<f64>() / 12.0);
    Ok(EvalReport { mse, rmae_percent, rmae_undefined, predicted: predicted.to_vec(), actual: actual.to_vec() })
}

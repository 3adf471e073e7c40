use serde::{Deserialize, Serialize};

use crate::arh::{cross_validate_by, estimate_rho_with, predict, CvReport, EstimateOptions};
use crate::error::{Error, Result};
use crate::harness::data::{at_months, series_to_curves, ScalarSeries, Smoothing};
use crate::harness::eval::{evaluate, EvalReport};
use crate::hilbert::{Curve, Grid};
use crate::reginv::RegScheme;

/// Cited SARIMA errors for the 1986 forecast (MSE, RMAE %).
pub const SARIMA_REFERENCE: (f64, f64) = (1.457, 3.72);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingKind {
    None,
    Spline,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElninoConfig {
    pub smoothing: SmoothingKind,
    /// Roughness penalties tried for the spline fit.
    pub penalties: Vec<f64>,
    /// Scheme used while choosing the penalty.
    pub selection_scheme: RegScheme,
    pub candidates: Vec<RegScheme>,
    pub origin: f64,
    pub center: bool,
    /// Evaluation grid size for smoothed curves.
    pub grid: usize,
    pub test_year: i32,
}

impl Default for ElninoConfig {
    fn default() -> Self {
        let mut candidates: Vec<RegScheme> = (1..=6).map(|k| RegScheme::SpectralCutoff { k }).collect();
        for alpha in [0.01, 0.1, 1.0] {
            candidates.push(RegScheme::Penalized { alpha });
            candidates.push(RegScheme::Tikhonov { alpha });
        }
        ElninoConfig {
            smoothing: SmoothingKind::Spline,
            penalties: (-8..=0).map(|e| 10f64.powi(e)).collect(),
            selection_scheme: RegScheme::SpectralCutoff { k: 3 },
            candidates,
            origin: 0.75,
            center: true,
            grid: 101,
            test_year: 1986,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PenaltyScore {
    pub penalty: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElninoReport {
    pub schema_version: u32,
    pub train_first_year: i32,
    pub train_last_year: i32,
    pub train_curves: usize,
    pub test_year: i32,
    pub smoothing: Smoothing,
    pub penalty_cv: Vec<PenaltyScore>,
    pub scheme_cv: CvReport,
    pub scheme: RegScheme,
    pub eval: EvalReport,
    pub sarima_mse: f64,
    pub sarima_rmae_percent: f64,
    pub beats_sarima: bool,
}

pub struct ElninoOutcome {
    pub report: ElninoReport,
    pub training: Vec<Curve<f64>>,
    pub prediction: Curve<f64>,
}

/// Mean squared monthly error of a predicted yearly curve against the raw values.
fn monthly_loss(pred: &Curve<f64>, raw: &[f64]) -> f64 {
    at_months(pred).iter().zip(raw).map(|(p, a)| (p - a).powi(2)).sum::<f64>() / 12.0
}

/// Fit on every whole year before `test_year`, select smoothing and scheme by rolling CV,
/// forecast `test_year` from the previous year and score it against the raw months.
pub fn elnino_pipeline(series: &ScalarSeries, cfg: &ElninoConfig) -> Result<ElninoOutcome> {
    if cfg.candidates.is_empty() {
        return Err(Error::Config("no candidate schemes".into()));
    }
    let years: Vec<i32> = series.whole_years().into_iter().filter(|&y| y < cfg.test_year).collect();
    let actual = series
        .year(cfg.test_year)
        .ok_or_else(|| Error::InvalidInput(format!("series does not contain all of {}", cfg.test_year)))?
        .to_vec();
    if years.len() < 8 || years.last() != Some(&(cfg.test_year - 1)) {
        return Err(Error::InvalidInput(format!("need at least 8 whole years ending in {}, found {}", cfg.test_year - 1, years.len())));
    }
    if years.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidInput("training years are not consecutive".into()));
    }
    let raw: Vec<Vec<f64>> = years.iter().map(|&y| series.year(y).expect("whole year").to_vec()).collect();
    let grid = Grid::<f64>::uniform(cfg.grid)?;
    let opts = EstimateOptions { center: cfg.center };
    let cv_on = |curves: &[Curve<f64>], cands: &[RegScheme]| {
        cross_validate_by(curves, cands, cfg.origin, cfg.center, |t, pred| monthly_loss(pred, &raw[t]))
    };

    let (smoothing, penalty_cv) = match cfg.smoothing {
        SmoothingKind::None => (Smoothing::None, Vec::new()),
        SmoothingKind::Spline => {
            if cfg.penalties.is_empty() {
                return Err(Error::Config("no smoothing penalties".into()));
            }
            let mut scores = Vec::with_capacity(cfg.penalties.len());
            for &penalty in &cfg.penalties {
                let curves = series_to_curves(series, &years, Smoothing::Spline { penalty }, &grid)?;
                scores.push(PenaltyScore { penalty, loss: cv_on(&curves, &[cfg.selection_scheme])?.loss[0] });
            }
            // ties go to the heavier penalty
            let best = scores
                .iter()
                .min_by(|a, b| a.loss.total_cmp(&b.loss).then(b.penalty.total_cmp(&a.penalty)))
                .expect("nonempty")
                .penalty;
            (Smoothing::Spline { penalty: best }, scores)
        }
    };
    let training = series_to_curves(series, &years, smoothing, &grid)?;
    let scheme_cv = cv_on(&training, &cfg.candidates)?;
    let scheme = scheme_cv.selected;
    let est = estimate_rho_with(&training, scheme, opts)?;
    let prediction = predict(&est, training.last().expect("nonempty"))?;
    let eval = evaluate(&at_months(&prediction), &actual)?;
    let beats_sarima = eval.mse < SARIMA_REFERENCE.0 && eval.rmae_percent.is_some_and(|r| r < SARIMA_REFERENCE.1);
    Ok(ElninoOutcome {
        report: ElninoReport {
            schema_version: crate::harness::io::SCHEMA_VERSION,
            train_first_year: years[0],
            train_last_year: *years.last().unwrap(),
            train_curves: training.len(),
            test_year: cfg.test_year,
            smoothing,
            penalty_cv,
            scheme_cv,
            scheme,
            eval,
            sarima_mse: SARIMA_REFERENCE.0,
            sarima_rmae_percent: SARIMA_REFERENCE.1,
            beats_sarima,
        },
        training,
        prediction,
    })
}

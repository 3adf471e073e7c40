//! ARH(1) estimation, prediction and diagnostics.

pub mod changepoint;
pub mod clt;
pub mod companion;
pub mod cv;
pub mod estimate;

pub use changepoint::{
    changepoint_statistic, changepoint_test, fitted_null, null_distribution, residuals, sample_cusum, simulate_regime_switch,
    ChangepointTest, CusumPath, ResidualSeries,
};
pub use clt::{predictor_clt_experiment, CltExperiment, CltOptions, CltSummary};
pub use companion::{companion_embed, companion_extract, companion_unembed, operator_block};
pub use cv::{cross_validate, cross_validate_by, CvReport, DEFAULT_ORIGIN};
pub use estimate::{estimate_rho, estimate_rho_with, predict, ArhEstimate, EstimateOptions};

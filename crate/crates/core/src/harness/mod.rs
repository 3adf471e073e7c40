//! Data handling, experiment drivers and the command line.

pub mod cli;
pub mod config;
pub mod data;
pub mod elnino;
pub mod eval;
pub mod io;
pub mod mc;

pub use cli::cli_main;
pub use data::{ingest_monthly_csv, series_to_curves, ScalarSeries, Smoothing, SplineBasis};
pub use elnino::{elnino_pipeline, ElninoConfig, ElninoReport, SmoothingKind};
pub use eval::{evaluate, EvalReport};
pub use mc::{mc_lln_rate, mc_mean_clt, LlnReport, MeanCltReport};

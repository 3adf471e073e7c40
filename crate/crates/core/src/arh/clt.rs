use rayon::prelude::*;
use serde::Serialize;

use crate::arh::estimate::{EstimateOptions, Fitted};
use crate::error::{Error, Result};
use crate::hilbert::{Curve, OperatorMatrix};
use crate::moments::empirical_cov;
use crate::reginv::{cutoff_schedule, RegScheme};
use crate::scalar::Scalar;
use crate::sim::{derive_seed, simulate_arh1, ArhSpec};
use crate::stats::normality_test;

#[derive(Debug, Clone, Copy)]
pub struct CltOptions {
    /// Fixed cutoff; `None` uses `cutoff_schedule(n, schedule_c)`.
    pub cutoff: Option<usize>,
    pub schedule_c: f64,
    /// Replications per normality-test batch.
    pub batch: usize,
    pub center: bool,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions { cutoff: None, schedule_c: 1.0, batch: 50, center: false }
    }
}

#[derive(Debug, Clone)]
pub struct CltExperiment<T> {
    /// Empirical covariance of the scaled errors across replications.
    pub scaled_cov: OperatorMatrix<T>,
    pub gamma_eps: OperatorMatrix<T>,
    pub hs_relative_error: f64,
    pub summary: CltSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct CltSummary {
    pub n: usize,
    pub reps: usize,
    /// Cutoff used by each replication (clipped to the admissible rank).
    pub cutoffs: Vec<usize>,
    pub hs_relative_error: f64,
    /// Scores of the scaled error on the leading noise eigenfunction.
    pub e1_scores: Vec<f64>,
    pub e1_variance: f64,
    pub gamma1: f64,
    /// Normality p-value per batch of e1 scores.
    pub batch_p_values: Vec<f64>,
}

/// Replicates `sqrt(n/k) (rho_hat - rho Pi_k) X_{n+1}` and compares its covariance with `Gamma_eps`.
pub fn predictor_clt_experiment<T: Scalar>(
    spec: &ArhSpec<T>,
    n: usize,
    reps: usize,
    opts: CltOptions,
    seed: u64,
) -> Result<CltExperiment<T>> {
    if reps < 2 {
        return Err(Error::InvalidInput("need at least 2 replications".into()));
    }
    let runs: Vec<(usize, Curve<T>)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let xs = simulate_arh1(&spec.with_seed(derive_seed(seed, r)), n + 1)?.sample;
            let fit = Fitted::new(&xs[..n], EstimateOptions { center: opts.center })?;
            let k = opts.cutoff.unwrap_or_else(|| cutoff_schedule(n, opts.schedule_c, None)).min(fit.admissible);
            let x = &xs[n];
            let pred = fit.predict(RegScheme::SpectralCutoff { k }, x);
            let mut proj = Curve::zeros(x.grid());
            for e in &fit.eigens.eigenfunctions()[..k] {
                proj.axpy(e.dot(x), e);
            }
            let target = spec.rho.apply(&proj);
            Ok((k, (&pred - &target).scale(T::of((n as f64 / k as f64).sqrt()))))
        })
        .collect::<Result<_>>()?;
    let (cutoffs, errors): (Vec<usize>, Vec<Curve<T>>) = runs.into_iter().unzip();
    let scaled_cov = empirical_cov(&errors, 0, true)?;
    let gamma_eps = spec.noise.covariance();
    let hs_relative_error = ((&scaled_cov - &gamma_eps).hs_norm() / gamma_eps.hs_norm()).as_f64();
    let e1 = &spec.noise.eigenfunctions[0];
    let e1_scores: Vec<f64> = errors.iter().map(|y| y.dot(e1).as_f64()).collect();
    let e1_variance = crate::stats::variance_se(&e1_scores).mean;
    let batch_p_values = e1_scores
        .chunks(opts.batch.max(1))
        .filter(|c| c.len() >= 20)
        .map(|c| normality_test(c).map(|(_, p)| p))
        .collect::<Result<_>>()?;
    Ok(CltExperiment {
        summary: CltSummary {
            n,
            reps,
            cutoffs,
            hs_relative_error,
            e1_scores,
            e1_variance,
            gamma1: spec.noise.eigenvalues[0].as_f64(),
            batch_p_values,
        },
        scaled_cov,
        gamma_eps,
        hs_relative_error,
    })
}

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Curve, OperatorMatrix};
use crate::moments::{longrun_trace, stationary_covariance};
use crate::scalar::Scalar;
use crate::sim::{derive_seed, require_stationary, simulate_arh1, ArhSpec};
use crate::stats::{mean_se, normality_test, variance_se};

/// Partial sums `S_n` of independent replications; replication `r` uses noise seed `derive_seed(seed, r)`.
fn partial_sums<T: Scalar>(spec: &ArhSpec<T>, n: usize, reps: usize, seed: u64) -> Result<Vec<Curve<T>>> {
    require_stationary(&spec.rho)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let xs = simulate_arh1(&spec.with_seed(derive_seed(seed, r)), n)?.sample;
            let mut s = Curve::zeros(spec.rho.grid());
            for x in &xs {
                s.axpy(T::one(), x);
            }
            Ok(s)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LlnReport {
    pub n: usize,
    pub reps: usize,
    /// Monte Carlo mean of `n ||S_n / n||^2`.
    pub estimate: f64,
    pub standard_error: f64,
    pub longrun_trace: f64,
    pub ratio: f64,
    pub ratio_se: f64,
    /// Set when the standard error cannot be estimated (fewer than 2 replications).
    pub wide_variance: bool,
}

pub fn mc_lln_rate<T: Scalar>(spec: &ArhSpec<T>, n: usize, reps: usize, seed: u64) -> Result<LlnReport> {
    if reps == 0 || n == 0 {
        return Err(Error::InvalidInput("need n > 0 and reps > 0".into()));
    }
    let sums = partial_sums(spec, n, reps, seed)?;
    let vals: Vec<f64> = sums.iter().map(|s| s.norm_sq().as_f64() / n as f64).collect();
    let m = mean_se(&vals);
    let gamma0 = stationary_covariance(&spec.rho, &spec.noise.covariance(), 1e-12)?;
    let lr = longrun_trace(&spec.rho, &gamma0, 1e-12)?;
    let wide = reps < 2;
    Ok(LlnReport {
        n,
        reps,
        estimate: m.mean,
        standard_error: if wide { f64::INFINITY } else { m.se },
        longrun_trace: lr,
        ratio: m.mean / lr,
        ratio_se: if wide { f64::INFINITY } else { m.se / lr },
        wide_variance: wide,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionDiagnostics {
    pub direction: usize,
    pub variance: f64,
    pub variance_se: f64,
    /// `<u, (I - rho)^-1 Gamma_eps (I - rho*)^-1 u>`.
    pub target: f64,
    pub ratio: f64,
    /// Normality p-value over all replications.
    pub p_value: f64,
    pub batch_p_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanCltReport {
    pub n: usize,
    pub reps: usize,
    pub batch: usize,
    pub level: f64,
    pub directions: Vec<DirectionDiagnostics>,
    /// Fraction of batches (over all directions) rejected at `level`.
    pub rejection_rate: f64,
}

/// `(I - rho*)^-1 u` by its Neumann series.
fn neumann_adjoint<T: Scalar>(rho: &OperatorMatrix<T>, u: &Curve<T>, tol: f64) -> Curve<T> {
    let adj = rho.adjoint();
    let mut term = u.clone();
    let mut sum = u.clone();
    for _ in 0..100_000 {
        term = adj.apply(&term);
        sum.axpy(T::one(), &term);
        if term.norm().as_f64() <= tol * sum.norm().as_f64().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

/// Scores of `S_n / sqrt(n)` on the leading `dirs` noise eigenfunctions.
pub fn mc_mean_clt<T: Scalar>(spec: &ArhSpec<T>, n: usize, reps: usize, dirs: usize, batch: usize, seed: u64) -> Result<MeanCltReport> {
    if reps < 20 {
        return Err(Error::InvalidInput("need at least 20 replications".into()));
    }
    let dirs = dirs.clamp(1, spec.noise.eigenfunctions.len());
    let level = 0.01;
    let sums = partial_sums(spec, n, reps, seed)?;
    let gamma = spec.noise.covariance();
    let scale = T::one() / T::of(n as f64).sqrt();
    let mut directions = Vec::with_capacity(dirs);
    let (mut rejected, mut batches) = (0usize, 0usize);
    for (d, u) in spec.noise.eigenfunctions.iter().take(dirs).enumerate() {
        let scores: Vec<f64> = sums.iter().map(|s| (s.dot(u) * scale).as_f64()).collect();
        let v = variance_se(&scores);
        let w = neumann_adjoint(&spec.rho, u, 1e-14);
        let target = w.dot(&gamma.apply(&w)).as_f64();
        let batch_p_values: Vec<f64> = scores
            .chunks(batch)
            .filter(|c| c.len() >= 20)
            .map(|c| normality_test(c).map(|(_, p)| p))
            .collect::<Result<_>>()?;
        rejected += batch_p_values.iter().filter(|&&p| p < level).count();
        batches += batch_p_values.len();
        directions.push(DirectionDiagnostics {
            direction: d,
            variance: v.mean,
            variance_se: v.se,
            target,
            ratio: v.mean / target,
            p_value: normality_test(&scores)?.1,
            batch_p_values,
        });
    }
    Ok(MeanCltReport {
        n,
        reps,
        batch,
        level,
        directions,
        rejection_rate: if batches > 0 { rejected as f64 / batches as f64 } else { 0.0 },
    })
}

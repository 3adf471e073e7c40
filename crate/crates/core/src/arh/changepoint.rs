use rayon::prelude::*;
use serde::Serialize;

use crate::arh::estimate::{estimate_rho_with, predict, ArhEstimate, EstimateOptions};
use crate::error::{Error, Result};
use crate::hilbert::grid::ensure_same;
use crate::hilbert::{Curve, OperatorMatrix};
use crate::moments::{empirical_cov, functional_pca};
use crate::reginv::RegScheme;
use crate::scalar::Scalar;
use crate::sim::{derive_seed, require_stationary, substream, ArhSpec, NoiseSpec};
use crate::stats::quantile;

/// `eps_k = X_k - predict(X_{k-1})`, k = 1..n-1.
#[derive(Debug, Clone)]
pub struct ResidualSeries<T> {
    pub residuals: Vec<Curve<T>>,
}

impl<T: Scalar> ResidualSeries<T> {
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

pub fn residuals<T: Scalar>(est: &ArhEstimate<T>, sample: &[Curve<T>]) -> Result<ResidualSeries<T>> {
    if sample.len() < 2 {
        return Err(Error::InvalidInput("residuals need at least 2 curves".into()));
    }
    let residuals = sample.windows(2).map(|w| Ok(&w[1] - &predict(est, &w[0])?)).collect::<Result<_>>()?;
    Ok(ResidualSeries { residuals })
}

#[derive(Debug, Clone)]
pub struct CusumPath<T> {
    /// `S(t)` for t = 1..N.
    pub partial_sums: Vec<Curve<T>>,
    /// `||S(t) - (t/N) S(N)|| / sqrt(N)`.
    pub bridge_norms: Vec<f64>,
    pub max_cusum: f64,
    /// `t` (1-based) where the maximum is attained.
    pub argmax: usize,
}

pub fn changepoint_statistic<T: Scalar>(res: &ResidualSeries<T>) -> Result<CusumPath<T>> {
    let n = res.len();
    if n < 2 {
        return Err(Error::InvalidInput("change-point statistic needs at least 2 residuals".into()));
    }
    let grid = res.residuals[0].grid();
    let mut s = Curve::zeros(grid);
    let mut partial_sums = Vec::with_capacity(n);
    for r in &res.residuals {
        ensure_same(grid, r.grid(), "residual")?;
        s.axpy(T::one(), r);
        partial_sums.push(s.clone());
    }
    let total = partial_sums[n - 1].clone();
    let nf = n as f64;
    let bridge_norms: Vec<f64> = partial_sums
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let mut b = st.clone();
            b.axpy(-T::of((i + 1) as f64 / nf), &total);
            b.norm().as_f64() / nf.sqrt()
        })
        .collect();
    let (argmax, max_cusum) = bridge_norms
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(CusumPath { partial_sums, bridge_norms, max_cusum, argmax: argmax + 1 })
}

/// Statistic of a sample under a fixed scheme: estimate, take residuals, compute max CUSUM.
pub fn sample_cusum<T: Scalar>(sample: &[Curve<T>], scheme: RegScheme, opts: EstimateOptions) -> Result<f64> {
    let est = estimate_rho_with(sample, scheme, opts)?;
    Ok(changepoint_statistic(&residuals(&est, sample)?)?.max_cusum)
}

/// Null distribution of the statistic for samples of size `n` drawn from `spec`.
/// Replication `r` uses the noise seed `derive_seed(seed, r)`.
pub fn null_distribution<T: Scalar>(
    spec: &ArhSpec<T>,
    n: usize,
    scheme: RegScheme,
    opts: EstimateOptions,
    reps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    require_stationary(&spec.rho)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let sample = crate::sim::simulate_arh1(&spec.with_seed(derive_seed(seed, r)), n)?.sample;
            sample_cusum(&sample, scheme, opts)
        })
        .collect()
}

/// ARH(1) model with `rho_hat` and the empirical residual covariance.
pub fn fitted_null<T: Scalar>(est: &ArhEstimate<T>, res: &ResidualSeries<T>) -> Result<ArhSpec<T>> {
    let cov = empirical_cov(&res.residuals, 0, true)?;
    let eig = functional_pca(&cov, cov.dim())?;
    let noise = NoiseSpec::from_eigen(&eig, T::of(1e-10), 0)?;
    Ok(ArhSpec::new(est.rho_hat.clone(), noise))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChangepointTest {
    pub statistic: f64,
    pub argmax: usize,
    pub critical_value: f64,
    pub level: f64,
    pub p_value: f64,
    pub reject: bool,
    pub reps: usize,
}

/// Compares the sample's statistic with Monte Carlo quantiles under the fitted null.
pub fn changepoint_test<T: Scalar>(
    sample: &[Curve<T>],
    scheme: RegScheme,
    opts: EstimateOptions,
    reps: usize,
    level: f64,
    seed: u64,
) -> Result<ChangepointTest> {
    if reps < 2 {
        return Err(Error::InvalidInput("need at least 2 null replications".into()));
    }
    let est = estimate_rho_with(sample, scheme, opts)?;
    let res = residuals(&est, sample)?;
    let path = changepoint_statistic(&res)?;
    let null = fitted_null(&est, &res)?;
    let dist = null_distribution(&null, sample.len(), scheme, opts, reps, seed)?;
    let critical_value = quantile(&dist, 1.0 - level);
    let exceed = dist.iter().filter(|&&d| d >= path.max_cusum).count();
    Ok(ChangepointTest {
        statistic: path.max_cusum,
        argmax: path.argmax,
        critical_value,
        level,
        p_value: (1 + exceed) as f64 / (reps + 1) as f64,
        reject: path.max_cusum > critical_value,
        reps,
    })
}

/// ARH(1) path whose operator switches from `spec.rho` to `after` at index `switch`.
pub fn simulate_regime_switch<T: Scalar>(
    spec: &ArhSpec<T>,
    after: &OperatorMatrix<T>,
    n: usize,
    switch: usize,
) -> Result<Vec<Curve<T>>> {
    require_stationary(&spec.rho)?;
    require_stationary(after)?;
    ensure_same(spec.rho.grid(), after.grid(), "switch operator")?;
    let mut rng = substream(spec.noise.seed, 0);
    let mut x = Curve::zeros(spec.rho.grid());
    let mut out = Vec::with_capacity(n);
    for k in 0..spec.burnin + n {
        let rho = if k < spec.burnin + switch { &spec.rho } else { after };
        let mut next = rho.apply(&x);
        next.axpy(T::one(), &spec.noise.draw(&mut rng));
        x = next;
        if k >= spec.burnin {
            out.push(x.clone());
        }
    }
    Ok(out)
}

//! Empirical first and second moments of a functional sample.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::grid::ensure_same;
use crate::hilbert::{eigendecompose, tensor_product, Curve, EigenSystem, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::checks::require_stationary;

/// Mean, covariance and requested lag cross-covariances of a sample.
#[derive(Debug, Clone)]
pub struct MomentSet<T> {
    pub mean: Curve<T>,
    /// `Gamma_n`: lag 0.
    pub cov: OperatorMatrix<T>,
    /// `(h, Gamma_{n,h})` for each requested positive lag.
    pub crosscov: Vec<(usize, OperatorMatrix<T>)>,
    pub n: usize,
    pub centered: bool,
}

impl<T: Scalar> MomentSet<T> {
    pub fn compute(sample: &[Curve<T>], lags: &[usize], center: bool) -> Result<Self> {
        let mean = empirical_mean(sample)?;
        let cov = empirical_cov(sample, 0, center)?;
        let crosscov = lags
            .iter()
            .filter(|&&h| h > 0)
            .map(|&h| empirical_cov(sample, h, center).map(|c| (h, c)))
            .collect::<Result<_>>()?;
        Ok(MomentSet { mean, cov, crosscov, n: sample.len(), centered: center })
    }

    /// `Delta_n`, the lag-one cross-covariance, if it was computed.
    pub fn delta(&self) -> Option<&OperatorMatrix<T>> {
        self.lag(1)
    }

    pub fn lag(&self, h: usize) -> Option<&OperatorMatrix<T>> {
        if h == 0 {
            return Some(&self.cov);
        }
        self.crosscov.iter().find(|(l, _)| *l == h).map(|(_, c)| c)
    }

    pub fn summary(&self, leading: usize) -> Result<MomentSummary> {
        let eig = functional_pca(&self.cov, leading)?;
        Ok(MomentSummary {
            n: self.n,
            centered: self.centered,
            trace: self.cov.trace().as_f64(),
            leading_eigenvalues: eig.eigenvalues().iter().map(|l| l.as_f64()).collect(),
            lags: self.crosscov.iter().map(|(h, c)| (*h, c.hs_norm().as_f64())).collect(),
        })
    }
}

/// JSON-friendly digest of a [`MomentSet`].
#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    pub n: usize,
    pub centered: bool,
    pub trace: f64,
    pub leading_eigenvalues: Vec<f64>,
    /// `(lag, HS norm)` of each cross-covariance.
    pub lags: Vec<(usize, f64)>,
}

fn check_sample<T: Scalar>(sample: &[Curve<T>]) -> Result<()> {
    let first = sample.first().ok_or_else(|| Error::InvalidInput("empty sample".into()))?;
    for c in &sample[1..] {
        ensure_same(first.grid(), c.grid(), "sample")?;
    }
    Ok(())
}

pub fn empirical_mean<T: Scalar>(sample: &[Curve<T>]) -> Result<Curve<T>> {
    check_sample(sample)?;
    let inv = T::one() / T::of(sample.len() as f64);
    let mut mean = Curve::zeros(sample[0].grid());
    for x in sample {
        mean.axpy(inv, x);
    }
    Ok(mean)
}

/// `Gamma_{n,h} = 1/(n-h) sum_t (X_{t+h} - m) (x) (X_t - m)`, with `m` the
/// empirical mean when `center` and zero otherwise. Lag 0 is exactly symmetric.
pub fn empirical_cov<T: Scalar>(sample: &[Curve<T>], h: usize, center: bool) -> Result<OperatorMatrix<T>> {
    check_sample(sample)?;
    let n = sample.len();
    if h >= n {
        return Err(Error::InvalidInput(format!("lag {h} needs more than {n} curves")));
    }
    let grid = sample[0].grid().clone();
    let m = grid.len();
    let centered: Vec<Vec<T>> = if center {
        let mu = empirical_mean(sample)?;
        sample.iter().map(|x| (x - &mu).into_values()).collect()
    } else {
        sample.iter().map(|x| x.values().to_vec()).collect()
    };
    let inv = T::one() / T::of((n - h) as f64);
    let mut k = vec![T::zero(); m * m];
    for t in 0..n - h {
        let (lead, lag) = (&centered[t + h], &centered[t]);
        for s in 0..m {
            let a = lead[s];
            if a == T::zero() {
                continue;
            }
            let cols = if h == 0 { s + 1 } else { m };
            for (o, &b) in k[s * m..s * m + cols].iter_mut().zip(&lag[..cols]) {
                *o += a * b;
            }
        }
    }
    k.iter_mut().for_each(|v| *v *= inv);
    if h == 0 {
        for s in 0..m {
            for u in 0..s {
                k[u * m + s] = k[s * m + u];
            }
        }
    }
    Ok(OperatorMatrix::from_raw(grid, k))
}

/// Functional PCA: leading `rank` eigenpairs of a covariance operator.
pub fn functional_pca<T: Scalar>(cov: &OperatorMatrix<T>, rank: usize) -> Result<EigenSystem<T>> {
    eigendecompose(cov, rank)
}

/// Smoothing kernels for [`local_cov`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalKernel {
    #[default]
    Gaussian,
    Epanechnikov,
    /// Indicator of `[0, 1]`.
    Uniform,
    /// Equal weights whatever the distance.
    Constant,
}

impl LocalKernel {
    pub fn weight(self, u: f64) -> f64 {
        match self {
            LocalKernel::Gaussian => (-0.5 * u * u).exp(),
            LocalKernel::Epanechnikov => (1.0 - u * u).max(0.0),
            LocalKernel::Uniform => {
                if u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LocalKernel::Constant => 1.0,
        }
    }
}

/// Median of the L2 distances over all pairs of curves.
pub fn median_pairwise_distance<T: Scalar>(sample: &[Curve<T>]) -> Result<T> {
    check_sample(sample)?;
    let mut d: Vec<T> = Vec::new();
    for i in 0..sample.len() {
        for j in 0..i {
            d.push((&sample[i] - &sample[j]).norm());
        }
    }
    if d.is_empty() {
        return Err(Error::InvalidInput("need at least two curves".into()));
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mid = d.len() / 2;
    Ok(if d.len() % 2 == 1 { d[mid] } else { (d[mid - 1] + d[mid]) / T::of(2.0) })
}

/// Kernel-weighted uncentered covariance around `x_ref`:
/// `sum_i K(||X_i - x_ref|| / h) X_i (x) X_i / sum_i K(||X_i - x_ref|| / h)`.
/// Defaults: `x_ref` = last curve, `h` = median pairwise distance.
pub fn local_cov<T: Scalar>(
    sample: &[Curve<T>],
    x_ref: Option<&Curve<T>>,
    bandwidth: Option<T>,
    kernel: LocalKernel,
) -> Result<OperatorMatrix<T>> {
    check_sample(sample)?;
    let x_ref = x_ref.unwrap_or_else(|| sample.last().expect("nonempty"));
    ensure_same(sample[0].grid(), x_ref.grid(), "local covariance reference")?;
    let h = match bandwidth {
        Some(h) => h,
        None => median_pairwise_distance(sample)?,
    };
    if !(h > T::zero()) {
        return Err(Error::InvalidInput(format!("bandwidth must be positive, got {h}")));
    }
    let dists: Vec<T> = sample.iter().map(|x| (x - x_ref).norm()).collect();
    let weights: Vec<T> = dists.iter().map(|&d| T::of(kernel.weight((d / h).as_f64()))).collect();
    let total: T = weights.iter().copied().sum();
    if !(total > T::zero()) {
        let nearest = dists.iter().fold(T::infinity(), |a, &d| a.min(d));
        return Err(Error::ZeroWeights { bandwidth: h.as_f64(), nearest: nearest.as_f64() });
    }
    let mut op = OperatorMatrix::zeros(sample[0].grid());
    for (x, &w) in sample.iter().zip(&weights) {
        op.add_rank_one(w / total, x.values(), x.values());
    }
    Ok(op)
}

/// `Gamma = sum_k rho^k Gamma_eps (rho*)^k`, summed until the relative
/// increment falls below `tol`.
pub fn stationary_covariance<T: Scalar>(
    rho: &OperatorMatrix<T>,
    gamma_eps: &OperatorMatrix<T>,
    tol: f64,
) -> Result<OperatorMatrix<T>> {
    require_stationary(rho)?;
    ensure_same(rho.grid(), gamma_eps.grid(), "stationary covariance")?;
    let adj = rho.adjoint();
    let mut term = gamma_eps.clone();
    let mut sum = gamma_eps.clone();
    for _ in 0..100_000 {
        term = rho.compose(&term)?.compose(&adj)?;
        let inc = term.hs_norm();
        sum = &sum + &term;
        if inc.as_f64() <= tol * sum.hs_norm().as_f64() {
            return Ok(sum);
        }
    }
    Err(Error::NotStationary { radius: 1.0 })
}

/// Output of [`tensorized_decomposition`].
#[derive(Debug, Clone)]
pub struct TensorizedReport<T> {
    /// `u_i` for `i = 1 .. n-1` (sample index of `X_i`), when requested.
    pub u: Option<Vec<OperatorMatrix<T>>>,
    pub u_mean: OperatorMatrix<T>,
    /// `max_i || Z_i - R(Z_{i-1}) - u_i ||_HS`.
    pub max_violation: T,
    pub gamma: OperatorMatrix<T>,
}

/// `u_i = rho(X_{i-1}) (x) eps_i + eps_i (x) rho(X_{i-1}) + eps_i (x) eps_i - Gamma_eps`.
pub fn martingale_increment<T: Scalar>(
    rho_prev: &Curve<T>,
    eps: &Curve<T>,
    gamma_eps: &OperatorMatrix<T>,
) -> Result<OperatorMatrix<T>> {
    let mut u = tensor_product(rho_prev, eps)?;
    u.add_rank_one(T::one(), eps.values(), rho_prev.values());
    u.add_rank_one(T::one(), eps.values(), eps.values());
    Ok(&u - gamma_eps)
}

/// Checks the autoregressive structure of `Z_i = X_i (x) X_i - Gamma`:
/// `Z_i = rho Z_{i-1} rho* + u_i`.
pub fn tensorized_decomposition<T: Scalar>(
    sample: &[Curve<T>],
    innovations: &[Curve<T>],
    rho: &OperatorMatrix<T>,
    gamma_eps: &OperatorMatrix<T>,
    keep_series: bool,
) -> Result<TensorizedReport<T>> {
    if sample.len() != innovations.len() {
        return Err(Error::InvalidInput(format!(
            "sample has {} curves but {} innovations",
            sample.len(),
            innovations.len()
        )));
    }
    if sample.len() < 2 {
        return Err(Error::InvalidInput("need at least two curves".into()));
    }
    check_sample(sample)?;
    let gamma = stationary_covariance(rho, gamma_eps, 1e-10)?;
    let adj = rho.adjoint();
    let z = |x: &Curve<T>| -> Result<OperatorMatrix<T>> { Ok(&tensor_product(x, x)? - &gamma) };
    let mut series = keep_series.then(Vec::new);
    let mut u_sum = OperatorMatrix::zeros(rho.grid());
    let mut worst = T::zero();
    let mut z_prev = z(&sample[0])?;
    for i in 1..sample.len() {
        let rho_prev = rho.apply(&sample[i - 1]);
        let u = martingale_increment(&rho_prev, &innovations[i], gamma_eps)?;
        let z_now = z(&sample[i])?;
        let r_prev = rho.compose(&z_prev)?.compose(&adj)?;
        let gap = &(&z_now - &r_prev) - &u;
        worst = worst.max(gap.hs_norm());
        u_sum = &u_sum + &u;
        if let Some(s) = series.as_mut() {
            s.push(u);
        }
        z_prev = z_now;
    }
    let u_mean = u_sum.scale(T::one() / T::of((sample.len() - 1) as f64));
    Ok(TensorizedReport { u: series, u_mean, max_violation: worst, gamma })
}

/// `trace(Gamma_0) + 2 sum_{k>=1} trace(rho^k Gamma_0)`: the limit of
/// `n E||S_n / n||^2` for a stationary ARH(1). Stops once the increment and
/// the geometric estimate of the remaining tail are both below `tol`.
pub fn longrun_trace<T: Scalar>(rho: &OperatorMatrix<T>, gamma0: &OperatorMatrix<T>, tol: f64) -> Result<f64> {
    require_stationary(rho)?;
    ensure_same(rho.grid(), gamma0.grid(), "long-run trace")?;
    let mut total = gamma0.trace().as_f64();
    let mut term = gamma0.clone();
    let mut prev = f64::INFINITY;
    for _ in 0..1_000_000 {
        term = rho.compose(&term)?;
        let inc = 2.0 * term.trace().as_f64();
        total += inc;
        let ratio = inc.abs() / prev;
        if inc.abs() < tol && (ratio < 1.0 && inc.abs() * ratio / (1.0 - ratio) < tol || inc == 0.0) {
            return Ok(total);
        }
        prev = inc.abs();
    }
    Err(Error::NotStationary { radius: 1.0 })
}

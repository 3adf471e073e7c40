use crate::error::{Error, Result};
use crate::hilbert::grid::ensure_same;
use crate::hilbert::{Curve, EigenSystem, OperatorMatrix};
use crate::moments::{functional_pca, MomentSet};
use crate::reginv::{admissible_rank, EIGEN_FLOOR, reg_inverse, RegScheme};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    /// Subtract the empirical mean before estimating (added back by [`predict`]).
    pub center: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { center: true }
    }
}

/// `rho_hat = Delta_n Gamma_n^dagger` and what it was built from.
#[derive(Debug, Clone)]
pub struct ArhEstimate<T> {
    pub rho_hat: OperatorMatrix<T>,
    pub scheme: RegScheme,
    pub eigens: EigenSystem<T>,
    /// Cutoff rank `k` when the scheme is a spectral cutoff.
    pub projector_rank: Option<usize>,
    pub moments: MomentSet<T>,
    pub n: usize,
    /// Curve subtracted before applying `rho_hat` (zero when uncentered).
    pub center: Curve<T>,
    /// `||Gamma_n^dagger||`, read off the multipliers.
    pub inverse_norm: T,
}

impl<T: Scalar> ArhEstimate<T> {
    /// Estimate with a prescribed operator, for tests and model files.
    pub fn from_operator(rho_hat: OperatorMatrix<T>, center: Curve<T>, scheme: RegScheme) -> Result<Self> {
        ensure_same(rho_hat.grid(), center.grid(), "model center")?;
        let grid = rho_hat.grid().clone();
        let zero = OperatorMatrix::zeros(&grid);
        let moments = MomentSet { mean: center.clone(), cov: zero.clone(), crosscov: vec![(1, zero)], n: 0, centered: false };
        Ok(ArhEstimate {
            rho_hat,
            scheme,
            eigens: EigenSystem::new(grid, Vec::new(), Vec::new())?,
            projector_rank: None,
            moments,
            n: 0,
            center,
            inverse_norm: T::zero(),
        })
    }

    /// `||Delta_n - rho_hat Gamma_n||_HS`.
    pub fn yule_walker_residual(&self) -> Result<T> {
        let delta = self.moments.delta().expect("lag one computed");
        Ok((delta - &self.rho_hat.compose(&self.moments.cov)?).hs_norm())
    }

    /// Projector onto the first `k` empirical eigenfunctions.
    pub fn projector(&self, k: usize) -> OperatorMatrix<T> {
        self.eigens.span_projector(k)
    }
}

/// Moments and eigen data of a sample; cheap to reuse across schemes.
pub(crate) struct Fitted<T> {
    pub moments: MomentSet<T>,
    pub eigens: EigenSystem<T>,
    pub admissible: usize,
    pub center: Curve<T>,
}

impl<T: Scalar> Fitted<T> {
    pub fn new(sample: &[Curve<T>], opts: EstimateOptions) -> Result<Self> {
        if sample.len() < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 curves, got {}", sample.len())));
        }
        let moments = MomentSet::compute(sample, &[1], opts.center)?;
        let m = moments.cov.dim();
        let eigens = functional_pca(&moments.cov, m)?;
        // variation at rounding level relative to the raw second moment counts as none
        let scale = sample.iter().map(|x| x.norm_sq()).sum::<T>() / T::of(sample.len() as f64);
        let admissible = if eigens.leading() <= T::tol(1e-12) * scale { 0 } else { admissible_rank(&eigens) };
        if admissible == 0 {
            return Err(Error::NotIdentifiable(
                "empirical covariance vanishes, so ker Gamma_n is the whole space (are all curves equal?)".into(),
            ));
        }
        let center = if opts.center { moments.mean.clone() } else { Curve::zeros(moments.mean.grid()) };
        Ok(Fitted { moments, eigens, admissible, center })
    }

    /// Cutoff ranks above the admissible rank are lowered to it.
    pub fn clip(&self, scheme: RegScheme) -> RegScheme {
        match scheme {
            RegScheme::SpectralCutoff { k } => RegScheme::SpectralCutoff { k: k.min(self.admissible) },
            other => other,
        }
    }

    pub fn estimate(self, scheme: RegScheme) -> Result<ArhEstimate<T>> {
        let inv = reg_inverse(&self.eigens, scheme)?;
        let delta = self.moments.delta().expect("lag one computed");
        let rho_hat = delta.compose(&inv.operator)?;
        let projector_rank = match scheme {
            RegScheme::SpectralCutoff { k } => Some(k),
            _ => None,
        };
        Ok(ArhEstimate {
            rho_hat,
            scheme,
            inverse_norm: inv.analytic_norm(),
            eigens: self.eigens,
            projector_rank,
            n: self.moments.n,
            moments: self.moments,
            center: self.center,
        })
    }

    /// One-step prediction without forming `rho_hat`: `Delta (Gamma^dagger (x - c)) + c`.
    pub fn predict(&self, scheme: RegScheme, x: &Curve<T>) -> Curve<T> {
        let xc = x - &self.center;
        let floor = T::of(EIGEN_FLOOR) * self.eigens.leading();
        let mut g = Curve::zeros(x.grid());
        for (i, (e, &l)) in self.eigens.eigenfunctions().iter().zip(self.eigens.eigenvalues()).enumerate() {
            let f = scheme.multiplier(i + 1, if l > floor { l } else { T::zero() });
            if f != T::zero() {
                g.axpy(f * e.dot(&xc), e);
            }
        }
        let mut out = self.moments.delta().expect("lag one computed").apply(&g);
        out.axpy(T::one(), &self.center);
        out
    }
}

/// ARH(1) estimator with centering on.
pub fn estimate_rho<T: Scalar>(sample: &[Curve<T>], scheme: RegScheme) -> Result<ArhEstimate<T>> {
    estimate_rho_with(sample, scheme, EstimateOptions::default())
}

pub fn estimate_rho_with<T: Scalar>(sample: &[Curve<T>], scheme: RegScheme, opts: EstimateOptions) -> Result<ArhEstimate<T>> {
    scheme.validate()?;
    Fitted::new(sample, opts)?.estimate(scheme)
}

/// `c + rho_hat(x - c)`, `c` the centering curve of the estimate.
pub fn predict<T: Scalar>(est: &ArhEstimate<T>, x: &Curve<T>) -> Result<Curve<T>> {
    ensure_same(est.rho_hat.grid(), x.grid(), "predict")?;
    let mut out = est.rho_hat.apply(&(x - &est.center));
    out.axpy(T::one(), &est.center);
    Ok(out)
}

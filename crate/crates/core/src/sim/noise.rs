use std::f64::consts::{PI, SQRT_2};

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{Curve, EigenSystem, GridRef, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::rng::{std_normal, substream};

/// Gaussian strong white noise `eps = sum_p sqrt(gamma_p) xi_p e_p`.
#[derive(Debug, Clone)]
pub struct NoiseSpec<T> {
    pub eigenvalues: Vec<T>,
    pub eigenfunctions: Vec<Curve<T>>,
    pub seed: u64,
}

/// `{1, sqrt2 cos 2 pi t, sqrt2 sin 2 pi t, sqrt2 cos 4 pi t, ...}`, first `count` members.
pub fn fourier_basis<T: Scalar>(grid: &GridRef<T>, count: usize) -> Vec<Curve<T>> {
    (0..count)
        .map(|p| {
            if p == 0 {
                Curve::constant(grid, T::one())
            } else {
                let freq = 2.0 * PI * ((p + 1) / 2) as f64;
                if p % 2 == 1 {
                    Curve::from_fn(grid, |t| T::of(SQRT_2 * (freq * t.as_f64()).cos()))
                } else {
                    Curve::from_fn(grid, |t| T::of(SQRT_2 * (freq * t.as_f64()).sin()))
                }
            }
        })
        .collect()
}

/// Gram-Schmidt in the grid metric; keeps the quadrature basis exactly orthonormal.
pub fn orthonormalize<T: Scalar>(funcs: &[Curve<T>]) -> Result<Vec<Curve<T>>> {
    let mut out: Vec<Curve<T>> = Vec::with_capacity(funcs.len());
    for f in funcs {
        let mut v = f.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q);
            }
        }
        let n = v.norm();
        if !(n > T::tol(1e-10) * f.norm().max(T::one())) {
            return Err(Error::InvalidInput("basis functions are linearly dependent on this grid".into()));
        }
        out.push(v.scale(T::one() / n));
    }
    Ok(out)
}

/// Number of Karhunen-Loeve terms in the default noise.
pub const DEFAULT_TERMS: usize = 20;

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(eigenvalues: Vec<T>, eigenfunctions: Vec<Curve<T>>, seed: u64) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::InvalidInput("noise needs matching nonempty eigenvalues and eigenfunctions".into()));
        }
        if eigenvalues.iter().any(|g| !(*g > T::zero()) || !g.is_finite()) {
            return Err(Error::InvalidInput("noise eigenvalues must be positive".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("noise eigenvalues must be decreasing".into()));
        }
        Ok(NoiseSpec { eigenvalues, eigenfunctions, seed })
    }

    /// Fourier eigenfunctions with the given eigenvalues.
    pub fn fourier(grid: &GridRef<T>, eigenvalues: Vec<T>, seed: u64) -> Result<Self> {
        let basis = orthonormalize(&fourier_basis(grid, eigenvalues.len()))?;
        Self::new(eigenvalues, basis, seed)
    }

    /// `gamma_p = p^-2`, Fourier eigenfunctions, `P = 20` or as many as the grid resolves.
    pub fn default_on(grid: &GridRef<T>, seed: u64) -> Result<Self> {
        let count = DEFAULT_TERMS.min(2 * (grid.len().saturating_sub(2) / 2) + 1);
        Self::fourier(grid, (1..=count).map(|p| T::one() / T::of((p * p) as f64)).collect(), seed)
    }

    /// Noise whose covariance is the positive part of an eigen system.
    pub fn from_eigen(eig: &EigenSystem<T>, rel_floor: T, seed: u64) -> Result<Self> {
        let k = eig.positive_count(rel_floor);
        if k == 0 {
            return Err(Error::InvalidInput("covariance has no positive eigenvalue".into()));
        }
        Self::new(eig.eigenvalues()[..k].to_vec(), eig.eigenfunctions()[..k].to_vec(), seed)
    }

    pub fn grid(&self) -> &GridRef<T> {
        self.eigenfunctions[0].grid()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        NoiseSpec { seed, ..self.clone() }
    }

    /// `Gamma_eps = sum_p gamma_p e_p (x) e_p`.
    pub fn covariance(&self) -> OperatorMatrix<T> {
        let terms: Vec<_> = self.eigenvalues.iter().zip(&self.eigenfunctions).map(|(&g, e)| (g, e, e)).collect();
        OperatorMatrix::from_rank_one_sum(self.grid(), &terms).expect("shared grid")
    }

    pub fn trace(&self) -> T {
        self.eigenvalues.iter().copied().sum()
    }

    /// One draw from the noise law.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Curve<T> {
        let mut out = Curve::zeros(self.grid());
        for (&g, e) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            let xi: T = std_normal(rng);
            out.axpy(g.sqrt() * xi, e);
        }
        out
    }
}

/// `n` iid draws, deterministic in `spec.seed`.
pub fn gen_white_noise<T: Scalar>(spec: &NoiseSpec<T>, n: usize) -> Vec<Curve<T>> {
    let mut rng = substream(spec.seed, 0);
    (0..n).map(|_| spec.draw(&mut rng)).collect()
}

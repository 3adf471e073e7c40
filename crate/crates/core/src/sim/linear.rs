use crate::error::{Error, Result};
use crate::hilbert::grid::ensure_same;
use crate::hilbert::{Curve, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::noise::NoiseSpec;
use crate::sim::rng::substream;

/// `X_k = mu + eps_k + sum_{j=1..M} a_j(eps_{k-j})`, i.e. the series truncated at `M`.
#[derive(Debug, Clone)]
pub struct LinearProcessSpec<T> {
    /// `a_1 .. a_M`; `a_0` is the identity and is not stored.
    pub coefficients: Vec<OperatorMatrix<T>>,
    pub noise: NoiseSpec<T>,
    pub mean: Curve<T>,
}

impl<T: Scalar> LinearProcessSpec<T> {
    pub fn new(coefficients: Vec<OperatorMatrix<T>>, noise: NoiseSpec<T>, mean: Curve<T>) -> Result<Self> {
        let grid = noise.grid().clone();
        ensure_same(&grid, mean.grid(), "process mean")?;
        for a in &coefficients {
            ensure_same(&grid, a.grid(), "coefficient operator")?;
        }
        Ok(LinearProcessSpec { coefficients, noise, mean })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }
}

pub fn simulate_linear_process<T: Scalar>(spec: &LinearProcessSpec<T>, n: usize) -> Result<Vec<Curve<T>>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let big_m = spec.order();
    let mut rng = substream(spec.noise.seed, 0);
    // M pre-sample innovations make X_1 stationary
    let eps: Vec<Curve<T>> = (0..n + big_m).map(|_| spec.noise.draw(&mut rng)).collect();
    let out = (0..n)
        .map(|k| {
            let now = k + big_m;
            let mut x = spec.mean.clone();
            x.axpy(T::one(), &eps[now]);
            for (j, a) in spec.coefficients.iter().enumerate() {
                x.axpy(T::one(), &a.apply(&eps[now - j - 1]));
            }
            x
        })
        .collect();
    Ok(out)
}

use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{Curve, GridRef, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::checks::{require_stationary, spectral_radius};
use crate::sim::noise::NoiseSpec;
use crate::sim::rng::substream;

pub const DEFAULT_BURNIN: usize = 200;

/// `X_k = rho(X_{k-1}) + eps_k`.
#[derive(Debug, Clone)]
pub struct ArhSpec<T> {
    pub rho: OperatorMatrix<T>,
    pub noise: NoiseSpec<T>,
    pub burnin: usize,
}

impl<T: Scalar> ArhSpec<T> {
    pub fn new(rho: OperatorMatrix<T>, noise: NoiseSpec<T>) -> Self {
        ArhSpec { rho, noise, burnin: DEFAULT_BURNIN }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ArhSpec { noise: self.noise.with_seed(seed), ..self.clone() }
    }
}

/// Curves cut from one trajectory (or produced by a recursion), with the
/// innovations when they are known exactly.
#[derive(Debug, Clone)]
pub struct SegmentedProcess<T> {
    pub sample: Vec<Curve<T>>,
    pub innovations: Vec<Curve<T>>,
    /// The true autocorrelation operator, when there is one.
    pub truth: Option<OperatorMatrix<T>>,
    /// Exact derivatives of the sample curves, when the generator knows them.
    pub derivatives: Option<Vec<Curve<T>>>,
}

impl<T: Scalar> SegmentedProcess<T> {
    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }
}

/// Runs `Y_k = A Y_{k-1} + lift(eps_k)` from zero, dropping `burnin` steps.
fn iterate<T: Scalar, R: Rng>(
    op: &OperatorMatrix<T>,
    noise: &NoiseSpec<T>,
    lift: impl Fn(&Curve<T>) -> Curve<T>,
    n: usize,
    burnin: usize,
    rng: &mut R,
) -> (Vec<Curve<T>>, Vec<Curve<T>>) {
    let mut y = Curve::zeros(op.grid());
    let mut sample = Vec::with_capacity(n);
    let mut innov = Vec::with_capacity(n);
    for k in 0..burnin + n {
        let e = lift(&noise.draw(rng));
        let mut next = op.apply(&y);
        next.axpy(T::one(), &e);
        y = next;
        if k >= burnin {
            sample.push(y.clone());
            innov.push(e);
        }
    }
    (sample, innov)
}

pub fn simulate_arh1<T: Scalar>(spec: &ArhSpec<T>, n: usize) -> Result<SegmentedProcess<T>> {
    require_stationary(&spec.rho)?;
    let mut rng = substream(spec.noise.seed, 0);
    let (sample, innovations) = iterate(&spec.rho, &spec.noise, |e| e.clone(), n, spec.burnin, &mut rng);
    Ok(SegmentedProcess { sample, innovations, truth: Some(spec.rho.clone()), derivatives: None })
}

/// Companion operator on the `p`-fold product grid: first block row holds
/// `rho_1 .. rho_p`, identities on the sub-diagonal.
pub fn companion_operator<T: Scalar>(rhos: &[OperatorMatrix<T>]) -> Result<OperatorMatrix<T>> {
    let p = rhos.len();
    if p == 0 {
        return Err(Error::InvalidInput("need at least one operator".into()));
    }
    let base = rhos[0].grid().clone();
    for r in rhos {
        crate::hilbert::grid::ensure_same(&base, r.grid(), "companion block")?;
    }
    let m = base.len();
    let grid = base.product(p)?;
    let big = m * p;
    let mut k = vec![T::zero(); big * big];
    for (j, r) in rhos.iter().enumerate() {
        for s in 0..m {
            for t in 0..m {
                k[s * big + j * m + t] = r.at(s, t);
            }
        }
    }
    for i in 1..p {
        for (s, &w) in base.weights().iter().enumerate() {
            k[(i * m + s) * big + (i - 1) * m + s] = T::one() / w;
        }
    }
    OperatorMatrix::new(grid, k)
}

/// Embeds a base-grid curve as the first block of a product-grid curve.
pub(crate) fn lift_first_block<T: Scalar>(grid: &GridRef<T>, e: &Curve<T>) -> Curve<T> {
    let mut v = vec![T::zero(); grid.len()];
    v[..e.len()].copy_from_slice(e.values());
    Curve::from_raw(grid.clone(), v)
}

/// ARH(p) through its Markov (companion) representation; returns the first block.
pub fn simulate_arh_p<T: Scalar>(
    rhos: &[OperatorMatrix<T>],
    noise: &NoiseSpec<T>,
    n: usize,
    burnin: usize,
) -> Result<SegmentedProcess<T>> {
    let comp = companion_operator(rhos)?;
    let radius = spectral_radius(&comp);
    if radius >= 1.0 - 1e-6 {
        return Err(Error::NotStationary { radius });
    }
    let grid = comp.grid().clone();
    let mut rng = substream(noise.seed, 0);
    let (stacked, innov) = iterate(&comp, noise, |e| lift_first_block(&grid, e), n, burnin, &mut rng);
    let sample = stacked.iter().map(|y| y.block(0)).collect();
    let innovations = innov.iter().map(|y| y.block(0)).collect();
    let truth = if rhos.len() == 1 { Some(rhos[0].clone()) } else { None };
    Ok(SegmentedProcess { sample, innovations, truth, derivatives: None })
}

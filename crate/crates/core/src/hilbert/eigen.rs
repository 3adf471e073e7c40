use crate::error::{Error, Result};
use crate::hilbert::curve::Curve;
use crate::hilbert::grid::GridRef;
use crate::hilbert::operator::{tensor_product, OperatorMatrix};
use crate::hilbert::symeig::symmetric_eigen;
use crate::scalar::Scalar;

/// Decreasing nonnegative eigenvalues with L2-orthonormal eigenfunctions.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    grid: GridRef<T>,
    eigenvalues: Vec<T>,
    eigenfunctions: Vec<Curve<T>>,
}

impl<T: Scalar> EigenSystem<T> {
    /// Builds a system from explicit pairs; values must be nonincreasing and nonnegative
    /// and the functions orthonormal (checked at 1e-8).
    pub fn new(grid: GridRef<T>, eigenvalues: Vec<T>, eigenfunctions: Vec<Curve<T>>) -> Result<Self> {
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::InvalidInput("eigenvalue/eigenfunction count mismatch".into()));
        }
        if eigenvalues.iter().any(|l| *l < T::zero() || !l.is_finite()) {
            return Err(Error::InvalidInput("eigenvalues must be finite and nonnegative".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("eigenvalues must be nonincreasing".into()));
        }
        let tol = T::tol(1e-8);
        for (i, ei) in eigenfunctions.iter().enumerate() {
            if ei.grid().len() != grid.len() {
                return Err(Error::GridMismatch("eigenfunction grid".into()));
            }
            for (j, ej) in eigenfunctions.iter().enumerate().take(i + 1) {
                let want = if i == j { T::one() } else { T::zero() };
                if (ei.dot(ej) - want).abs() > tol {
                    return Err(Error::InvalidInput(format!("eigenfunctions {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(EigenSystem { grid, eigenvalues, eigenfunctions })
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[Curve<T>] {
        &self.eigenfunctions
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn leading(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or(T::zero())
    }

    /// Count of eigenvalues above `rel_floor * lambda_1`.
    pub fn positive_count(&self, rel_floor: T) -> usize {
        let floor = rel_floor * self.leading();
        self.eigenvalues.iter().take_while(|&&l| l > floor && l > T::zero()).count()
    }

    /// `pi_i = e_i (x) e_i`.
    pub fn projector(&self, i: usize) -> OperatorMatrix<T> {
        tensor_product(&self.eigenfunctions[i], &self.eigenfunctions[i]).expect("same grid")
    }

    /// Projector onto the span of the first `k` eigenfunctions.
    pub fn span_projector(&self, k: usize) -> OperatorMatrix<T> {
        self.spectral_operator(k, |_| T::one())
    }

    /// `sum_{i < k} f(lambda_i) e_i (x) e_i`.
    pub fn spectral_operator(&self, k: usize, f: impl Fn(T) -> T) -> OperatorMatrix<T> {
        let mut op = OperatorMatrix::zeros(&self.grid);
        for (l, e) in self.eigenvalues.iter().zip(&self.eigenfunctions).take(k) {
            op.add_rank_one(f(*l), e.values(), e.values());
        }
        op
    }

    /// `sum_i lambda_i e_i (x) e_i` over the retained pairs.
    pub fn reconstruct(&self) -> OperatorMatrix<T> {
        self.spectral_operator(self.len(), |l| l)
    }

    /// Coordinates `<x, e_i>`.
    pub fn scores(&self, x: &Curve<T>) -> Vec<T> {
        self.eigenfunctions.iter().map(|e| e.dot(x)).collect()
    }

    /// Keeps the leading `k` pairs.
    pub fn truncated(&self, k: usize) -> EigenSystem<T> {
        let k = k.min(self.len());
        EigenSystem {
            grid: self.grid.clone(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenfunctions: self.eigenfunctions[..k].to_vec(),
        }
    }
}

/// Leading `rank` eigenpairs of a symmetric positive semidefinite operator.
///
/// Eigenvalues within `-1e-8 * lambda_1` of zero are clamped to zero;
/// anything more negative is rejected.
pub fn eigendecompose<T: Scalar>(a: &OperatorMatrix<T>, rank: usize) -> Result<EigenSystem<T>> {
    let m = a.dim();
    let scale = a.max_abs_entry();
    let asym = a.asymmetry();
    if asym > T::tol(1e-10) * scale.max(T::one()) {
        return Err(Error::NotSymmetric { asymmetry: asym.as_f64() });
    }
    let wm = a.weighted_matrix();
    // symmetrize away rounding before the solver sees it
    let mut sym = wm.clone();
    let half = T::of(0.5);
    for s in 0..m {
        for t in 0..s {
            let v = (wm[s * m + t] + wm[t * m + s]) * half;
            sym[s * m + t] = v;
            sym[t * m + s] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(m, &sym);
    let leading = vals.first().copied().unwrap_or(T::zero()).max(T::zero());
    if let Some(&lowest) = vals.last() {
        if lowest < -T::tol(1e-8) * leading.max(T::min_positive_value()) {
            return Err(Error::NotPositive { eigenvalue: lowest.as_f64(), leading: leading.as_f64() });
        }
    }
    let grid = a.grid().clone();
    let isw: Vec<T> = grid.weights().iter().map(|w| T::one() / w.sqrt()).collect();
    let rank = rank.min(m);
    let mut eigenvalues = Vec::with_capacity(rank);
    let mut eigenfunctions = Vec::with_capacity(rank);
    for j in 0..rank {
        eigenvalues.push(vals[j].max(T::zero()));
        let mut e: Vec<T> = (0..m).map(|i| vecs[i * m + j] * isw[i]).collect();
        // sign convention: largest-magnitude component positive
        let pivot = e.iter().fold(T::zero(), |best, &v| if v.abs() > best.abs() { v } else { best });
        if pivot < T::zero() {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        eigenfunctions.push(Curve::from_raw(grid.clone(), e));
    }
    Ok(EigenSystem { grid, eigenvalues, eigenfunctions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, SQRT_2};

    fn fourier(g: &GridRef<f64>) -> Vec<Curve<f64>> {
        vec![
            Curve::from_fn(g, |t| SQRT_2 * (2.0 * PI * t).cos()),
            Curve::from_fn(g, |t| SQRT_2 * (4.0 * PI * t).sin()),
            Curve::constant(g, 1.0),
        ]
    }

    #[test]
    fn recovers_constructed_spectrum() {
        let g = Grid::<f64>::uniform(101).unwrap();
        let e = fourier(&g);
        let a = OperatorMatrix::from_rank_one_sum(
            &g,
            &[(0.75, &e[0], &e[0]), (0.5, &e[1], &e[1]), (0.25, &e[2], &e[2])],
        )
        .unwrap();
        let sys = eigendecompose(&a, 5).unwrap();
        let want = [0.75, 0.5, 0.25, 0.0, 0.0];
        for (l, w) in sys.eigenvalues().iter().zip(want) {
            assert!((l - w).abs() < 1e-8);
        }
        for i in 0..3 {
            assert!((sys.eigenfunctions()[i].dot(&e[i]).abs() - 1.0).abs() < 1e-8);
            let ae = a.apply(&sys.eigenfunctions()[i]);
            let le = sys.eigenfunctions()[i].scale(sys.eigenvalues()[i]);
            assert!((&ae - &le).norm() < 1e-8 * 0.75);
        }
    }

    #[test]
    fn rank_one_operator() {
        let g = Grid::<f64>::uniform(61).unwrap();
        let u = Curve::from_fn(&g, |t| 1.0 + t * t);
        let a = tensor_product(&u, &u).unwrap();
        let sys = eigendecompose(&a, 2).unwrap();
        assert!((sys.eigenvalues()[0] - u.norm_sq()).abs() < 1e-10);
        assert!(sys.eigenvalues()[1].abs() < 1e-10);
        let unit = u.scale(1.0 / u.norm());
        assert!((&sys.eigenfunctions()[0] - &unit).norm() < 1e-8);
    }

    #[test]
    fn rejects_asymmetric_and_negative() {
        let g = Grid::<f64>::uniform(11).unwrap();
        let e = fourier(&g);
        let a = tensor_product(&e[0], &e[2]).unwrap();
        assert!(matches!(eigendecompose(&a, 3), Err(Error::NotSymmetric { .. })));
        let b = OperatorMatrix::from_rank_one_sum(&g, &[(1.0, &e[0], &e[0]), (-0.5, &e[2], &e[2])]).unwrap();
        assert!(matches!(eigendecompose(&b, 3), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn reconstruction_residual_vanishes_at_full_rank() {
        let g = Grid::<f64>::uniform(25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = OperatorMatrix::zeros(&g);
        for _ in 0..40 {
            let v: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
            a.add_rank_one(1.0, &v, &v);
        }
        let full = eigendecompose(&a, 25).unwrap();
        let mut prev = f64::INFINITY;
        for k in [1, 5, 10, 20, 25] {
            let part = full.truncated(k);
            let resid = (&a - &part.reconstruct()).hs_norm();
            let dropped: f64 = full.eigenvalues()[k..].iter().map(|l| l * l).sum::<f64>().sqrt();
            assert!(resid <= dropped + 1e-8 * full.leading());
            assert!(resid <= prev + 1e-12);
            prev = resid;
        }
        assert!(prev < 1e-8 * full.leading());
        let sum: f64 = full.eigenvalues().iter().sum();
        assert!((sum - a.trace()).abs() < 1e-8 * a.trace());
    }
}

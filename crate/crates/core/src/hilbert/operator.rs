use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::hilbert::curve::Curve;
use crate::hilbert::grid::{ensure_same, GridRef};
use crate::scalar::Scalar;

/// Linear operator on the grid, stored as its kernel.
///
/// Acts by quadrature: `(A u)(s) = sum_t K(s, t) w_t u(t)`. Composition,
/// adjoints and norms are all taken in the weighted (L2) metric.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    grid: GridRef<T>,
    kernel: Vec<T>,
}

/// The three operator norms of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNorms<T> {
    pub operator: T,
    pub hilbert_schmidt: T,
    pub trace: T,
}

impl<T: Scalar> OperatorMatrix<T> {
    /// Operator from a row-major `m x m` kernel.
    pub fn new(grid: GridRef<T>, kernel: Vec<T>) -> Result<Self> {
        let m = grid.len();
        if kernel.len() != m * m {
            return Err(Error::GridMismatch(format!(
                "kernel has {} entries for a {m}-point grid",
                kernel.len()
            )));
        }
        if kernel.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidInput("non-finite kernel entry".into()));
        }
        Ok(OperatorMatrix { grid, kernel })
    }

    pub(crate) fn from_raw(grid: GridRef<T>, kernel: Vec<T>) -> Self {
        debug_assert_eq!(kernel.len(), grid.len() * grid.len());
        OperatorMatrix { grid, kernel }
    }

    pub fn zeros(grid: &GridRef<T>) -> Self {
        let m = grid.len();
        OperatorMatrix { grid: grid.clone(), kernel: vec![T::zero(); m * m] }
    }

    /// Identity: the discrete delta kernel `1 / w_t` on the diagonal.
    pub fn identity(grid: &GridRef<T>) -> Self {
        let m = grid.len();
        let mut kernel = vec![T::zero(); m * m];
        for (i, &w) in grid.weights().iter().enumerate() {
            kernel[i * m + i] = T::one() / w;
        }
        OperatorMatrix { grid: grid.clone(), kernel }
    }

    /// Kernel sampled from `k(s, t)` at the grid points.
    pub fn from_kernel_fn(grid: &GridRef<T>, k: impl Fn(T, T) -> T) -> Self {
        let pts = grid.points();
        let kernel = pts.iter().flat_map(|&s| pts.iter().map(move |&t| (s, t))).map(|(s, t)| k(s, t)).collect();
        OperatorMatrix { grid: grid.clone(), kernel }
    }

    /// `sum_i c_i u_i (x) v_i`.
    pub fn from_rank_one_sum(grid: &GridRef<T>, terms: &[(T, &Curve<T>, &Curve<T>)]) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for (c, u, v) in terms {
            ensure_same(grid, u.grid(), "rank-one term")?;
            ensure_same(grid, v.grid(), "rank-one term")?;
            out.add_rank_one(*c, u.values(), v.values());
        }
        Ok(out)
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn kernel(&self) -> &[T] {
        &self.kernel
    }

    pub fn at(&self, s: usize, t: usize) -> T {
        self.kernel[s * self.dim() + t]
    }

    /// Adds `c * u (x) v` to the kernel in place (raw value slices).
    pub(crate) fn add_rank_one(&mut self, c: T, u: &[T], v: &[T]) {
        let m = self.dim();
        for (s, &us) in u.iter().enumerate() {
            let cu = c * us;
            if cu == T::zero() {
                continue;
            }
            let row = &mut self.kernel[s * m..(s + 1) * m];
            for (k, &vt) in row.iter_mut().zip(v) {
                *k += cu * vt;
            }
        }
    }

    /// Applies the operator. Panics on a length mismatch; see [`apply_operator`].
    pub fn apply(&self, x: &Curve<T>) -> Curve<T> {
        self.apply_values(x.values())
    }

    pub(crate) fn apply_values(&self, x: &[T]) -> Curve<T> {
        let m = self.dim();
        assert_eq!(x.len(), m, "operator/curve size mismatch");
        let wx: Vec<T> = self.grid.weights().iter().zip(x).map(|(&w, &v)| w * v).collect();
        let out = self
            .kernel
            .chunks_exact(m)
            .map(|row| row.iter().zip(&wx).map(|(&k, &v)| k * v).sum())
            .collect();
        Curve::from_raw(self.grid.clone(), out)
    }

    /// `self . other`, i.e. `x -> self(other(x))`.
    pub fn compose(&self, other: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
        ensure_same(&self.grid, &other.grid, "compose")?;
        let m = self.dim();
        let w = self.grid.weights();
        let mut out = vec![T::zero(); m * m];
        for s in 0..m {
            let out_row = &mut out[s * m..(s + 1) * m];
            for t in 0..m {
                let a = self.kernel[s * m + t] * w[t];
                if a == T::zero() {
                    continue;
                }
                let b_row = &other.kernel[t * m..(t + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(OperatorMatrix::from_raw(self.grid.clone(), out))
    }

    /// Adjoint in the weighted metric: the transposed kernel.
    pub fn adjoint(&self) -> OperatorMatrix<T> {
        let m = self.dim();
        let mut k = vec![T::zero(); m * m];
        for s in 0..m {
            for t in 0..m {
                k[t * m + s] = self.kernel[s * m + t];
            }
        }
        OperatorMatrix::from_raw(self.grid.clone(), k)
    }

    pub fn scale(&self, c: T) -> OperatorMatrix<T> {
        OperatorMatrix::from_raw(self.grid.clone(), self.kernel.iter().map(|&k| k * c).collect())
    }

    /// `self^k` by repeated composition (`k = 0` gives the identity).
    pub fn power(&self, k: u32) -> OperatorMatrix<T> {
        let mut out = Self::identity(&self.grid);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = out.compose(&base).expect("same grid");
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base).expect("same grid");
            }
        }
        out
    }

    /// `trace = sum_t K(t, t) w_t`.
    pub fn trace(&self) -> T {
        let m = self.dim();
        self.grid.weights().iter().enumerate().map(|(t, &w)| self.kernel[t * m + t] * w).sum()
    }

    /// Largest kernel asymmetry `|K(s,t) - K(t,s)|`.
    pub fn asymmetry(&self) -> T {
        let m = self.dim();
        let mut worst = T::zero();
        for s in 0..m {
            for t in 0..s {
                worst = worst.max((self.kernel[s * m + t] - self.kernel[t * m + s]).abs());
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> T {
        self.kernel.iter().fold(T::zero(), |a, &k| a.max(k.abs()))
    }

    /// The matrix `W^{1/2} K W^{1/2}`: in these coordinates the L2 geometry is Euclidean.
    pub fn weighted_matrix(&self) -> Vec<T> {
        let m = self.dim();
        let sw: Vec<T> = self.grid.weights().iter().map(|w| w.sqrt()).collect();
        let mut a = self.kernel.clone();
        for s in 0..m {
            for t in 0..m {
                a[s * m + t] *= sw[s] * sw[t];
            }
        }
        a
    }

    /// Inverse of [`Self::weighted_matrix`].
    pub fn from_weighted_matrix(grid: &GridRef<T>, a: Vec<T>) -> Self {
        let m = grid.len();
        let isw: Vec<T> = grid.weights().iter().map(|w| T::one() / w.sqrt()).collect();
        let mut k = a;
        for s in 0..m {
            for t in 0..m {
                k[s * m + t] *= isw[s] * isw[t];
            }
        }
        OperatorMatrix::from_raw(grid.clone(), k)
    }

    pub fn hs_norm(&self) -> T {
        self.weighted_matrix().iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    /// Singular values, decreasing (one-sided Jacobi on the weighted matrix).
    pub fn singular_values(&self) -> Vec<T> {
        let m = self.dim();
        let a = self.weighted_matrix();
        // columns of the weighted matrix, stored contiguously
        let mut cols: Vec<Vec<T>> = (0..m).map(|j| (0..m).map(|i| a[i * m + j]).collect()).collect();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..m {
                for q in p + 1..m {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for i in 0..m {
                        alpha += cols[p][i] * cols[p][i];
                        beta += cols[q][i] * cols[q][i];
                        gamma += cols[p][i] * cols[q][i];
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    let (left, right) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut left[p], &mut right[0]);
                    for i in 0..m {
                        let (x, y) = (cp[i], cq[i]);
                        cp[i] = c * x - s * y;
                        cq[i] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = cols.iter().map(|c| c.iter().map(|&v| v * v).sum::<T>().sqrt()).collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        sv
    }

    pub fn norms(&self) -> OpNorms<T> {
        let sv = self.singular_values();
        OpNorms {
            operator: sv.first().copied().unwrap_or(T::zero()),
            hilbert_schmidt: self.hs_norm(),
            trace: sv.iter().copied().sum(),
        }
    }

    pub fn operator_norm(&self) -> T {
        self.singular_values().first().copied().unwrap_or(T::zero())
    }

    /// Maps each kernel entry to another scalar type (e.g. f64 -> f32).
    pub fn cast<U: Scalar>(&self, grid: &GridRef<U>) -> Result<OperatorMatrix<U>> {
        OperatorMatrix::new(grid.clone(), self.kernel.iter().map(|k| U::of(k.as_f64())).collect())
    }
}

impl<T: Scalar> Add for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn add(self, rhs: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator size mismatch");
        let k = self.kernel.iter().zip(&rhs.kernel).map(|(&a, &b)| a + b).collect();
        OperatorMatrix::from_raw(self.grid.clone(), k)
    }
}

impl<T: Scalar> Sub for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn sub(self, rhs: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator size mismatch");
        let k = self.kernel.iter().zip(&rhs.kernel).map(|(&a, &b)| a - b).collect();
        OperatorMatrix::from_raw(self.grid.clone(), k)
    }
}

pub fn apply_operator<T: Scalar>(a: &OperatorMatrix<T>, x: &Curve<T>) -> Result<Curve<T>> {
    ensure_same(a.grid(), x.grid(), "apply operator")?;
    Ok(a.apply(x))
}

/// `u (x) v`: the rank-one operator `x -> <v, x> u`.
pub fn tensor_product<T: Scalar>(u: &Curve<T>, v: &Curve<T>) -> Result<OperatorMatrix<T>> {
    ensure_same(u.grid(), v.grid(), "tensor product")?;
    let mut op = OperatorMatrix::zeros(u.grid());
    op.add_rank_one(T::one(), u.values(), v.values());
    Ok(op)
}

pub fn op_norms<T: Scalar>(a: &OperatorMatrix<T>) -> OpNorms<T> {
    a.norms()
}

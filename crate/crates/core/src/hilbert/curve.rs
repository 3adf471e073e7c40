use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::hilbert::grid::{ensure_same, GridRef};
use crate::scalar::Scalar;

/// One functional observation: values of a function at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve<T> {
    grid: GridRef<T>,
    values: Vec<T>,
}

/// Geometry used by [`inner_product`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpaceKind {
    #[default]
    L2,
    /// `<u, v> + <u', v'>`, derivatives by finite differences.
    Sobolev21,
}

impl<T: Scalar> Curve<T> {
    pub fn new(grid: GridRef<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "curve has {} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite curve value at index {i}")));
        }
        Ok(Curve { grid, values })
    }

    pub(crate) fn from_raw(grid: GridRef<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Curve { grid, values }
    }

    pub fn zeros(grid: &GridRef<T>) -> Self {
        Curve { grid: grid.clone(), values: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: &GridRef<T>, c: T) -> Self {
        Curve { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: &GridRef<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Curve { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// L2 inner product. Panics on grid mismatch; use [`inner_product`] for a checked version.
    pub fn dot(&self, other: &Curve<T>) -> T {
        assert_eq!(self.len(), other.len(), "curve length mismatch");
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: T) -> Curve<T> {
        Curve::from_raw(self.grid.clone(), self.values.iter().map(|&v| v * c).collect())
    }

    /// `self + c * other` in place.
    pub fn axpy(&mut self, c: T, other: &Curve<T>) {
        assert_eq!(self.len(), other.len(), "curve length mismatch");
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Block `j` of a curve living on a product grid.
    pub fn block(&self, j: usize) -> Curve<T> {
        let m = self.grid.block_len();
        Curve::from_raw(self.grid.base(), self.values[j * m..(j + 1) * m].to_vec())
    }
}

impl<T: Scalar> Add for &Curve<T> {
    type Output = Curve<T>;
    fn add(self, rhs: &Curve<T>) -> Curve<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Scalar> Sub for &Curve<T> {
    type Output = Curve<T>;
    fn sub(self, rhs: &Curve<T>) -> Curve<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Scalar> Mul<T> for &Curve<T> {
    type Output = Curve<T>;
    fn mul(self, c: T) -> Curve<T> {
        self.scale(c)
    }
}

pub fn inner_product<T: Scalar>(u: &Curve<T>, v: &Curve<T>, space: SpaceKind) -> Result<T> {
    ensure_same(u.grid(), v.grid(), "inner product")?;
    let l2 = u.dot(v);
    match space {
        SpaceKind::L2 => Ok(l2),
        SpaceKind::Sobolev21 => {
            let du = derivative(u)?;
            let dv = derivative(v)?;
            Ok(l2 + du.dot(&dv))
        }
    }
}

/// Finite-difference derivative on a uniform grid: central differences in
/// the interior, second-order one-sided differences at both ends.
pub fn derivative<T: Scalar>(u: &Curve<T>) -> Result<Curve<T>> {
    let m = u.len();
    if m < 3 {
        return Err(Error::InvalidGrid(format!("derivative needs at least 3 points, got {m}")));
    }
    let h = u
        .grid()
        .uniform_step()
        .ok_or_else(|| Error::InvalidGrid("derivative requires a uniform single-block grid".into()))?;
    let x = u.values();
    let two_h = T::of(2.0) * h;
    let mut d = vec![T::zero(); m];
    d[0] = (T::of(-3.0) * x[0] + T::of(4.0) * x[1] - x[2]) / two_h;
    for i in 1..m - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / two_h;
    }
    d[m - 1] = (T::of(3.0) * x[m - 1] - T::of(4.0) * x[m - 2] + x[m - 3]) / two_h;
    Ok(Curve::from_raw(u.grid().clone(), d))
}

/// Weights of the one-sided derivative at the right endpoint: `f'(1) ~ sum_i c_i f(t_i)`.
pub(crate) fn endpoint_derivative_stencil<T: Scalar>(h: T) -> [T; 3] {
    let two_h = T::of(2.0) * h;
    [T::one() / two_h, T::of(-4.0) / two_h, T::of(3.0) / two_h]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_one_has_unit_norm() {
        let g = Grid::<f64>::uniform(101).unwrap();
        let one = Curve::constant(&g, 1.0);
        assert!((inner_product(&one, &one, SpaceKind::L2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_norm_matches_integral() {
        let g = Grid::<f64>::uniform(101).unwrap();
        let u = Curve::from_fn(&g, |t| t);
        let n2 = inner_product(&u, &u, SpaceKind::L2).unwrap();
        assert!((n2 - 1.0 / 3.0).abs() <= 1e-4, "{n2}");
    }

    #[test]
    fn zero_and_mismatch() {
        let g = Grid::<f64>::uniform(11).unwrap();
        let u = Curve::from_fn(&g, |t| (3.0 * t).sin());
        let z = Curve::zeros(&g);
        assert_eq!(inner_product(&u, &z, SpaceKind::L2).unwrap(), 0.0);
        let other = Grid::<f64>::uniform(12).unwrap();
        let w = Curve::zeros(&other);
        assert!(matches!(inner_product(&u, &w, SpaceKind::L2), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn sobolev_adds_derivative_term() {
        let g = Grid::<f64>::uniform(101).unwrap();
        let u = Curve::from_fn(&g, |t| t);
        let s = inner_product(&u, &u, SpaceKind::Sobolev21).unwrap();
        assert!((s - (1.0 / 3.0 + 1.0)).abs() < 1e-4);
    }

    #[test]
    fn derivative_exact_on_affine() {
        let g = Grid::<f64>::uniform(21).unwrap();
        let c = derivative(&Curve::constant(&g, 2.5)).unwrap();
        assert!(c.values().iter().all(|v| v.abs() < 1e-10));
        let d = derivative(&Curve::from_fn(&g, |t| t)).unwrap();
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn derivative_second_order_convergence() {
        let err = |m: usize| {
            let g = Grid::<f64>::uniform(m).unwrap();
            let d = derivative(&Curve::from_fn(&g, |t| (2.0 * PI * t).sin())).unwrap();
            g.points()
                .iter()
                .zip(d.values())
                .map(|(&t, &v)| (v - 2.0 * PI * (2.0 * PI * t).cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(101), err(401));
        // h shrinks by 4, so a second-order scheme shrinks the error by about 16
        let order = (e1 / e2).ln() / 4f64.ln();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
        assert!(e1 < 0.05);
    }

    #[test]
    fn derivative_rejects_tiny_grid() {
        let g = Grid::<f64>::uniform(2).unwrap();
        assert!(derivative(&Curve::zeros(&g)).is_err());
    }
}

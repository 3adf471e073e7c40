use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Discretization of `[0, 1]` with quadrature weights summing to one.
///
/// A product grid (see [`Grid::product`]) stacks `blocks` copies of a base
/// grid; it realizes the product space used for companion embeddings and its
/// weights sum to the number of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    points: Vec<T>,
    weights: Vec<T>,
    blocks: usize,
}

/// Shared handle; curves and operators hold one of these.
pub type GridRef<T> = Arc<Grid<T>>;

impl<T: Scalar> Grid<T> {
    /// `m` equally spaced points with trapezoidal weights.
    pub fn uniform(m: usize) -> Result<GridRef<T>> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
        }
        let last = T::of((m - 1) as f64);
        let points = (0..m).map(|i| T::of(i as f64) / last).collect();
        Self::from_points(points)
    }

    /// Grid on the given points with (non-uniform) trapezoidal weights.
    pub fn from_points(points: Vec<T>) -> Result<GridRef<T>> {
        let m = points.len();
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite point".into()));
        }
        if points[0] != T::zero() || points[m - 1] != T::one() {
            return Err(Error::InvalidGrid("points must start at 0 and end at 1".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        let half = T::of(0.5);
        let mut weights = vec![T::zero(); m];
        for i in 0..m - 1 {
            let h = (points[i + 1] - points[i]) * half;
            weights[i] += h;
            weights[i + 1] += h;
        }
        Ok(Arc::new(Grid { points, weights, blocks: 1 }))
    }

    /// Grid with explicit weights. Weights must be positive and sum to one.
    pub fn with_weights(points: Vec<T>, weights: Vec<T>) -> Result<GridRef<T>> {
        let base = Self::from_points(points)?;
        if weights.len() != base.len() {
            return Err(Error::InvalidGrid("weights length differs from points".into()));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidGrid("weights must be strictly positive".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::InvalidGrid(format!("weights sum to {total}, expected 1")));
        }
        Ok(Arc::new(Grid { points: base.points.clone(), weights, blocks: 1 }))
    }

    /// `p` stacked copies of this grid.
    pub fn product(&self, p: usize) -> Result<GridRef<T>> {
        if self.blocks != 1 {
            return Err(Error::InvalidGrid("product of a product grid".into()));
        }
        if p == 0 {
            return Err(Error::InvalidGrid("product order must be positive".into()));
        }
        Ok(Arc::new(Grid {
            points: self.points.repeat(p),
            weights: self.weights.repeat(p),
            blocks: p,
        }))
    }

    /// The single-block grid a product grid was built from.
    pub fn base(&self) -> GridRef<T> {
        let m = self.block_len();
        Arc::new(Grid {
            points: self.points[..m].to_vec(),
            weights: self.weights[..m].to_vec(),
            blocks: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_len(&self) -> usize {
        self.points.len() / self.blocks
    }

    /// Spacing when the (single-block) grid is uniform.
    pub fn uniform_step(&self) -> Option<T> {
        if self.blocks != 1 {
            return None;
        }
        let m = self.len();
        let h = T::one() / T::of((m - 1) as f64);
        let ok = self
            .points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= T::tol(1e-9) * h);
        ok.then_some(h)
    }
}

/// True when two grid handles describe the same discretization.
pub fn same_grid<T: Scalar>(a: &GridRef<T>, b: &GridRef<T>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn ensure_same<T: Scalar>(a: &GridRef<T>, b: &GridRef<T>, what: &str) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{what}: {} points vs {} points",
            a.len(),
            b.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_weights_sum_to_one() {
        let g = Grid::<f64>::uniform(101).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[100], 1.0);
        assert!((g.weights()[0] - 0.005).abs() < 1e-15);
        assert!(g.uniform_step().is_some());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(Grid::<f64>::from_points(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Grid::<f64>::from_points(vec![0.1, 1.0]).is_err());
        assert!(Grid::<f64>::uniform(1).is_err());
        assert!(Grid::<f64>::with_weights(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn product_grid_blocks() {
        let g = Grid::<f64>::uniform(5).unwrap();
        let p = g.product(3).unwrap();
        assert_eq!(p.len(), 15);
        assert_eq!(p.blocks(), 3);
        assert_eq!(p.block_len(), 5);
        assert_eq!(*p.base(), *g);
        assert!(p.uniform_step().is_none());
    }
}

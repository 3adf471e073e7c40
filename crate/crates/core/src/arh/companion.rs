use crate::error::{Error, Result};
use crate::hilbert::{Curve, GridRef, OperatorMatrix};
use crate::scalar::Scalar;

/// `Y_t = (X_t, X_{t-1}, .., X_{t-p+1})` on the `p`-fold product grid, t = p-1..n-1.
pub fn companion_embed<T: Scalar>(sample: &[Curve<T>], p: usize) -> Result<Vec<Curve<T>>> {
    if p == 0 {
        return Err(Error::InvalidInput("order must be positive".into()));
    }
    if sample.len() < p + 2 {
        return Err(Error::InvalidInput(format!("order {p} needs at least {} curves, got {}", p + 2, sample.len())));
    }
    let base = sample[0].grid();
    if base.blocks() != 1 {
        return Err(Error::InvalidGrid("sample already lives on a product grid".into()));
    }
    let grid = base.product(p)?;
    (p - 1..sample.len())
        .map(|t| {
            let mut v = Vec::with_capacity(grid.len());
            for j in 0..p {
                crate::hilbert::grid::ensure_same(base, sample[t - j].grid(), "sample curve")?;
                v.extend_from_slice(sample[t - j].values());
            }
            Curve::new(grid.clone(), v)
        })
        .collect()
}

/// Inverse of [`companion_embed`].
pub fn companion_unembed<T: Scalar>(stacked: &[Curve<T>]) -> Result<Vec<Curve<T>>> {
    let first = stacked.first().ok_or_else(|| Error::InvalidInput("empty stacked sample".into()))?;
    let p = first.grid().blocks();
    let mut out: Vec<Curve<T>> = (0..p).rev().map(|j| first.block(j)).collect();
    out.extend(stacked[1..].iter().map(|y| y.block(0)));
    Ok(out)
}

/// Block `(i, j)` of an operator on a product grid, as a base-grid operator.
pub fn operator_block<T: Scalar>(op: &OperatorMatrix<T>, i: usize, j: usize) -> Result<OperatorMatrix<T>> {
    let grid: &GridRef<T> = op.grid();
    let p = grid.blocks();
    if i >= p || j >= p {
        return Err(Error::InvalidInput(format!("block ({i},{j}) outside a {p}-block operator")));
    }
    let m = grid.block_len();
    let big = grid.len();
    let k = op.kernel();
    let mut sub = Vec::with_capacity(m * m);
    for s in 0..m {
        sub.extend_from_slice(&k[(i * m + s) * big + j * m..(i * m + s) * big + (j + 1) * m]);
    }
    OperatorMatrix::new(grid.base(), sub)
}

/// `rho_1 .. rho_p` from the first block row of a companion operator.
pub fn companion_extract<T: Scalar>(op: &OperatorMatrix<T>) -> Result<Vec<OperatorMatrix<T>>> {
    (0..op.grid().blocks()).map(|j| operator_block(op, 0, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Grid;
    use crate::sim::companion_operator;

    fn sample(m: usize, n: usize) -> Vec<Curve<f64>> {
        let g = Grid::<f64>::uniform(m).unwrap();
        (0..n).map(|i| Curve::from_fn(&g, |t| (t * (i + 1) as f64).sin())).collect()
    }

    #[test]
    fn order_one_is_identity() {
        let xs = sample(7, 6);
        let ys = companion_embed(&xs, 1).unwrap();
        assert_eq!(ys.len(), 6);
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(x.values(), y.values());
        }
    }

    #[test]
    fn round_trip() {
        let xs = sample(5, 9);
        for p in 1..=3 {
            let ys = companion_embed(&xs, p).unwrap();
            assert_eq!(ys.len(), 9 - p + 1);
            if p > 1 {
                assert_eq!(ys[1].block(1).values(), xs[p - 1].values());
            }
            let back = companion_unembed(&ys).unwrap();
            assert_eq!(back.len(), xs.len());
            for (a, b) in xs.iter().zip(&back) {
                assert_eq!(a.values(), b.values());
            }
        }
        assert!(companion_embed(&xs, 8).is_err());
    }

    #[test]
    fn blocks_of_companion_operator() {
        let g = Grid::<f64>::uniform(6).unwrap();
        let a = OperatorMatrix::from_kernel_fn(&g, |s, t| s * t);
        let b = OperatorMatrix::from_kernel_fn(&g, |s, t| s - t);
        let c = companion_operator(&[a.clone(), b.clone()]).unwrap();
        let got = companion_extract(&c).unwrap();
        assert_eq!(got[0].kernel(), a.kernel());
        assert_eq!(got[1].kernel(), b.kernel());
        let id = operator_block(&c, 1, 0).unwrap();
        assert!((&id - &OperatorMatrix::identity(&g)).max_abs_entry() < 1e-12);
        assert!(operator_block(&c, 2, 0).is_err());
    }
}

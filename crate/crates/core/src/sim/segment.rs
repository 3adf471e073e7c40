use crate::error::{Error, Result};
use crate::hilbert::{Curve, GridRef};
use crate::scalar::Scalar;

/// Cuts a scalar series into consecutive non-overlapping pieces of length
/// `grid.len()`. A trailing partial piece is an error unless `truncate`.
pub fn segment_path<T: Scalar>(path: &[T], grid: &GridRef<T>, truncate: bool) -> Result<Vec<Curve<T>>> {
    let m = grid.len();
    if path.len() % m != 0 && !truncate {
        return Err(Error::InvalidInput(format!(
            "series length {} is not a multiple of the period {m}",
            path.len()
        )));
    }
    path.chunks_exact(m).map(|c| Curve::new(grid.clone(), c.to_vec())).collect()
}

/// Inverse of [`segment_path`].
pub fn concatenate<T: Scalar>(curves: &[Curve<T>]) -> Vec<T> {
    curves.iter().flat_map(|c| c.values().iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Grid;

    #[test]
    fn monthly_series_to_years() {
        let g = Grid::<f64>::uniform(12).unwrap();
        let s: Vec<f64> = (0..24).map(|i| i as f64).collect();
        let c = segment_path(&s, &g, false).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].values()[0], 12.0);
        assert_eq!(concatenate(&c), s);
    }

    #[test]
    fn constant_series_gives_identical_curves() {
        let g = Grid::<f64>::uniform(4).unwrap();
        let c = segment_path(&[2.0; 12], &g, false).unwrap();
        assert!(c.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn partial_segment_rules() {
        let g = Grid::<f64>::uniform(5).unwrap();
        let s = vec![0.0; 12];
        assert!(segment_path(&s, &g, false).is_err());
        assert_eq!(segment_path(&s, &g, true).unwrap().len(), 2);
    }
}

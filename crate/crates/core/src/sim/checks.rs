use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationarityReport {
    pub radius: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvertibilityReport {
    pub pass: bool,
    pub margin: f64,
}

const SQUARINGS: usize = 30;

/// Spectral radius `lim ||rho^k||^(1/k)`, estimated by repeated squaring with
/// renormalization. Works for non-normal operators.
pub fn spectral_radius<T: Scalar>(rho: &OperatorMatrix<T>) -> f64 {
    let m = rho.dim();
    let mut b: Vec<f64> = rho.weighted_matrix().iter().map(|v| v.as_f64()).collect();
    let frob = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n0 = frob(&b);
    if n0 == 0.0 {
        return 0.0;
    }
    b.iter_mut().for_each(|v| *v /= n0);
    // rho^(2^j) = exp(log_scale) * b
    let mut log_scale = n0.ln();
    let mut estimate = n0;
    for j in 1..=SQUARINGS {
        let mut sq = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let a = b[i * m + k];
                if a == 0.0 {
                    continue;
                }
                for (o, &c) in sq[i * m..(i + 1) * m].iter_mut().zip(&b[k * m..(k + 1) * m]) {
                    *o += a * c;
                }
            }
        }
        let ns = frob(&sq);
        // collapse to rounding level: the operator is nilpotent
        if ns <= 1e3 * f64::EPSILON {
            return 0.0;
        }
        sq.iter_mut().for_each(|v| *v /= ns);
        b = sq;
        log_scale = 2.0 * log_scale + ns.ln();
        estimate = (log_scale / (1u64 << j) as f64).exp();
    }
    estimate
}

/// Passes iff the spectral radius is below `1 - 1e-6`.
pub fn stationarity_check<T: Scalar>(rho: &OperatorMatrix<T>) -> StationarityReport {
    let radius = spectral_radius(rho);
    StationarityReport { radius, pass: radius < 1.0 - 1e-6 }
}

pub(crate) fn require_stationary<T: Scalar>(rho: &OperatorMatrix<T>) -> Result<StationarityReport> {
    let rep = stationarity_check(rho);
    if rep.pass {
        Ok(rep)
    } else {
        Err(Error::NotStationary { radius: rep.radius })
    }
}

/// Sufficient invertibility condition `sum_j ||a_j|| < 1` for a linear process.
pub fn invertibility_check(norms: &[f64]) -> Result<InvertibilityReport> {
    if let Some(n) = norms.iter().find(|n| !(**n >= 0.0) || !n.is_finite()) {
        return Err(Error::InvalidInput(format!("operator norms must be nonnegative, got {n}")));
    }
    let margin = 1.0 - norms.iter().sum::<f64>();
    Ok(InvertibilityReport { pass: margin > 0.0, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{tensor_product, Grid};
    use crate::sim::noise::fourier_basis;

    #[test]
    fn radius_of_scaled_projector() {
        let g = Grid::<f64>::uniform(41).unwrap();
        let e = fourier_basis(&g, 1);
        let rho = tensor_product(&e[0], &e[0]).unwrap().scale(0.5);
        let r = stationarity_check(&rho);
        assert!((r.radius - 0.5).abs() < 1e-9);
        assert!(r.pass);
    }

    #[test]
    fn identity_fails() {
        let g = Grid::<f64>::uniform(21).unwrap();
        let r = stationarity_check(&OperatorMatrix::identity(&g));
        assert!((r.radius - 1.0).abs() < 1e-6);
        assert!(!r.pass);
    }

    #[test]
    fn nilpotent_shift_passes_despite_large_norm() {
        let g = Grid::<f64>::uniform(41).unwrap();
        let e = fourier_basis(&g, 3);
        let shift = OperatorMatrix::from_rank_one_sum(&g, &[(2.0, &e[1], &e[0]), (2.0, &e[2], &e[1])]).unwrap();
        assert!((shift.operator_norm() - 2.0).abs() < 1e-9);
        assert!(shift.power(3).hs_norm() < 1e-12);
        let r = stationarity_check(&shift);
        assert_eq!(r.radius, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn non_normal_radius() {
        // Jordan-like block: radius 0.6 although the norm exceeds 1
        let g = Grid::<f64>::uniform(41).unwrap();
        let e = fourier_basis(&g, 2);
        let rho = OperatorMatrix::from_rank_one_sum(
            &g,
            &[(0.6, &e[0], &e[0]), (0.6, &e[1], &e[1]), (3.0, &e[0], &e[1])],
        )
        .unwrap();
        let r = stationarity_check(&rho);
        assert!((r.radius - 0.6).abs() < 1e-4, "{}", r.radius);
    }

    #[test]
    fn invertibility_margin() {
        let r = invertibility_check(&[0.5]).unwrap();
        assert!(r.pass && (r.margin - 0.5).abs() < 1e-15);
        let r = invertibility_check(&[0.6, 0.6]).unwrap();
        assert!(!r.pass);
        let r = invertibility_check(&[]).unwrap();
        assert!(r.pass && r.margin == 1.0);
        assert!(invertibility_check(&[-0.1]).is_err());
    }
}

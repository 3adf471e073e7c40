//! Bounded surrogates for the inverse of a covariance operator.
//!
//! All three schemes act diagonally in the eigenbasis of the operator:
//!
//! | scheme          | multiplier on `e_l`          |
//! |-----------------|------------------------------|
//! | spectral cutoff | `1/lambda_l` for `l <= k`, else 0 |
//! | penalized       | `1/(lambda_l + alpha)`       |
//! | Tikhonov        | `lambda_l/(lambda_l^2 + alpha)` |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Curve, EigenSystem, OperatorMatrix};
use crate::scalar::Scalar;

/// Eigenvalues below this fraction of the leading one count as zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegScheme {
    SpectralCutoff { k: usize },
    Penalized { alpha: f64 },
    Tikhonov { alpha: f64 },
}

impl RegScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegScheme::SpectralCutoff { k } if k == 0 => Err(Error::InvalidInput("cutoff must be at least 1".into())),
            RegScheme::Penalized { alpha } | RegScheme::Tikhonov { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// Multiplier applied to an eigendirection with eigenvalue `lambda` and rank `l` (1-based).
    pub fn multiplier<T: Scalar>(&self, l: usize, lambda: T) -> T {
        match *self {
            RegScheme::SpectralCutoff { k } => {
                if l <= k && lambda > T::zero() {
                    T::one() / lambda
                } else {
                    T::zero()
                }
            }
            RegScheme::Penalized { alpha } => T::one() / (lambda + T::of(alpha)),
            RegScheme::Tikhonov { alpha } => lambda / (lambda * lambda + T::of(alpha)),
        }
    }

    /// Order from most to least regularized, used for tie-breaking.
    pub(crate) fn regularization_rank(&self) -> (u8, f64) {
        match *self {
            RegScheme::SpectralCutoff { k } => (0, k as f64),
            RegScheme::Penalized { alpha } => (1, -alpha),
            RegScheme::Tikhonov { alpha } => (2, -alpha),
        }
    }
}

impl fmt::Display for RegScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegScheme::SpectralCutoff { k } => write!(f, "cutoff:{k}"),
            RegScheme::Penalized { alpha } => write!(f, "penalized:{alpha:e}"),
            RegScheme::Tikhonov { alpha } => write!(f, "tikhonov:{alpha:e}"),
        }
    }
}

impl FromStr for RegScheme {
    type Err = Error;

    /// `cutoff:K`, `penalized:ALPHA` or `tikhonov:ALPHA`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("scheme `{s}` is not KIND:VALUE")))?;
        let bad = |_: std::num::ParseFloatError| Error::InvalidInput(format!("bad scheme parameter in `{s}`"));
        let scheme = match kind {
            "cutoff" => RegScheme::SpectralCutoff { k: value.parse().map_err(|_| Error::InvalidInput(format!("bad cutoff in `{s}`")))? },
            "penalized" => RegScheme::Penalized { alpha: value.parse().map_err(bad)? },
            "tikhonov" => RegScheme::Tikhonov { alpha: value.parse().map_err(bad)? },
            other => return Err(Error::InvalidInput(format!("unknown scheme kind `{other}`"))),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// `Gamma^dagger` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct RegularizedInverse<T> {
    pub operator: OperatorMatrix<T>,
    pub scheme: RegScheme,
    pub source_eigens: EigenSystem<T>,
    /// Multiplier applied to each eigenfunction of `source_eigens`.
    pub multipliers: Vec<T>,
}

impl<T: Scalar> RegularizedInverse<T> {
    /// Operator norm read off the multipliers.
    pub fn analytic_norm(&self) -> T {
        self.multipliers.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    /// Deviation of `Gamma^dagger Gamma` from the identity on each eigendirection.
    pub fn identity_defect(&self) -> Vec<T> {
        self.source_eigens.eigenvalues().iter().zip(&self.multipliers).map(|(&l, &f)| T::one() - f * l).collect()
    }
}

/// Number of eigenvalues above the numerical floor.
pub fn admissible_rank<T: Scalar>(eig: &EigenSystem<T>) -> usize {
    eig.positive_count(T::of(EIGEN_FLOOR))
}

pub fn reg_inverse<T: Scalar>(eig: &EigenSystem<T>, scheme: RegScheme) -> Result<RegularizedInverse<T>> {
    scheme.validate()?;
    let admissible = admissible_rank(eig);
    if let RegScheme::SpectralCutoff { k } = scheme {
        if k > admissible {
            return Err(Error::CutoffTooLarge { requested: k, max_admissible: admissible });
        }
    }
    let floor = T::of(EIGEN_FLOOR) * eig.leading();
    let multipliers: Vec<T> = eig
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let l = if l > floor { l } else { T::zero() };
            scheme.multiplier(i + 1, l)
        })
        .collect();
    let mut operator = OperatorMatrix::zeros(eig.grid());
    for (e, &f) in eig.eigenfunctions().iter().zip(&multipliers) {
        if f != T::zero() {
            operator.add_rank_one(f, e.values(), e.values());
        }
    }
    Ok(RegularizedInverse { operator, scheme, source_eigens: eig.clone(), multipliers })
}

/// Result of [`pointwise_limit_check`].
#[derive(Debug, Clone)]
pub struct PointwiseLimit<T> {
    /// `||Gamma^dagger x - Gamma^{-1} x||` per scheme; empty when `x` is out of the domain.
    pub errors: Vec<T>,
    pub in_domain: bool,
    /// Norm of the part of `x` outside the positive eigen-span.
    pub outside_mass: T,
}

/// Tracks how `Gamma^dagger x` approaches `Gamma^{-1} x` along a schedule of schemes.
pub fn pointwise_limit_check<T: Scalar>(
    eig: &EigenSystem<T>,
    x: &Curve<T>,
    schedule: &[RegScheme],
) -> Result<PointwiseLimit<T>> {
    let k = admissible_rank(eig);
    let coords: Vec<T> = eig.eigenfunctions()[..k].iter().map(|e| e.dot(x)).collect();
    let inside: T = coords.iter().map(|c| *c * *c).sum();
    let outside_mass = (x.norm_sq() - inside).max(T::zero()).sqrt();
    let in_domain = outside_mass <= T::tol(1e-8) * x.norm().max(T::min_positive_value()) && x.norm() > T::zero();
    if !in_domain {
        return Ok(PointwiseLimit { errors: Vec::new(), in_domain, outside_mass });
    }
    let lambdas = &eig.eigenvalues()[..k];
    let mut errors = Vec::with_capacity(schedule.len());
    for scheme in schedule {
        scheme.validate()?;
        let err: T = coords
            .iter()
            .zip(lambdas)
            .enumerate()
            .map(|(i, (&c, &l))| {
                let d = scheme.multiplier(i + 1, l) - T::one() / l;
                d * d * c * c
            })
            .sum();
        errors.push(err.sqrt());
    }
    Ok(PointwiseLimit { errors, in_domain, outside_mass })
}

/// Partial sums `sum_{p <= P} x_p^2 / lambda_p^2` over the positive spectrum.
pub fn domain_diagnostic<T: Scalar>(x: &Curve<T>, eig: &EigenSystem<T>) -> Vec<T> {
    let k = admissible_rank(eig);
    let mut acc = T::zero();
    eig.eigenfunctions()[..k]
        .iter()
        .zip(eig.eigenvalues())
        .map(|(e, &l)| {
            let c = e.dot(x);
            acc += c * c / (l * l);
            acc
        })
        .collect()
}

/// Truncation level `max(1, floor(c n^(1/5)))`, clipped to `max_k` when given.
/// This grows slower than `n^(1/4) / log n`.
pub fn cutoff_schedule(n: usize, c: f64, max_k: Option<usize>) -> usize {
    let raw = (c * (n.max(2) as f64).powf(0.2) + 1e-9).floor();
    let k = if raw >= 1.0 { raw as usize } else { 1 };
    match max_k {
        Some(cap) => k.min(cap.max(1)),
        None => k,
    }
}

/// Logarithmic grid of `count` values from `lambda_1` down to `1e-6 lambda_1`.
pub fn alpha_grid(lambda1: f64, count: usize) -> Vec<f64> {
    let (hi, lo) = (lambda1.ln(), (1e-6 * lambda1).ln());
    if count <= 1 {
        return vec![lambda1];
    }
    (0..count).map(|i| (hi + (lo - hi) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Grid, GridRef};
    use crate::sim::fourier_basis;

    fn system(vals: &[f64]) -> (GridRef<f64>, EigenSystem<f64>) {
        let g = Grid::uniform(41).unwrap();
        let e = fourier_basis(&g, vals.len());
        (g.clone(), EigenSystem::new(g, vals.to_vec(), e).unwrap())
    }

    #[test]
    fn multiplier_tables() {
        let (_, eig) = system(&[1.0, 0.5, 0.25]);
        let r = reg_inverse(&eig, RegScheme::SpectralCutoff { k: 2 }).unwrap();
        assert_eq!(r.multipliers, vec![1.0, 2.0, 0.0]);
        assert_eq!(RegScheme::Penalized { alpha: 1.0 }.multiplier(1, 1.0f64), 0.5);
        assert_eq!(RegScheme::Tikhonov { alpha: 0.25 }.multiplier(1, 0.5f64), 1.0);
    }

    #[test]
    fn operator_acts_on_eigenfunctions() {
        let (_, eig) = system(&[1.0, 0.5, 0.25]);
        for scheme in [
            RegScheme::SpectralCutoff { k: 3 },
            RegScheme::Penalized { alpha: 0.1 },
            RegScheme::Tikhonov { alpha: 0.05 },
        ] {
            let r = reg_inverse(&eig, scheme).unwrap();
            for (e, &f) in eig.eigenfunctions().iter().zip(&r.multipliers) {
                let got = r.operator.apply(e);
                assert!((&got - &e.scale(f)).norm() < 1e-10);
            }
            assert!((r.operator.operator_norm() - r.analytic_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn cutoff_beyond_positive_spectrum_is_rejected() {
        let (_, eig) = system(&[1.0, 0.5, 0.0]);
        let err = reg_inverse(&eig, RegScheme::SpectralCutoff { k: 3 }).unwrap_err();
        assert!(matches!(err, Error::CutoffTooLarge { requested: 3, max_admissible: 2 }));
    }

    #[test]
    fn pointwise_limits() {
        let (g, eig) = system(&[1.0, 0.5]);
        let e1 = eig.eigenfunctions()[0].clone();
        let r = pointwise_limit_check(&eig, &e1, &[RegScheme::SpectralCutoff { k: 1 }]).unwrap();
        assert!(r.errors[0] < 1e-14);

        let x = &eig.eigenfunctions()[0] + &eig.eigenfunctions()[1];
        let sched: Vec<_> = [1e-1, 1e-2, 1e-3].iter().map(|&a| RegScheme::Tikhonov { alpha: a }).collect();
        let r = pointwise_limit_check(&eig, &x, &sched).unwrap();
        assert!(r.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", r.errors);
        // analytic values: |l/(l^2+a) - 1/l| = a / (l (l^2 + a))
        let want: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&a: &f64| ((a / (1.0 + a)).powi(2) + (a / (0.5 * (0.25 + a))).powi(2)).sqrt())
            .collect();
        for (a, b) in r.errors.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }

        let outside = fourier_basis(&g, 3)[2].clone();
        let r = pointwise_limit_check(&eig, &outside, &sched).unwrap();
        assert!(!r.in_domain && r.errors.is_empty());
    }

    #[test]
    fn domain_profiles() {
        let (g, eig) = system(&[1.0, 0.5, 0.25, 0.125]);
        let e1 = eig.eigenfunctions()[0].clone();
        let prof = domain_diagnostic(&e1, &eig);
        assert!(prof.iter().all(|&p| (p - 1.0).abs() < 1e-10));
        let mut x = crate::hilbert::Curve::zeros(&g);
        for (e, &l) in eig.eigenfunctions().iter().zip(eig.eigenvalues()) {
            x.axpy(l, e);
        }
        let prof = domain_diagnostic(&x, &eig);
        for (i, p) in prof.iter().enumerate() {
            assert!((p - (i + 1) as f64).abs() < 1e-8);
        }
        let z = domain_diagnostic(&crate::hilbert::Curve::zeros(&g), &eig);
        assert!(z.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn schedule_values() {
        assert_eq!(cutoff_schedule(2000, 1.0, None), 4);
        assert_eq!(cutoff_schedule(10, 1.0, None), 1);
        assert_eq!(cutoff_schedule(10, 0.1, None), 1);
        assert_eq!(cutoff_schedule(100_000, 1.0, Some(3)), 3);
        // k log n / n^(1/4) ~ log n / n^(1/20): rises up to n = e^20, then decays to zero
        let ratio = |n: f64| cutoff_schedule(n as usize, 1.0, None) as f64 * n.ln() / n.powf(0.25);
        let early: Vec<f64> = [1e3, 1e4, 1e5, 1e6].iter().map(|&n| ratio(n)).collect();
        assert!(early.windows(2).all(|w| w[1] > w[0]), "{early:?}");
        let late: Vec<f64> = [1e10, 1e12, 1e14, 1e16].iter().map(|&n| ratio(n)).collect();
        assert!(late.windows(2).all(|w| w[1] < w[0]), "{late:?}");
    }

    #[test]
    fn scheme_strings() {
        assert_eq!("cutoff:4".parse::<RegScheme>().unwrap(), RegScheme::SpectralCutoff { k: 4 });
        assert_eq!("tikhonov:0.5".parse::<RegScheme>().unwrap(), RegScheme::Tikhonov { alpha: 0.5 });
        assert!("cutoff:0".parse::<RegScheme>().is_err());
        assert!("penalized:-1".parse::<RegScheme>().is_err());
        assert!("ridge:1".parse::<RegScheme>().is_err());
        let s = RegScheme::Penalized { alpha: 0.01 };
        assert_eq!(s.to_string().parse::<RegScheme>().unwrap(), s);
        let grid = alpha_grid(2.0, 20);
        assert_eq!(grid.len(), 20);
        assert!((grid[0] - 2.0).abs() < 1e-12 && (grid[19] - 2e-6).abs() < 1e-15);
    }
}

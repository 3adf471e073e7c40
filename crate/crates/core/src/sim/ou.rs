use crate::error::{Error, Result};
use crate::hilbert::{Curve, GridRef, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::arh::SegmentedProcess;
use crate::sim::rng::{std_normal, substream};

/// Kernel of `rho(x)(t) = exp(-a t) x(1)`.
pub fn ou_operator<T: Scalar>(a: T, grid: &GridRef<T>) -> OperatorMatrix<T> {
    let m = grid.len();
    let w_last = grid.weights()[m - 1];
    let mut k = vec![T::zero(); m * m];
    for (s, &t) in grid.points().iter().enumerate() {
        k[s * m + m - 1] = (-a * t).exp() / w_last;
    }
    OperatorMatrix::from_raw(grid.clone(), k)
}

/// Stationary Ornstein-Uhlenbeck path `d eta = -a eta dt + dw`, sampled
/// exactly on consecutive unit segments and cut into curves.
///
/// Segments share their endpoints: `X_n(0) = X_{n-1}(1)`. Innovations are
/// `eps_n(t) = X_n(t) - exp(-a t) X_{n-1}(1)`.
pub fn simulate_ou_segments<T: Scalar>(a: T, n: usize, grid: &GridRef<T>, seed: u64) -> Result<SegmentedProcess<T>> {
    if !(a > T::zero()) {
        return Err(Error::InvalidInput(format!("O-U rate must be positive, got {a}")));
    }
    if grid.blocks() != 1 {
        return Err(Error::InvalidGrid("O-U segments need a single-block grid".into()));
    }
    let mut rng = substream(seed, 0);
    let pts = grid.points();
    let m = pts.len();
    let two_a = T::of(2.0) * a;
    let mut eta = std_normal::<T, _>(&mut rng) * (T::one() / two_a).sqrt();
    let steps: Vec<(T, T)> = pts
        .windows(2)
        .map(|w| {
            let decay = (-a * (w[1] - w[0])).exp();
            (decay, ((T::one() - decay * decay) / two_a).sqrt())
        })
        .collect();
    let mut sample = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    for _ in 0..n {
        let start = eta;
        let mut vals = Vec::with_capacity(m);
        vals.push(eta);
        for &(decay, sd) in &steps {
            eta = decay * eta + sd * std_normal::<T, _>(&mut rng);
            vals.push(eta);
        }
        let innov = pts.iter().zip(&vals).map(|(&t, &x)| x - (-a * t).exp() * start).collect();
        sample.push(Curve::from_raw(grid.clone(), vals));
        innovations.push(Curve::from_raw(grid.clone(), innov));
    }
    Ok(SegmentedProcess { sample, innovations, truth: Some(ou_operator(a, grid)), derivatives: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Grid;

    #[test]
    fn rejects_nonpositive_rate() {
        let g = Grid::<f64>::uniform(11).unwrap();
        assert!(simulate_ou_segments(0.0, 5, &g, 1).is_err());
        assert!(simulate_ou_segments(-1.0, 5, &g, 1).is_err());
    }

    #[test]
    fn segments_are_continuous() {
        let g = Grid::<f64>::uniform(26).unwrap();
        let p = simulate_ou_segments(1.0, 50, &g, 4).unwrap();
        for w in p.sample.windows(2) {
            assert_eq!(w[1].values()[0], w[0].values()[25]);
        }
    }

    #[test]
    fn representation_identity() {
        let g = Grid::<f64>::uniform(26).unwrap();
        let p = simulate_ou_segments(0.7, 20, &g, 4).unwrap();
        let rho = p.truth.as_ref().unwrap();
        for k in 1..p.len() {
            let pred = rho.apply(&p.sample[k - 1]);
            let resid = &(&p.sample[k] - &pred) - &p.innovations[k];
            assert!(resid.values().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn marginal_variance_is_stationary() {
        let g = Grid::<f64>::uniform(51).unwrap();
        let p = simulate_ou_segments(1.0, 2000, &g, 8).unwrap();
        let (mut s, mut c) = (0.0, 0usize);
        for x in &p.sample {
            for &v in &x.values()[1..] {
                s += v * v;
                c += 1;
            }
        }
        let var = s / c as f64;
        assert!(c >= 100_000);
        assert!((var - 0.5).abs() <= 0.05, "{var}");
    }
}

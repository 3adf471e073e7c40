//! The Wong process `xi_t = sqrt3 exp(-sqrt3 t) int_0^{exp(2t/sqrt3)} w_u du`.
//!
//! With `v = exp(2t/sqrt3)` the pair `a = w_v / sqrt(v)`,
//! `b = int_0^v w_u du / v^(3/2)` is a time-homogeneous Gaussian Markov
//! process in `t`; its transitions are exact and never touch the
//! exponentially growing clock `v`. In these coordinates `xi = sqrt3 b` and
//! `xi' = 2a - sqrt3 xi`.

use crate::error::{Error, Result};
use crate::hilbert::curve::endpoint_derivative_stencil;
use crate::hilbert::{Curve, GridRef, OperatorMatrix};
use crate::scalar::Scalar;
use crate::sim::arh::SegmentedProcess;
use crate::sim::rng::{std_normal, substream};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `c(t) = (sqrt3 / 2) exp(-sqrt3 t) (exp(2t / sqrt3) - 1)`.
pub fn wong_c(t: f64) -> f64 {
    0.5 * SQRT3 * (-SQRT3 * t).exp() * ((2.0 * t / SQRT3).exp() - 1.0)
}

/// Coefficient of `f(1)` in `A f`: `exp(-sqrt3 t) + sqrt3 c(t)`.
pub fn wong_phi(t: f64) -> f64 {
    (-SQRT3 * t).exp() + SQRT3 * wong_c(t)
}

/// `A f = phi(f) + Psi(D) f`, evaluated from the endpoint value and slope.
pub fn wong_apply_exact<T: Scalar>(grid: &GridRef<T>, f_end: T, df_end: T) -> Curve<T> {
    Curve::from_fn(grid, |t| {
        let t = t.as_f64();
        T::of(wong_phi(t)) * f_end + T::of(wong_c(t)) * df_end
    })
}

/// Kernel of `A` on a uniform grid, with `f'(1)` by the one-sided
/// second-order difference.
pub fn wong_operator<T: Scalar>(grid: &GridRef<T>) -> Result<OperatorMatrix<T>> {
    let h = grid
        .uniform_step()
        .ok_or_else(|| Error::InvalidGrid("Wong operator needs a uniform grid".into()))?;
    let m = grid.len();
    if m < 3 {
        return Err(Error::InvalidGrid("Wong operator needs at least 3 points".into()));
    }
    let w = grid.weights();
    let stencil = endpoint_derivative_stencil(h);
    let mut k = vec![T::zero(); m * m];
    for (s, &t) in grid.points().iter().enumerate() {
        let t = t.as_f64();
        k[s * m + m - 1] += T::of(wong_phi(t)) / w[m - 1];
        let c = T::of(wong_c(t));
        for (j, &st) in stencil.iter().enumerate() {
            let col = m - 3 + j;
            k[s * m + col] += c * st / w[col];
        }
    }
    OperatorMatrix::new(grid.clone(), k)
}

struct WongState {
    a: f64,
    b: f64,
}

impl WongState {
    fn xi(&self) -> f64 {
        SQRT3 * self.b
    }

    fn slope(&self) -> f64 {
        2.0 * self.a - SQRT3 * self.xi()
    }
}

/// Exact one-step transition over `dt` in the `t` clock.
struct Transition {
    inv_sqrt_r: f64,
    inv_r32: f64,
    a_to_b: f64,
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Transition {
    fn new(dt: f64) -> Self {
        let r = (2.0 * dt / SQRT3).exp();
        let d = r - 1.0;
        let v11 = d / r;
        let v22 = d.powi(3) / (3.0 * r.powi(3));
        let v12 = d * d / (2.0 * r * r);
        let l11 = v11.sqrt();
        let l21 = if l11 > 0.0 { v12 / l11 } else { 0.0 };
        let l22 = (v22 - l21 * l21).max(0.0).sqrt();
        Transition { inv_sqrt_r: r.powf(-0.5), inv_r32: r.powf(-1.5), a_to_b: d * r.powf(-1.5), l11, l21, l22 }
    }

    fn step(&self, s: &WongState, z1: f64, z2: f64) -> WongState {
        WongState {
            a: s.a * self.inv_sqrt_r + self.l11 * z1,
            b: s.b * self.inv_r32 + s.a * self.a_to_b + self.l21 * z1 + self.l22 * z2,
        }
    }
}

/// Segments `X_n(t) = xi_{n+t}` of the stationary Wong process, with exact
/// derivatives and the innovations `X_n - A(X_{n-1})`.
pub fn simulate_wong_segments<T: Scalar>(n: usize, grid: &GridRef<T>, seed: u64) -> Result<SegmentedProcess<T>> {
    if grid.blocks() != 1 {
        return Err(Error::InvalidGrid("Wong segments need a single-block grid".into()));
    }
    let truth = wong_operator(grid).ok();
    let mut rng = substream(seed, 0);
    let mut z = || std_normal::<f64, _>(&mut rng);
    // stationary law: Var a = 1, Var b = 1/3, Cov = 1/2
    let (z1, z2) = (z(), z());
    let mut state = WongState { a: z1, b: 0.5 * z1 + (1.0 / 12.0f64).sqrt() * z2 };
    let pts: Vec<f64> = grid.points().iter().map(|p| p.as_f64()).collect();
    let steps: Vec<Transition> = pts.windows(2).map(|w| Transition::new(w[1] - w[0])).collect();

    let mut sample = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    for _ in 0..n {
        let (f_end, df_end) = (state.xi(), state.slope());
        let mut vals = vec![T::of(state.xi())];
        let mut dvals = vec![T::of(state.slope())];
        for tr in &steps {
            let (z1, z2) = (z(), z());
            state = tr.step(&state, z1, z2);
            vals.push(T::of(state.xi()));
            dvals.push(T::of(state.slope()));
        }
        let x = Curve::from_raw(grid.clone(), vals);
        let pred = wong_apply_exact(grid, T::of(f_end), T::of(df_end));
        innovations.push(&x - &pred);
        sample.push(x);
        derivs.push(Curve::from_raw(grid.clone(), dvals));
    }
    Ok(SegmentedProcess { sample, innovations, truth, derivatives: Some(derivs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{derivative, Grid};

    #[test]
    fn c_vanishes_at_zero() {
        assert_eq!(wong_c(0.0), 0.0);
        assert!((wong_phi(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn operator_preserves_endpoint() {
        let g = Grid::<f64>::uniform(51).unwrap();
        let a = wong_operator(&g).unwrap();
        let f = Curve::from_fn(&g, |t| (2.0 * t).sin() + t);
        let af = a.apply(&f);
        assert!((af.values()[0] - f.values()[50]).abs() < 1e-10);
        // kernel form agrees with the exact form up to the difference quotient
        let exact = wong_apply_exact(&g, f.values()[50], 2.0 * 2f64.cos() + 1.0);
        assert!((&af - &exact).norm() < 1e-3);
    }

    #[test]
    fn segments_continuous_and_derivatives_consistent() {
        let g = Grid::<f64>::uniform(201).unwrap();
        let p = simulate_wong_segments(30, &g, 2).unwrap();
        let d = p.derivatives.as_ref().unwrap();
        for w in p.sample.windows(2) {
            assert_eq!(w[1].values()[0], w[0].values()[200]);
        }
        // exact slope agrees with the numerical derivative of the path
        for (x, dx) in p.sample.iter().zip(d) {
            let fd = derivative(x).unwrap();
            let interior: f64 = (5..195).map(|i| (fd.values()[i] - dx.values()[i]).powi(2)).sum::<f64>() / 190.0;
            let scale: f64 = dx.values().iter().map(|v| v * v).sum::<f64>() / 201.0;
            assert!(interior.sqrt() < 0.25 * scale.sqrt().max(1.0));
        }
    }

    #[test]
    fn stationary_unit_variance() {
        let g = Grid::<f64>::uniform(11).unwrap();
        let p = simulate_wong_segments(4000, &g, 3).unwrap();
        for i in [0, 5, 10] {
            let var = p.sample.iter().map(|x| x.values()[i].powi(2)).sum::<f64>() / p.len() as f64;
            assert!((var - 1.0).abs() < 0.1, "t index {i}: {var}");
        }
    }

    #[test]
    fn innovations_follow_representation() {
        let g = Grid::<f64>::uniform(21).unwrap();
        let p = simulate_wong_segments(10, &g, 1).unwrap();
        let d = p.derivatives.as_ref().unwrap();
        for k in 1..10 {
            let prev = &p.sample[k - 1];
            let pred = wong_apply_exact(&g, prev.values()[20], d[k - 1].values()[20]);
            let e = &(&p.sample[k] - &pred) - &p.innovations[k];
            assert!(e.norm() < 1e-12);
            assert!(p.innovations[k].values()[0].abs() < 1e-12);
        }
    }
}

//! Linear processes with values in a function space.
//!
//! Curves live on a quadrature [`Grid`] of `[0, 1]`; operators are stored as
//! kernels acting through the quadrature weights. On top of that the crate
//! provides simulation of Hilbert-valued linear and autoregressive processes,
//! empirical covariance operators, regularized inverses, the ARH(1)
//! estimator and predictor, and the experiment drivers behind the `arhlab`
//! command-line tool.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below are what the tool itself uses.

pub mod arh;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod moments;
pub mod reginv;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use hilbert::{
    apply_operator, derivative, eigendecompose, inner_product, op_norms, tensor_product, Curve, EigenSystem, Grid,
    GridRef, OpNorms, OperatorMatrix, SpaceKind,
};
pub use scalar::Scalar;

pub type Grid64 = Grid<f64>;
pub type Curve64 = Curve<f64>;
pub type Operator64 = OperatorMatrix<f64>;
pub type EigenSystem64 = EigenSystem<f64>;

pub type Grid32 = Grid<f32>;
pub type Curve32 = Curve<f32>;
pub type Operator32 = OperatorMatrix<f32>;
pub type EigenSystem32 = EigenSystem<f32>;

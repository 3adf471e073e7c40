//! Finite-grid realization of the Hilbert space `L2[0, 1]`.

pub mod curve;
pub mod eigen;
pub mod grid;
pub mod operator;
pub mod symeig;

pub use curve::{derivative, inner_product, Curve, SpaceKind};
pub use eigen::{eigendecompose, EigenSystem};
pub use grid::{same_grid, Grid, GridRef};
pub use operator::{apply_operator, op_norms, tensor_product, OpNorms, OperatorMatrix};

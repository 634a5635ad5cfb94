//! Grids, quadrature, finite differences and complex inner products.

mod grid;
mod stencil;
mod tridiag;
mod wave;

pub use grid::{DomainKind, Grid, Spacing};
pub use stencil::{fornberg_weights, STENCIL_WIDTH};
pub use tridiag::Tridiagonal;
pub use wave::WaveFunction;

pub(crate) use wave::derivative_values;

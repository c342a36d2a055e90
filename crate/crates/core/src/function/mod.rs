//! Function representations on `K`: piecewise-affine functions, cell-sampled
//! functions, weak gradients, the Cantor staircase and exact `μ`-integrals.

pub mod cantor;
pub mod cell;
pub mod density;
pub mod integral;
pub mod io;
pub mod pa;
pub mod sampler;

pub use cantor::CantorEdgeFunction;
pub use cell::CellFunction;
pub use density::EdgeDensity;
pub use integral::{mu_integral, mu_integral_shifted, mu_mean, quadrature, Quadrature};
pub use pa::PaFunction;
pub use sampler::{Constant, CrossSampler, DistanceToCenter, Pulled};

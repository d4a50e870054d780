//! Max-plus algebra and Lyapunov exponents of random matrix products
//! arising from fork-join queueing networks.

pub mod error;
pub mod expr;
pub mod lyapunov;
pub mod matrix;
pub mod network;
pub mod semiring;
pub mod stochastic;
pub mod structure;

pub use error::{Error, Result};
pub use expr::{ExprMatrix, Monomial, Polynomial, ServiceExpr, TauRef};
pub use matrix::{TropicalMatrix, TropicalVector};
pub use semiring::{SemifieldKind, TropicalScalar};
pub use structure::{classify, skeleton_decompose, MatrixClass, SkeletonDecomposition};
pub use stochastic::{RandomMatrixProcess, ServiceDistribution, TauSource};
pub use lyapunov::{LyapunovEstimate, Method};

//! Service-time laws, random matrix processes and their expectations.

pub mod distribution;
pub mod expectation;
pub mod process;
pub mod rng;

pub use crate::expr::{ExprMatrix, Polynomial, ServiceExpr, TauRef};
pub use distribution::ServiceDistribution;
pub use expectation::{
    expect_polynomial, expect_polynomials, expected_matrix, expected_matrix_detailed,
    kingman_check, Expectation, KingmanReport, DEFAULT_EXPECTATION_SAMPLES,
};
pub use process::{RandomMatrixProcess, TauSource};

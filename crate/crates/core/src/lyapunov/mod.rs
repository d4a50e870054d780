//! Lyapunov exponent of a random matrix process: Monte Carlo simulation,
//! closed forms for special matrix types, and the decomposition method.

pub mod closed_form;
pub mod decomposition;
pub mod monte_carlo;

use std::fmt;

use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

pub use closed_form::{classify_process, evaluate_closed_form, ProcessClass};
pub use decomposition::{
    check_independence, evaluate_by_decomposition, evaluate_with_factors, symbolic_decompositions,
    SymbolicDecomposition,
};
pub use monte_carlo::{estimate_monte_carlo, replication_path, MonteCarloConfig, ReplicationPath};

use crate::stochastic::Expectation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MonteCarlo,
    Diagonal,
    Triangular,
    Similarity,
    RankOne,
    BackwardSkeleton,
    DecompositionChain(usize),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::MonteCarlo => f.write_str("monte_carlo"),
            Method::Diagonal => f.write_str("diagonal"),
            Method::Triangular => f.write_str("triangular"),
            Method::Similarity => f.write_str("similarity"),
            Method::RankOne => f.write_str("rank_one"),
            Method::BackwardSkeleton => f.write_str("backward_skeleton"),
            Method::DecompositionChain(d) => write!(f, "decomposition_chain({d})"),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Estimate at an intermediate horizon of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub k: usize,
    pub lambda: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub method: Method,
    pub k_used: usize,
    pub replications: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LyapunovEstimate {
    /// Estimate from an expectation; the interval is normal-theory.
    pub(crate) fn from_expectation(e: Expectation, method: Method) -> Option<Self> {
        let lambda = e.value?;
        let half = 1.96 * e.stderr;
        Some(Self {
            lambda,
            stderr: e.stderr,
            ci95: (lambda - half, lambda + half),
            method,
            k_used: 0,
            replications: 0,
            checkpoints: Vec::new(),
            note: None,
        })
    }

    /// Customers per time unit, when `lambda > 0`.
    pub fn throughput(&self) -> Option<f64> {
        (self.lambda > 0.0).then(|| 1.0 / self.lambda)
    }

    pub fn is_analytic(&self) -> bool {
        self.method != Method::MonteCarlo && self.stderr == 0.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }

    /// Two-sided interval at `level`: Student-t over replications for Monte
    /// Carlo, normal for sampled expectations.
    pub fn interval(&self, level: f64) -> (f64, f64) {
        let q = 0.5 + level / 2.0;
        let z = if self.method == Method::MonteCarlo && self.replications >= 2 {
            StudentsT::new(0.0, 1.0, (self.replications - 1) as f64)
                .expect("positive degrees of freedom")
                .inverse_cdf(q)
        } else {
            Normal::standard().inverse_cdf(q)
        };
        (self.lambda - z * self.stderr, self.lambda + z * self.stderr)
    }
}

/// ⊕ of several expectations, carrying the standard error of the maximizer.
pub(crate) fn max_expectation(es: &[Expectation]) -> Option<Expectation> {
    es.iter()
        .filter(|e| e.value.is_some())
        .copied()
        .max_by(|a, b| a.value.unwrap().total_cmp(&b.value.unwrap()))
        .map(|best| Expectation {
            analytic: es.iter().all(|e| e.analytic),
            ..best
        })
}

use serde::{Deserialize, Serialize};

use super::distribution::ServiceDistribution;
use super::rng::{draw_rng, SHARED_STREAM_BASE};
use crate::error::{Error, Result};
use crate::expr::{ExprMatrix, Polynomial, TauRef};
use crate::matrix::TropicalMatrix;
use crate::semiring::SemifieldKind;

/// Where a node's service times come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauSource {
    /// One draw per generation from the node's own stream.
    #[default]
    Own,
    /// Generation `g` reads draw `(g - 1) * stride + offset` of a stream
    /// shared with other nodes.
    Shared { stream: u32, stride: u64, offset: u64 },
}

impl TauSource {
    fn address(&self, node: usize, generation: u64) -> (u64, u64) {
        match *self {
            TauSource::Own => (node as u64, generation),
            TauSource::Shared {
                stream,
                stride,
                offset,
            } => (
                SHARED_STREAM_BASE + stream as u64,
                (generation - 1) * stride + offset,
            ),
        }
    }
}

type CompiledEntry = Vec<(f64, Vec<usize>)>;

/// Leaf table plus a flat evaluation program for a polynomial matrix.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub(crate) leaves: Vec<TauRef>,
    entries: Vec<CompiledEntry>,
}

impl Program {
    pub(crate) fn new(polys: &[Polynomial]) -> Self {
        let leaves: Vec<TauRef> = polys
            .iter()
            .flat_map(|p| p.leaves())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |t: &TauRef| leaves.binary_search(t).expect("leaf collected");
        let entries = polys
            .iter()
            .map(|p| {
                p.terms()
                    .iter()
                    .map(|m| (m.coeff, m.leaves.iter().map(index).collect()))
                    .collect()
            })
            .collect();
        Self { leaves, entries }
    }

    #[inline]
    pub(crate) fn eval_entry(&self, e: usize, taus: &[f64]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (coeff, leaves) in &self.entries[e] {
            let v = leaves.iter().fold(*coeff, |acc, &l| acc + taus[l]);
            best = Some(best.map_or(v, |b| b.max(v)));
        }
        best
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Random matrices `A(k)` whose entries are polynomials in service times.
///
/// Leaf `(i, lag)` of `A(k)` reads node `i`'s draw for generation `k + lag`,
/// so processes with lagged leaves share draws between consecutive samples.
#[derive(Debug, Clone)]
pub struct RandomMatrixProcess {
    exprs: ExprMatrix,
    distributions: Vec<ServiceDistribution>,
    sources: Vec<TauSource>,
    seed: u64,
    program: Program,
}

impl RandomMatrixProcess {
    pub fn new(exprs: ExprMatrix, distributions: Vec<ServiceDistribution>, seed: u64) -> Result<Self> {
        let n = distributions.len();
        Self::with_sources(exprs, distributions, vec![TauSource::Own; n], seed)
    }

    pub fn with_sources(
        exprs: ExprMatrix,
        distributions: Vec<ServiceDistribution>,
        sources: Vec<TauSource>,
        seed: u64,
    ) -> Result<Self> {
        if exprs.rows() != exprs.cols() {
            return Err(Error::NotSquare {
                op: "RandomMatrixProcess",
                rows: exprs.rows(),
                cols: exprs.cols(),
            });
        }
        if sources.len() != distributions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} tau sources for {} distributions",
                sources.len(),
                distributions.len()
            )));
        }
        if let Some(t) = exprs.leaves().into_iter().find(|t| t.node >= distributions.len()) {
            return Err(Error::InvalidArgument(format!(
                "leaf {t} has no service distribution"
            )));
        }
        for (i, s) in sources.iter().enumerate() {
            if let TauSource::Shared { stride, offset, .. } = *s {
                if stride == 0 || offset == 0 || offset > stride {
                    return Err(Error::InvalidArgument(format!(
                        "node {}: shared stream needs 1 <= offset <= stride",
                        i + 1
                    )));
                }
            }
        }
        let program = Program::new(exprs.entries());
        Ok(Self {
            exprs,
            distributions,
            sources,
            seed,
            program,
        })
    }

    /// A constant process `A(k) = a`.
    pub fn fixed(a: &TropicalMatrix, seed: u64) -> Result<Self> {
        Self::new(ExprMatrix::from_constant(a), Vec::new(), seed)
    }

    /// Same randomness, different entries.
    pub fn with_exprs(&self, exprs: ExprMatrix) -> Result<Self> {
        Self::with_sources(exprs, self.distributions.clone(), self.sources.clone(), self.seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.exprs.rows()
    }

    pub fn exprs(&self) -> &ExprMatrix {
        &self.exprs
    }

    pub fn distributions(&self) -> &[ServiceDistribution] {
        &self.distributions
    }

    pub fn sources(&self) -> &[TauSource] {
        &self.sources
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn leaves(&self) -> &[TauRef] {
        &self.program.leaves
    }

    pub fn max_lag(&self) -> u32 {
        self.program.leaves.iter().map(|t| t.lag).max().unwrap_or(0)
    }

    pub fn distribution(&self, node: usize) -> &ServiceDistribution {
        &self.distributions[node]
    }

    /// Value of leaf `t` in sample `k` of `replication`.
    pub fn tau(&self, replication: u64, t: TauRef, k: u64) -> f64 {
        let generation = k + t.lag as u64;
        let (stream, index) = self.sources[t.node].address(t.node, generation);
        let mut rng = draw_rng(self.seed, replication, stream, index);
        self.distributions[t.node].sample(&mut rng)
    }

    pub(crate) fn fill_taus(&self, program: &Program, replication: u64, k: u64, taus: &mut Vec<f64>) {
        taus.clear();
        taus.extend(program.leaves.iter().map(|&t| self.tau(replication, t, k)));
    }

    /// Writes the raw max-plus entries of `A(k)` into `out` (row-major).
    pub fn sample_into(&self, replication: u64, k: u64, taus: &mut Vec<f64>, out: &mut [Option<f64>]) {
        self.fill_taus(&self.program, replication, k, taus);
        for (e, slot) in out.iter_mut().enumerate().take(self.program.len()) {
            *slot = self.program.eval_entry(e, taus);
        }
    }

    pub fn sample_replication(&self, replication: u64, k: u64) -> TropicalMatrix {
        assert!(k >= 1, "cycle index starts at 1");
        let n = self.dim();
        let mut taus = Vec::new();
        let mut data = vec![None; n * n];
        self.sample_into(replication, k, &mut taus, &mut data);
        TropicalMatrix::from_raw(SemifieldKind::MaxPlus, n, n, data).expect("finite samples")
    }

    /// `A(k)` of replication 0.
    pub fn sample_matrix(&self, k: u64) -> TropicalMatrix {
        self.sample_replication(0, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_tandem_2() -> ExprMatrix {
        ExprMatrix::parse_rows(&[&["t1", "-inf"], &["t1*t2", "t2"]]).unwrap()
    }

    #[test]
    fn deterministic_sample_evaluates_constants() {
        let d = vec![
            ServiceDistribution::deterministic(1.0).unwrap(),
            ServiceDistribution::deterministic(2.0).unwrap(),
        ];
        let p = RandomMatrixProcess::new(open_tandem_2(), d, 0).unwrap();
        assert_eq!(
            p.sample_matrix(1),
            TropicalMatrix::max_plus(&[vec![1.0, f64::NEG_INFINITY], vec![3.0, 2.0]])
        );
    }

    #[test]
    fn same_seed_same_sample() {
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 2];
        let p = RandomMatrixProcess::new(open_tandem_2(), d, 42).unwrap();
        assert_eq!(p.sample_matrix(5), p.sample_matrix(5));
        assert_ne!(p.sample_matrix(5), p.sample_matrix(6));
        assert_ne!(p.sample_matrix(5), p.with_seed(43).sample_matrix(5));
    }

    #[test]
    fn lagged_leaves_share_the_next_generation() {
        let e = ExprMatrix::parse_rows(&[&["t1", "t2'"], &["t2", "-inf"]]).unwrap();
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 2];
        let p = RandomMatrixProcess::new(e, d, 9).unwrap();
        for k in 1..20 {
            assert_eq!(p.sample_matrix(k).raw(0, 1), p.sample_matrix(k + 1).raw(1, 0));
        }
    }

    #[test]
    fn shared_stream_reindexing() {
        // two nodes interleave one stream: node 0 takes odd draws, node 1 even
        let e = ExprMatrix::service_diag(2);
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 2];
        let src = vec![
            TauSource::Shared { stream: 0, stride: 2, offset: 1 },
            TauSource::Shared { stream: 0, stride: 2, offset: 2 },
        ];
        let p = RandomMatrixProcess::with_sources(e, d, src, 3).unwrap();
        let arrival = |idx: u64| {
            let mut rng = draw_rng(3, 0, SHARED_STREAM_BASE, idx);
            ServiceDistribution::exponential(1.0).unwrap().sample(&mut rng)
        };
        for k in 1..10u64 {
            let a = p.sample_matrix(k);
            assert_eq!(a.raw(0, 0), Some(arrival(2 * k - 1)));
            assert_eq!(a.raw(1, 1), Some(arrival(2 * k)));
        }
    }

    #[test]
    fn rejects_missing_distribution() {
        let e = ExprMatrix::service_diag(3);
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 2];
        assert!(RandomMatrixProcess::new(e, d, 0).is_err());
    }
}

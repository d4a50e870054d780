use super::spec::{Blocking, NetworkSpec};
use crate::error::{Error, Result};
use crate::expr::ExprMatrix;
use crate::matrix::TropicalMatrix;
use crate::semiring::SemifieldKind;
use crate::stochastic::RandomMatrixProcess;

/// Length (in arcs) of the longest path of a digraph on `n` nodes, or `None`
/// if it has a cycle.
pub(crate) fn longest_path_in(n: usize, arcs: &[(usize, usize)]) -> Option<usize> {
    let mut indegree = vec![0usize; n];
    for &(_, j) in arcs {
        indegree[j] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut depth = vec![0usize; n];
    let mut visited = 0;
    while let Some(v) = ready.pop() {
        visited += 1;
        for &(i, j) in arcs {
            if i == v {
                depth[j] = depth[j].max(depth[v] + 1);
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    (visited == n).then(|| depth.into_iter().max().unwrap_or(0))
}

/// Longest path `r` of the zero-delay graph.
pub fn longest_path(spec: &NetworkSpec) -> Result<usize> {
    longest_path_in(spec.n(), &spec.g0_arcs())
        .ok_or_else(|| Error::ModelInvalid("the zero-delay graph has a cycle".into()))
}

/// 0/𝟙 adjacency matrices: `g[m]` for `m = 0..=M` and `h[m]` for `m = 1..=M`
/// (`h[0]` is unused and all 𝟘).
#[derive(Debug, Clone, PartialEq)]
pub struct PartialGraphs {
    pub g: Vec<TropicalMatrix>,
    pub h: Vec<TropicalMatrix>,
    pub m1: usize,
    pub m2: usize,
}

impl PartialGraphs {
    pub fn max_delay(&self) -> usize {
        self.m1.max(self.m2).max(1)
    }
}

/// `g_ij^m = 𝟙` iff `i ∈ P(j)` and `c_j = m`; `h_ij^m = 𝟙` iff `j ∈ S(i)` and
/// `b_j + 1 = m`. Buffer limits only count when a blocking rule is set.
pub fn build_partial_graphs(spec: &NetworkSpec) -> Result<PartialGraphs> {
    spec.validate()?;
    let n = spec.n();
    let m1 = spec.nodes.iter().filter_map(|v| v.c).max().unwrap_or(0) as usize;
    let m2 = match spec.blocking {
        Blocking::None => 0,
        _ => spec
            .nodes
            .iter()
            .filter_map(|v| v.b)
            .map(|b| b as usize + 1)
            .max()
            .unwrap_or(0),
    };
    let top = m1.max(m2).max(1);
    let zero = || TropicalMatrix::zeros(SemifieldKind::MaxPlus, n, n);
    let mut g = vec![zero(); top + 1];
    let mut h = vec![zero(); top + 1];
    let one = crate::semiring::TropicalScalar::one(SemifieldKind::MaxPlus);
    for (i, j) in spec.arcs0() {
        if let Some(c) = spec.nodes[j].c {
            g[c as usize].set(i, j, one)?;
        }
        if spec.blocking != Blocking::None {
            if let Some(b) = spec.nodes[j].b {
                h[b as usize + 1].set(i, j, one)?;
            }
        }
    }
    Ok(PartialGraphs { g, h, m1, m2 })
}

/// Symbolic model of a network: `x(k) = ⊕_m A_m(k) x(k-m)`.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    spec: NetworkSpec,
    graphs: PartialGraphs,
    r: usize,
    /// `a[m - 1]` is `A_m`.
    a: Vec<ExprMatrix>,
}

/// Builds `A_1, …, A_M` from the network's partial graphs.
pub fn compile(spec: &NetworkSpec) -> Result<CompiledModel> {
    let graphs = build_partial_graphs(spec)?;
    let r = longest_path(spec)?;
    let n = spec.n();
    let m = graphs.max_delay();
    let t = ExprMatrix::service_diag(n);
    let id = ExprMatrix::identity(n);
    let sym = |x: &TropicalMatrix| ExprMatrix::from_constant(x);
    let l = id.add(&t.mul(&sym(&graphs.g[0]).transpose())?)?;
    let lr = l.power(r)?;
    let mut a = Vec::with_capacity(m);
    for k in 1..=m {
        let gt = sym(&graphs.g[k]).transpose();
        let h = sym(&graphs.h[k]);
        let base = if k == 1 { id.add(&gt)? } else { gt };
        let inner = match spec.blocking {
            Blocking::None => t.mul(&base)?,
            Blocking::Manufacturing => t.mul(&base)?.add(&h)?,
            Blocking::Communication => t.mul(&base.add(&h)?)?,
        };
        a.push(lr.mul(&inner)?);
    }
    Ok(CompiledModel {
        spec: spec.clone(),
        graphs,
        r,
        a,
    })
}

impl CompiledModel {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// Largest delay `M`.
    pub fn max_delay(&self) -> usize {
        self.a.len()
    }

    pub fn longest_path(&self) -> usize {
        self.r
    }

    pub fn graphs(&self) -> &PartialGraphs {
        &self.graphs
    }

    /// `A_m`, `1 <= m <= M`.
    pub fn a(&self, m: usize) -> &ExprMatrix {
        &self.a[m - 1]
    }

    /// Companion form with `blocks >= M` blocks:
    /// `[A_1 … A_blocks; I 𝟘 …; …; … I 𝟘]`, with `A_m = 𝟘` beyond `M`.
    pub fn lifted_exprs(&self, blocks: usize) -> Result<ExprMatrix> {
        if blocks < self.max_delay() {
            return Err(Error::InvalidArgument(format!(
                "{blocks} blocks cannot hold delay {}",
                self.max_delay()
            )));
        }
        let n = self.n();
        if blocks == 1 {
            return Ok(self.a[0].clone());
        }
        let grid: Vec<Vec<ExprMatrix>> = (0..blocks)
            .map(|bi| {
                (0..blocks)
                    .map(|bj| match bi {
                        0 if bj < self.a.len() => self.a[bj].clone(),
                        0 => ExprMatrix::zeros(n, n),
                        _ if bj + 1 == bi => ExprMatrix::identity(n),
                        _ => ExprMatrix::zeros(n, n),
                    })
                    .collect()
            })
            .collect();
        ExprMatrix::from_blocks(&grid)
    }

    /// First-order process of dimension `n·M`.
    pub fn process(&self, seed: u64) -> Result<RandomMatrixProcess> {
        self.lifted_process(self.max_delay(), seed)
    }

    pub fn lifted_process(&self, blocks: usize, seed: u64) -> Result<RandomMatrixProcess> {
        RandomMatrixProcess::with_sources(
            self.lifted_exprs(blocks)?,
            self.spec.distributions(),
            self.spec.tau_sources(),
            seed,
        )
    }

    /// Process for the single delay matrix `A_m`.
    pub fn component_process(&self, m: usize, seed: u64) -> Result<RandomMatrixProcess> {
        RandomMatrixProcess::with_sources(
            self.a(m).clone(),
            self.spec.distributions(),
            self.spec.tau_sources(),
            seed,
        )
    }
}

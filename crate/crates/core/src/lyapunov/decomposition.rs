//! The decomposition method.
//!
//! If `A(k) = B(k) C(k)` with independent factors, then
//! `A(1)…A(k) = B(1) A'(1)…A'(k-1) C(k)` with `A'(k) = C(k) B(k+1)`, and both
//! products share the same exponent. Factors are searched symbolically: the
//! leaves of `A` are split into a `B` side and a `C` side (which makes the
//! factors independent by construction), each row is grouped by its `B`-part,
//! and a smallest generating set for the resulting `C`-side row vectors is
//! chosen. Constants always go to the `C` side.

use std::collections::BTreeMap;

use super::closed_form::{diagonal_maximum, evaluate_closed_form, pattern_of};
use super::{LyapunovEstimate, Method};
use crate::error::{Error, Result};
use crate::expr::{ExprMatrix, Monomial, Polynomial, TauRef};
use crate::stochastic::RandomMatrixProcess;
use crate::structure::PatternShape;

/// Largest leaf count for which every split is tried.
const MAX_LEAVES: usize = 10;
/// Cap on generating-set candidates examined per split.
const MAX_SUBSETS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicDecomposition {
    pub b: ExprMatrix,
    pub c: ExprMatrix,
}

impl SymbolicDecomposition {
    pub fn inner_dim(&self) -> usize {
        self.c.rows()
    }

    pub fn reconstruct(&self) -> ExprMatrix {
        self.b.mul(&self.c).expect("conforming factors")
    }

    /// `A'(k) = C(k) B(k+1)`.
    pub fn backward_product(&self) -> ExprMatrix {
        self.c.mul(&self.b.shift_lag(1)).expect("conforming factors")
    }

    /// `C B` is triangular up to a simultaneous permutation.
    pub fn is_backward_triangular(&self) -> bool {
        pattern_of(&self.backward_product()) != PatternShape::Cyclic
    }

    fn c_size(&self) -> usize {
        self.c.entries().iter().map(|p| p.terms().len()).sum()
    }
}

/// Rejects factors that share a `(node, lag)` leaf.
pub fn check_independence(b: &ExprMatrix, c: &ExprMatrix) -> Result<()> {
    let cl = c.leaves();
    let shared: Vec<String> = b
        .leaves()
        .into_iter()
        .filter(|t| cl.contains(t))
        .map(|t| t.to_string())
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(Error::DependencyViolation(shared.join(", ")))
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

fn entrywise_le(x: &[Polynomial], y: &[Polynomial]) -> bool {
    x.iter().zip(y).all(|(a, b)| a.le(b))
}

/// Best factorization for one split of the leaves, if any has inner dimension below `n`.
fn decompose_with_split(a: &ExprMatrix, in_b: &dyn Fn(&TauRef) -> bool) -> Option<SymbolicDecomposition> {
    let n = a.rows();
    let mut rs: Vec<Vec<Polynomial>> = Vec::new();
    let mut owners: Vec<(usize, Vec<TauRef>, usize)> = Vec::new();
    for i in 0..n {
        let mut groups: BTreeMap<Vec<TauRef>, Vec<Vec<Monomial>>> = BTreeMap::new();
        for j in 0..n {
            for m in a.get(i, j).terms() {
                let (beta, gamma): (Vec<TauRef>, Vec<TauRef>) = m.leaves.iter().partition(|t| in_b(t));
                groups.entry(beta).or_insert_with(|| vec![Vec::new(); n])[j].push(Monomial {
                    coeff: m.coeff,
                    leaves: gamma,
                });
            }
        }
        for (beta, cols) in groups {
            let r: Vec<Polynomial> = cols.into_iter().map(Polynomial::from_terms).collect();
            let idx = rs.iter().position(|x| *x == r).unwrap_or_else(|| {
                rs.push(r);
                rs.len() - 1
            });
            owners.push((i, beta, idx));
        }
    }

    let mut cands: Vec<Vec<Polynomial>> = rs.clone();
    for r in &rs {
        for entry in r {
            for m in entry.terms() {
                let g = Polynomial::from_terms(vec![m.clone()]);
                let atom: Vec<Polynomial> = r
                    .iter()
                    .map(|x| if g.le(x) { g.clone() } else { Polynomial::zero() })
                    .collect();
                if !cands.contains(&atom) {
                    cands.push(atom);
                }
            }
        }
    }

    // every monomial of every R must be dominated by a chosen candidate below R
    let mut positions = Vec::new();
    for (ri, r) in rs.iter().enumerate() {
        for (j, entry) in r.iter().enumerate() {
            for m in entry.terms() {
                positions.push((ri, j, Polynomial::from_terms(vec![m.clone()])));
            }
        }
    }
    let covers: Vec<Bits> = cands
        .iter()
        .map(|v| {
            let mut bits = Bits::new(positions.len());
            for (pos, (ri, j, m)) in positions.iter().enumerate() {
                if m.le(&v[*j]) && entrywise_le(v, &rs[*ri]) {
                    bits.set(pos);
                }
            }
            bits
        })
        .collect();
    let useful: Vec<usize> = (0..cands.len()).filter(|&c| !covers[c].is_empty()).collect();
    let size = |c: usize| cands[c].iter().map(|p| p.terms().len()).sum::<usize>();

    let words = positions.len().div_ceil(64);
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits = positions.len() - w * 64;
            if bits >= 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            }
        })
        .collect();

    let mut chosen: Option<Vec<usize>> = None;
    let mut examined = 0usize;
    'sizes: for s in 1..n.min(useful.len() + 1) {
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            examined += 1;
            if examined > MAX_SUBSETS {
                break 'sizes;
            }
            let mut acc = vec![0u64; words];
            for &k in &idx {
                for (w, x) in covers[useful[k]].0.iter().enumerate() {
                    acc[w] |= x;
                }
            }
            if acc == full {
                let cost: usize = idx.iter().map(|&k| size(useful[k])).sum();
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, idx.iter().map(|&k| useful[k]).collect()));
                }
            }
            // next combination
            let mut p = s;
            while p > 0 && idx[p - 1] == useful.len() - s + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..s {
                idx[q] = idx[q - 1] + 1;
            }
        }
        if let Some((_, set)) = best {
            chosen = Some(set);
            break;
        }
    }
    let set = chosen?;

    let r = set.len();
    let mut c = ExprMatrix::zeros(r, n);
    for (s, &k) in set.iter().enumerate() {
        for j in 0..n {
            c.set(s, j, cands[k][j].clone());
        }
    }
    let mut b = ExprMatrix::zeros(n, r);
    for (i, beta, ri) in &owners {
        let term = Polynomial::from_terms(vec![Monomial {
            coeff: 0.0,
            leaves: beta.clone(),
        }]);
        for (s, &k) in set.iter().enumerate() {
            if entrywise_le(&cands[k], &rs[*ri]) {
                let cur = b.get(*i, s).oplus(&term);
                b.set(*i, s, cur);
            }
        }
    }
    // drop coefficients whose contribution is absorbed
    let row_of = |b: &ExprMatrix, i: usize, j: usize| {
        (0..r).fold(Polynomial::zero(), |acc, s| acc.oplus(&b.get(i, s).otimes(c.get(s, j))))
    };
    for i in 0..n {
        for s in 0..r {
            for m in b.get(i, s).terms().to_vec() {
                let kept: Vec<Monomial> = b.get(i, s).terms().iter().filter(|x| **x != m).cloned().collect();
                let mut trial = b.clone();
                trial.set(i, s, Polynomial::from_terms(kept));
                if (0..n).all(|j| row_of(&trial, i, j) == *a.get(i, j)) {
                    b = trial;
                }
            }
        }
    }
    let d = SymbolicDecomposition { b, c };
    (d.reconstruct() == *a).then_some(d)
}

/// All factorizations found over the leaf splits, smallest inner dimension first.
pub fn symbolic_decompositions(a: &ExprMatrix) -> Vec<SymbolicDecomposition> {
    let n = a.rows();
    let leaves: Vec<TauRef> = a.leaves().into_iter().collect();
    if n < 2 || n != a.cols() || leaves.len() > MAX_LEAVES {
        return Vec::new();
    }
    let mut found: Vec<SymbolicDecomposition> = Vec::new();
    for mask in 0u32..(1 << leaves.len()) {
        let in_b = |t: &TauRef| mask >> leaves.binary_search(t).expect("known leaf") & 1 == 1;
        if let Some(d) = decompose_with_split(a, &in_b) {
            if !found.contains(&d) {
                found.push(d);
            }
        }
    }
    found.sort_by_key(|d| (d.inner_dim(), d.c_size()));
    found
}

fn triangular_estimate(
    p: &RandomMatrixProcess,
    d: &SymbolicDecomposition,
    depth: usize,
    samples: usize,
) -> Result<Option<LyapunovEstimate>> {
    if !d.is_backward_triangular() {
        return Ok(None);
    }
    let q = p.with_exprs(d.backward_product())?;
    let method = if depth == 1 {
        Method::BackwardSkeleton
    } else {
        Method::DecompositionChain(depth)
    };
    Ok(diagonal_maximum(&q, samples)
        .and_then(|e| LyapunovEstimate::from_expectation(e, method))
        .map(|mut est| {
            est.note = Some(format!("C(k)B(k+1) triangular, inner dimension {}", d.inner_dim()));
            est
        }))
}

fn closed_form_estimate(
    p: &RandomMatrixProcess,
    d: &SymbolicDecomposition,
    depth: usize,
    samples: usize,
) -> Result<Option<LyapunovEstimate>> {
    let q = p.with_exprs(d.backward_product())?;
    Ok(evaluate_closed_form(&q, samples)?.map(|mut est| {
        est.note = Some(format!(
            "{} closed form for C(k)B(k+1), inner dimension {}",
            est.method,
            d.inner_dim()
        ));
        est.method = Method::DecompositionChain(depth);
        est
    }))
}

/// λ from user-supplied factors `A(k) = B(k) C(k)`.
pub fn evaluate_with_factors(
    p: &RandomMatrixProcess,
    b: &ExprMatrix,
    c: &ExprMatrix,
    samples: usize,
) -> Result<Option<LyapunovEstimate>> {
    check_independence(b, c)?;
    let d = SymbolicDecomposition {
        b: b.clone(),
        c: c.clone(),
    };
    if b.rows() != p.dim() || c.cols() != p.dim() || b.cols() != c.rows() || d.reconstruct() != *p.exprs() {
        return Err(Error::InvalidArgument("factors do not reproduce the process matrix".into()));
    }
    if let Some(e) = triangular_estimate(p, &d, 1, samples)? {
        return Ok(Some(e));
    }
    closed_form_estimate(p, &d, 1, samples)
}

/// Decomposition chain: a backward triangular factorization ends the search;
/// otherwise the closed forms are tried on `A'`, and finally `A'` itself is
/// decomposed, up to `max_depth` levels.
pub fn evaluate_by_decomposition(
    p: &RandomMatrixProcess,
    max_depth: usize,
    samples: usize,
) -> Result<Option<LyapunovEstimate>> {
    if max_depth < 1 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    chain(p, 1, max_depth, samples)
}

fn chain(p: &RandomMatrixProcess, depth: usize, max_depth: usize, samples: usize) -> Result<Option<LyapunovEstimate>> {
    let decs = symbolic_decompositions(p.exprs());
    for d in &decs {
        check_independence(&d.b, &d.c)?;
        if let Some(e) = triangular_estimate(p, d, depth, samples)? {
            return Ok(Some(e));
        }
    }
    for d in &decs {
        if let Some(e) = closed_form_estimate(p, d, depth, samples)? {
            return Ok(Some(e));
        }
    }
    match decs.first() {
        Some(d) if depth < max_depth => chain(&p.with_exprs(d.backward_product())?, depth + 1, max_depth, samples),
        _ => Ok(None),
    }
}

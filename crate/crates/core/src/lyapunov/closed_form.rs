use super::{max_expectation, LyapunovEstimate, Method};
use crate::error::Result;
use crate::expr::{ExprMatrix, Monomial, Polynomial, TauRef};
use crate::stochastic::rng::EXPECTATION_REPLICATION;
use crate::stochastic::{expect_polynomial, expect_polynomials, Expectation, RandomMatrixProcess};
use crate::structure::{pattern_shape, rank_one_factorize, similarity_coefficient, PatternShape};

/// Number of sampled matrices used to confirm value-level structure.
const PROBE_SAMPLES: u64 = 64;

/// Structure of a random matrix process, decided on the symbolic 𝟘-pattern
/// and confirmed on samples where the pattern alone is not enough.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessClass {
    Diagonal,
    Triangular,
    /// Common column ⊕; `None` when only confirmed numerically.
    Similarity(Option<Polynomial>),
    /// `A(k) = u(k) vᵀ(k)`; `None` when only confirmed numerically.
    RankOne(Option<(Vec<Polynomial>, Vec<Polynomial>)>),
    General,
}

impl ProcessClass {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessClass::Diagonal => "diagonal",
            ProcessClass::Triangular => "triangular",
            ProcessClass::Similarity(_) => "similarity",
            ProcessClass::RankOne(_) => "rank_one",
            ProcessClass::General => "general",
        }
    }
}

pub fn pattern_of(a: &ExprMatrix) -> PatternShape {
    pattern_shape(a.rows(), |i, j| a.is_finite(i, j))
}

fn symbolic_similarity(a: &ExprMatrix) -> Option<Polynomial> {
    let cols: Vec<Polynomial> = (0..a.cols())
        .map(|j| (0..a.rows()).fold(Polynomial::zero(), |acc, i| acc.oplus(a.get(i, j))))
        .collect();
    let first = cols.first()?;
    (!first.is_zero() && cols.iter().all(|c| c == first)).then(|| first.clone())
}

/// Common leaf multiset of all monomials in `polys`.
fn common_leaves(polys: &[&Polynomial]) -> Vec<TauRef> {
    let mut iter = polys.iter().flat_map(|p| p.terms().iter());
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let mut common = first.leaves.clone();
    for m in iter {
        let mut rest = m.leaves.clone();
        common.retain(|t| match rest.iter().position(|x| x == t) {
            Some(pos) => {
                rest.remove(pos);
                true
            }
            None => false,
        });
    }
    common
}

fn divide(p: &Polynomial, g: &[TauRef], shift: f64) -> Polynomial {
    Polynomial::from_terms(
        p.terms()
            .iter()
            .map(|m| {
                let mut leaves = m.leaves.clone();
                for t in g {
                    let pos = leaves.iter().position(|x| x == t).expect("common leaf");
                    leaves.remove(pos);
                }
                Monomial {
                    coeff: m.coeff - shift,
                    leaves,
                }
            })
            .collect(),
    )
}

fn symbolic_rank_one(a: &ExprMatrix) -> Option<(Vec<Polynomial>, Vec<Polynomial>)> {
    let n = a.rows();
    let rows: Vec<usize> = (0..n).filter(|&i| (0..a.cols()).any(|j| a.is_finite(i, j))).collect();
    let first = *rows.first()?;
    let support: Vec<bool> = (0..a.cols()).map(|j| a.is_finite(first, j)).collect();
    let pivot = support.iter().position(|&s| s)?;
    let mut u = vec![Polynomial::zero(); n];
    let mut v: Option<Vec<Polynomial>> = None;
    for &i in &rows {
        if (0..a.cols()).any(|j| a.is_finite(i, j) != support[j]) {
            return None;
        }
        let entries: Vec<&Polynomial> = (0..a.cols()).map(|j| a.get(i, j)).collect();
        let g = common_leaves(&entries);
        let shift = a.get(i, pivot).terms().iter().map(|m| m.coeff).fold(f64::MIN, f64::max);
        let q: Vec<Polynomial> = entries.iter().map(|p| divide(p, &g, shift)).collect();
        match &v {
            None => v = Some(q),
            Some(v0) if *v0 == q => {}
            Some(_) => return None,
        }
        u[i] = Polynomial::from_terms(vec![Monomial {
            coeff: shift,
            leaves: g,
        }]);
    }
    Some((u, v?))
}

/// Classifies `p` in priority order Diagonal > Triangular > Similarity > RankOne > General.
pub fn classify_process(p: &RandomMatrixProcess) -> ProcessClass {
    let a = p.exprs();
    match pattern_of(a) {
        PatternShape::Diagonal => return ProcessClass::Diagonal,
        PatternShape::Lower | PatternShape::Upper | PatternShape::Permuted(_) => {
            return ProcessClass::Triangular
        }
        PatternShape::Cyclic => {}
    }
    if let Some(norm) = symbolic_similarity(a) {
        return ProcessClass::Similarity(Some(norm));
    }
    let probes: Vec<_> = (1..=PROBE_SAMPLES)
        .map(|k| p.sample_replication(EXPECTATION_REPLICATION, k))
        .collect();
    if probes.iter().all(|m| similarity_coefficient(m).is_some()) {
        return ProcessClass::Similarity(None);
    }
    if let Some(uv) = symbolic_rank_one(a) {
        return ProcessClass::RankOne(Some(uv));
    }
    if probes.iter().all(|m| rank_one_factorize(m).is_some()) {
        return ProcessClass::RankOne(None);
    }
    ProcessClass::General
}

/// `max_i E[a_ii]` for a triangular process.
pub(crate) fn diagonal_maximum(p: &RandomMatrixProcess, samples: usize) -> Option<Expectation> {
    let a = p.exprs();
    let diag: Vec<Polynomial> = (0..a.rows()).map(|i| a.get(i, i).clone()).collect();
    max_expectation(&expect_polynomials(p, &diag, samples))
}

/// `E[vᵀ(1) u(2)]` from numeric factorizations of sampled pairs.
fn numeric_rank_one(p: &RandomMatrixProcess, samples: usize) -> Option<Expectation> {
    let step = p.max_lag() as u64 + 2;
    let mut xs = Vec::with_capacity(samples);
    for s in 0..samples.max(2) as u64 {
        let k = 1 + s * step;
        let (_, v) = rank_one_factorize(&p.sample_replication(EXPECTATION_REPLICATION, k))?;
        let (u, _) = rank_one_factorize(&p.sample_replication(EXPECTATION_REPLICATION, k + 1))?;
        xs.push(v.dot(&u).ok()?.value()?);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(Expectation {
        value: Some(mean),
        stderr: (var / n).sqrt(),
        analytic: false,
    })
}

/// Closed-form λ for non-general processes; `None` for General.
pub fn evaluate_closed_form(p: &RandomMatrixProcess, samples: usize) -> Result<Option<LyapunovEstimate>> {
    let class = classify_process(p);
    let (e, method) = match &class {
        ProcessClass::General => return Ok(None),
        ProcessClass::Diagonal => (diagonal_maximum(p, samples), Method::Diagonal),
        ProcessClass::Triangular => (diagonal_maximum(p, samples), Method::Triangular),
        ProcessClass::Similarity(norm) => {
            let norm = norm.clone().unwrap_or_else(|| p.exprs().norm());
            (Some(expect_polynomial(p, &norm, samples)), Method::Similarity)
        }
        ProcessClass::RankOne(Some((u, v))) => {
            let next_u: Vec<Polynomial> = u.iter().map(|x| x.shift_lag(1)).collect();
            let dot = v
                .iter()
                .zip(&next_u)
                .fold(Polynomial::zero(), |acc, (vj, uj)| acc.oplus(&vj.otimes(uj)));
            (Some(expect_polynomial(p, &dot, samples)), Method::RankOne)
        }
        ProcessClass::RankOne(None) => (numeric_rank_one(p, samples), Method::RankOne),
    };
    Ok(e.and_then(|e| LyapunovEstimate::from_expectation(e, method)))
}

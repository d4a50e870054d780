use serde::Serialize;

use super::distribution::ServiceDistribution;
use super::process::{Program, RandomMatrixProcess};
use super::rng::EXPECTATION_REPLICATION;
use crate::expr::{Monomial, Polynomial, TauRef};
use crate::matrix::TropicalMatrix;
use crate::semiring::{SemifieldKind, TropicalScalar};

pub const DEFAULT_EXPECTATION_SAMPLES: usize = 100_000;

/// Mean of a max-plus quantity. `value == None` is 𝟘.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub value: Option<f64>,
    pub stderr: f64,
    pub analytic: bool,
}

impl Expectation {
    fn exact(value: Option<f64>) -> Self {
        Self {
            value,
            stderr: 0.0,
            analytic: true,
        }
    }
}

fn leaf_mean(p: &RandomMatrixProcess, t: TauRef) -> f64 {
    p.distribution(t.node).mean()
}

fn monomial_mean(p: &RandomMatrixProcess, m: &Monomial) -> f64 {
    m.leaves.iter().fold(m.coeff, |acc, &t| acc + leaf_mean(p, t))
}

/// Leaf multiset common to every monomial.
fn content(poly: &Polynomial) -> Vec<TauRef> {
    let mut common = poly.terms()[0].leaves.clone();
    for m in &poly.terms()[1..] {
        let mut next = Vec::new();
        let mut j = 0;
        for t in &common {
            while j < m.leaves.len() && m.leaves[j] < *t {
                j += 1;
            }
            if j < m.leaves.len() && m.leaves[j] == *t {
                next.push(*t);
                j += 1;
            }
        }
        common = next;
    }
    common
}

fn divide(m: &Monomial, g: &[TauRef]) -> Monomial {
    let mut leaves = m.leaves.clone();
    for t in g {
        let pos = leaves.iter().position(|x| x == t).expect("content divides");
        leaves.remove(pos);
    }
    Monomial {
        coeff: m.coeff,
        leaves,
    }
}

/// Closed-form mean when one is available.
fn analytic(p: &RandomMatrixProcess, poly: &Polynomial) -> Option<Expectation> {
    let terms = poly.terms();
    if terms.is_empty() {
        return Some(Expectation::exact(None));
    }
    if poly
        .leaves()
        .iter()
        .all(|t| p.distribution(t.node).is_deterministic())
    {
        return Some(Expectation::exact(poly.eval(&|t| leaf_mean(p, t))));
    }
    if let [m] = terms {
        return Some(Expectation::exact(Some(monomial_mean(p, m))));
    }
    let g = content(poly);
    if !g.is_empty() {
        let q = Polynomial::from_terms(terms.iter().map(|m| divide(m, &g)).collect());
        let rest = q.leaves();
        if g.iter().all(|t| !rest.contains(t)) {
            let inner = analytic(p, &q)?;
            let shift: f64 = g.iter().map(|&t| leaf_mean(p, t)).sum();
            return Some(Expectation::exact(inner.value.map(|v| v + shift)));
        }
    }
    // E max(a + X, b + Y) for independent exponentials X, Y
    if let [m1, m2] = terms {
        if let ([t1], [t2]) = (m1.leaves.as_slice(), m2.leaves.as_slice()) {
            if let (
                ServiceDistribution::Exponential { rate: r1 },
                ServiceDistribution::Exponential { rate: r2 },
            ) = (p.distribution(t1.node), p.distribution(t2.node))
            {
                if t1 != t2 {
                    // order so that b >= a
                    let ((a, ra), (b, rb)) = if m1.coeff <= m2.coeff {
                        ((m1.coeff, *r1), (m2.coeff, *r2))
                    } else {
                        ((m2.coeff, *r2), (m1.coeff, *r1))
                    };
                    let v = b + 1.0 / rb + (-ra * (b - a)).exp() * rb / (ra * (ra + rb));
                    return Some(Expectation::exact(Some(v)));
                }
            }
        }
    }
    None
}

/// Means of several polynomials; the ones without a closed form share one
/// Monte Carlo pass of `samples` independent draws.
pub fn expect_polynomials(
    p: &RandomMatrixProcess,
    polys: &[Polynomial],
    samples: usize,
) -> Vec<Expectation> {
    let mut out: Vec<Option<Expectation>> = polys.iter().map(|q| analytic(p, q)).collect();
    let pending: Vec<usize> = (0..polys.len()).filter(|&i| out[i].is_none()).collect();
    if !pending.is_empty() {
        let mc: Vec<Polynomial> = pending.iter().map(|&i| polys[i].clone()).collect();
        let program = Program::new(&mc);
        let step = program.leaves.iter().map(|t| t.lag).max().unwrap_or(0) as u64 + 1;
        let samples = samples.max(2);
        let mut sum = vec![0.0; mc.len()];
        let mut sumsq = vec![0.0; mc.len()];
        let mut taus = Vec::new();
        for s in 0..samples as u64 {
            p.fill_taus(&program, EXPECTATION_REPLICATION, 1 + s * step, &mut taus);
            for e in 0..mc.len() {
                let v = program.eval_entry(e, &taus).expect("nonzero polynomial");
                sum[e] += v;
                sumsq[e] += v * v;
            }
        }
        let nf = samples as f64;
        for (e, &i) in pending.iter().enumerate() {
            let mean = sum[e] / nf;
            let var = ((sumsq[e] - nf * mean * mean) / (nf - 1.0)).max(0.0);
            out[i] = Some(Expectation {
                value: Some(mean),
                stderr: (var / nf).sqrt(),
                analytic: false,
            });
        }
    }
    out.into_iter().map(|e| e.expect("filled")).collect()
}

pub fn expect_polynomial(p: &RandomMatrixProcess, poly: &Polynomial, samples: usize) -> Expectation {
    expect_polynomials(p, std::slice::from_ref(poly), samples)[0]
}

/// Entrywise means `E A` with their standard errors.
pub fn expected_matrix_detailed(
    p: &RandomMatrixProcess,
    samples: usize,
) -> (TropicalMatrix, Vec<Expectation>) {
    let n = p.dim();
    let ex = expect_polynomials(p, p.exprs().entries(), samples);
    let data = ex.iter().map(|e| e.value).collect();
    let m = TropicalMatrix::from_raw(SemifieldKind::MaxPlus, n, n, data).expect("finite means");
    (m, ex)
}

pub fn expected_matrix(p: &RandomMatrixProcess, samples: usize) -> TropicalMatrix {
    expected_matrix_detailed(p, samples).0
}

/// Hypotheses of the subadditive ergodic theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KingmanReport {
    pub ok: bool,
    pub e_norm_finite: bool,
    pub e_norm: Option<f64>,
    pub rho_of_mean: Option<f64>,
}

impl KingmanReport {
    pub fn rho_of_mean_scalar(&self) -> TropicalScalar {
        match self.rho_of_mean {
            Some(v) => TropicalScalar::max_plus(v),
            None => TropicalScalar::zero(SemifieldKind::MaxPlus),
        }
    }
}

pub fn kingman_check(p: &RandomMatrixProcess, samples: usize) -> KingmanReport {
    let e_norm = expect_polynomial(p, &p.exprs().norm(), samples).value;
    let e_norm_finite = e_norm.is_some_and(f64::is_finite);
    let rho_of_mean = expected_matrix(p, samples)
        .spectral_radius()
        .expect("square")
        .value();
    KingmanReport {
        ok: e_norm_finite && rho_of_mean.is_some(),
        e_norm_finite,
        e_norm,
        rho_of_mean,
    }
}

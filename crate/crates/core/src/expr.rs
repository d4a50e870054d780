//! Symbolic max-plus expressions over service times.
//!
//! A leaf `t{i}` stands for the service time of node `i` in the current
//! cycle; each trailing prime shifts it one cycle ahead (`t3'` is τ₃,ₖ₊₁).
//! In the text syntax `+` is ⊕ (max) and `*` is ⊗ (addition of times).
//!
//! [`Polynomial`] is the canonical normal form: a ⊕ of monomials
//! `c ⊗ τ_a ⊗ τ_b ⊗ …` with no monomial dominated by another. Since service
//! times are nonnegative, `m₁ ≤ m₂` whenever `m₁`'s constant is at most
//! `m₂`'s and its leaf multiset is contained in `m₂`'s; dominated monomials
//! are dropped (for example `τ₂ ⊕ τ₂τ₃ = τ₂τ₃`).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TropicalMatrix;
use crate::semiring::{SemifieldKind, TropicalScalar};

/// Service time of `node` (0-based) in cycle `k + lag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TauRef {
    pub node: usize,
    pub lag: u32,
}

impl TauRef {
    pub fn new(node: usize, lag: u32) -> Self {
        Self { node, lag }
    }

    pub fn shifted(self, by: u32) -> Self {
        Self {
            node: self.node,
            lag: self.lag + by,
        }
    }
}

impl fmt::Display for TauRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.node + 1)?;
        for _ in 0..self.lag {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// Expression tree. Constants are max-plus scalars.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceExpr {
    Const(TropicalScalar),
    Tau(TauRef),
    Oplus(Vec<ServiceExpr>),
    Otimes(Vec<ServiceExpr>),
}

impl ServiceExpr {
    pub fn tau(node: usize, lag: u32) -> Self {
        ServiceExpr::Tau(TauRef::new(node, lag))
    }

    pub fn constant(v: f64) -> Self {
        ServiceExpr::Const(TropicalScalar::max_plus(v))
    }

    pub fn zero() -> Self {
        ServiceExpr::Const(TropicalScalar::zero(SemifieldKind::MaxPlus))
    }

    pub fn one() -> Self {
        Self::constant(0.0)
    }

    /// Evaluates under an assignment of the leaves (`None` is 𝟘).
    pub fn eval(&self, values: &dyn Fn(TauRef) -> f64) -> Option<f64> {
        match self {
            ServiceExpr::Const(c) => c.value(),
            ServiceExpr::Tau(t) => Some(values(*t)),
            ServiceExpr::Oplus(xs) => xs
                .iter()
                .filter_map(|x| x.eval(values))
                .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v)))),
            ServiceExpr::Otimes(xs) => xs
                .iter()
                .try_fold(0.0, |acc, x| x.eval(values).map(|v| acc + v)),
        }
    }

    pub fn normal_form(&self) -> Polynomial {
        match self {
            ServiceExpr::Const(c) => {
                let c = c
                    .convert(SemifieldKind::MaxPlus)
                    .expect("constants are finite or zero");
                match c.value() {
                    None => Polynomial::zero(),
                    Some(v) => Polynomial::constant(v),
                }
            }
            ServiceExpr::Tau(t) => Polynomial::tau(*t),
            ServiceExpr::Oplus(xs) => xs
                .iter()
                .fold(Polynomial::zero(), |acc, x| acc.oplus(&x.normal_form())),
            ServiceExpr::Otimes(xs) => xs
                .iter()
                .fold(Polynomial::one(), |acc, x| acc.otimes(&x.normal_form())),
        }
    }

    pub fn leaves(&self) -> BTreeSet<TauRef> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut BTreeSet<TauRef>) {
        match self {
            ServiceExpr::Const(_) => {}
            ServiceExpr::Tau(t) => {
                out.insert(*t);
            }
            ServiceExpr::Oplus(xs) | ServiceExpr::Otimes(xs) => {
                xs.iter().for_each(|x| x.collect_leaves(out))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input in expression {text:?}")));
        }
        Ok(e)
    }
}

/// `coeff ⊗ ∏ leaves`; `leaves` is a sorted multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub leaves: Vec<TauRef>,
}

impl Monomial {
    fn cmp_canonical(&self, other: &Self) -> Ordering {
        self.leaves
            .len()
            .cmp(&other.leaves.len())
            .then_with(|| self.leaves.cmp(&other.leaves))
            .then_with(|| self.coeff.total_cmp(&other.coeff))
    }

    fn mul(&self, other: &Self) -> Self {
        let mut leaves = Vec::with_capacity(self.leaves.len() + other.leaves.len());
        leaves.extend_from_slice(&self.leaves);
        leaves.extend_from_slice(&other.leaves);
        leaves.sort();
        Self {
            coeff: self.coeff + other.coeff,
            leaves,
        }
    }

    /// `self ≤ other` for every nonnegative assignment.
    fn dominated_by(&self, other: &Self) -> bool {
        self.coeff <= other.coeff && multiset_subset(&self.leaves, &other.leaves)
    }

    pub fn eval(&self, values: &dyn Fn(TauRef) -> f64) -> f64 {
        self.leaves.iter().fold(self.coeff, |acc, t| acc + values(*t))
    }
}

fn multiset_subset(small: &[TauRef], big: &[TauRef]) -> bool {
    let mut j = 0;
    for x in small {
        while j < big.len() && big[j] < *x {
            j += 1;
        }
        if j == big.len() || big[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

/// Canonical ⊕-of-monomials form. The empty polynomial is 𝟘.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(v: f64) -> Self {
        assert!(v.is_finite());
        Self {
            terms: vec![Monomial {
                coeff: v,
                leaves: Vec::new(),
            }],
        }
    }

    pub fn tau(t: TauRef) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: 0.0,
                leaves: vec![t],
            }],
        }
    }

    pub fn from_terms(terms: Vec<Monomial>) -> Self {
        let mut p = Self { terms };
        p.normalize();
        p
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// A single monomial (no ⊕ left after simplification).
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    fn normalize(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by(|a, b| a.cmp_canonical(b));
        let mut kept: Vec<Monomial> = Vec::with_capacity(terms.len());
        // visit larger monomials first so dominated ones are seen later
        for m in terms.into_iter().rev() {
            if !kept.iter().any(|k| m.dominated_by(k)) {
                kept.push(m);
            }
        }
        kept.sort_by(|a, b| a.cmp_canonical(b));
        self.terms = kept;
    }

    pub fn oplus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(terms)
    }

    pub fn otimes(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        Self::from_terms(terms)
    }

    pub fn eval(&self, values: &dyn Fn(TauRef) -> f64) -> Option<f64> {
        self.terms
            .iter()
            .map(|m| m.eval(values))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn leaves(&self) -> BTreeSet<TauRef> {
        self.terms
            .iter()
            .flat_map(|m| m.leaves.iter().copied())
            .collect()
    }

    pub fn shift_lag(&self, by: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|m| Monomial {
                    coeff: m.coeff,
                    leaves: m.leaves.iter().map(|t| t.shifted(by)).collect(),
                })
                .collect(),
        }
    }

    /// `self ⊕ other == other`.
    pub fn le(&self, other: &Self) -> bool {
        self.terms
            .iter()
            .all(|m| other.terms.iter().any(|k| m.dominated_by(k)))
    }

    pub fn to_expr(&self) -> ServiceExpr {
        let monomial = |m: &Monomial| {
            let mut factors = Vec::new();
            if m.coeff != 0.0 || m.leaves.is_empty() {
                factors.push(ServiceExpr::constant(m.coeff));
            }
            factors.extend(m.leaves.iter().map(|t| ServiceExpr::Tau(*t)));
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                ServiceExpr::Otimes(factors)
            }
        };
        match self.terms.as_slice() {
            [] => ServiceExpr::zero(),
            [m] => monomial(m),
            ms => ServiceExpr::Oplus(ms.iter().map(monomial).collect()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        ServiceExpr::parse(text).map(|e| e.normal_form())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.coeff != 0.0 || self.leaves.is_empty() {
            parts.push(format!("{}", self.coeff));
        }
        parts.extend(self.leaves.iter().map(|t| t.to_string()));
        f.write_str(&parts.join("*"))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("-inf");
        }
        let parts: Vec<String> = self.terms.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    NegInf,
    Tau(TauRef),
    Plus,
    Star,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |msg: String| Error::Parse(format!("{msg} in expression {text:?}"));
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' | '⊕' => {
                out.push(Token::Plus);
                i += 1;
            }
            '*' | '⊗' => {
                out.push(Token::Star);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            't' | 'τ' => {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(err("leaf without node index".into()));
                }
                let label: usize = chars[start..i].iter().collect::<String>().parse().unwrap();
                if label == 0 {
                    return Err(err("node labels start at 1".into()));
                }
                let mut lag = 0;
                while i < chars.len() && chars[i] == '\'' {
                    lag += 1;
                    i += 1;
                }
                out.push(Token::Tau(TauRef::new(label - 1, lag)));
            }
            'e' if chars[i..].starts_with(&['e', 'p', 's']) => {
                out.push(Token::NegInf);
                i += 3;
            }
            '-' if chars[i..].starts_with(&['-', 'i', 'n', 'f']) => {
                out.push(Token::NegInf);
                i += 4;
            }
            '-' | '.' | '0'..='9' => {
                let start = i;
                i += 1;
                while i < chars.len()
                    && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | 'e' | 'E'))
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| err(format!("bad number {s:?}")))?;
                out.push(Token::Num(v));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<ServiceExpr> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ServiceExpr::Oplus(terms)
        })
    }

    fn term(&mut self) -> Result<ServiceExpr> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ServiceExpr::Otimes(factors)
        })
    }

    fn factor(&mut self) -> Result<ServiceExpr> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(ServiceExpr::constant(v)),
            Token::NegInf => Ok(ServiceExpr::zero()),
            Token::Tau(t) => Ok(ServiceExpr::Tau(t)),
            Token::LParen => {
                let e = self.expr()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Matrix of canonical polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Polynomial::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Polynomial::one());
        }
        m
    }

    /// `diag(τ₁ₖ, …, τₙₖ)`.
    pub fn service_diag(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Polynomial::tau(TauRef::new(i, 0)));
        }
        m
    }

    /// 𝟙 wherever `pattern(i, j)` holds, 𝟘 elsewhere.
    pub fn from_pattern(rows: usize, cols: usize, pattern: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if pattern(i, j) {
                    m.set(i, j, Polynomial::one());
                }
            }
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "from_entries",
                left: (rows, cols),
                right: (entries.len(), 1),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_constant(m: &TropicalMatrix) -> Self {
        let mp = m.convert(SemifieldKind::MaxPlus).expect("isomorphism");
        let entries = mp
            .raw_data()
            .iter()
            .map(|v| v.map_or_else(Polynomial::zero, Polynomial::constant))
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    /// Parses rows of expression strings.
    pub fn parse_rows(rows: &[&[&str]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Parse("ragged expression matrix".into()));
            }
            for s in row.iter() {
                entries.push(Polynomial::parse(s)?);
            }
        }
        Self::from_entries(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.oplus(b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut terms = Vec::new();
                for l in 0..self.cols {
                    let a = self.get(i, l);
                    let b = other.get(l, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    terms.extend(a.otimes(b).terms);
                }
                out.set(i, j, Polynomial::from_terms(terms));
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn power(&self, k: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::NotSquare {
                op: "power",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut p = Self::identity(self.rows);
        for _ in 0..k {
            p = p.mul(self)?;
        }
        Ok(p)
    }

    pub fn shift_lag(&self, by: u32) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|p| p.shift_lag(by)).collect(),
        }
    }

    pub fn leaves(&self) -> BTreeSet<TauRef> {
        self.entries.iter().flat_map(|p| p.leaves()).collect()
    }

    pub fn is_finite(&self, i: usize, j: usize) -> bool {
        !self.get(i, j).is_zero()
    }

    /// ⊕ of all entries.
    pub fn norm(&self) -> Polynomial {
        self.entries
            .iter()
            .fold(Polynomial::zero(), |acc, p| acc.oplus(p))
    }

    /// Numeric matrix under an assignment of the leaves.
    pub fn evaluate(&self, values: &dyn Fn(TauRef) -> f64) -> TropicalMatrix {
        let data = self.entries.iter().map(|p| p.eval(values)).collect();
        TropicalMatrix::from_raw(SemifieldKind::MaxPlus, self.rows, self.cols, data)
            .expect("finite service times")
    }

    /// Block matrix from a grid of equally sized blocks.
    pub fn from_blocks(blocks: &[Vec<ExprMatrix>]) -> Result<Self> {
        let br = blocks.len();
        let bc = blocks.first().map_or(0, |r| r.len());
        let (h, w) = blocks
            .first()
            .and_then(|r| r.first())
            .map_or((0, 0), |b| b.shape());
        let mut out = Self::zeros(br * h, bc * w);
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != bc {
                return Err(Error::InvalidArgument("ragged block grid".into()));
            }
            for (bj, blk) in row.iter().enumerate() {
                if blk.shape() != (h, w) {
                    return Err(Error::ShapeMismatch {
                        op: "from_blocks",
                        left: (h, w),
                        right: blk.shape(),
                    });
                }
                for i in 0..h {
                    for j in 0..w {
                        out.set(bi * h + i, bj * w + j, blk.get(i, j).clone());
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ExprMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

//! Dense matrices over an idempotent semifield.

use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::{SemifieldKind, TropicalScalar};

/// Dense row-major matrix. `None` entries are 𝟘.
#[derive(Debug, Clone, PartialEq)]
pub struct TropicalMatrix {
    kind: SemifieldKind,
    rows: usize,
    cols: usize,
    data: Vec<Option<f64>>,
}

/// Column vector; products treat it as an `n x 1` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TropicalVector {
    kind: SemifieldKind,
    data: Vec<Option<f64>>,
}

impl TropicalVector {
    pub fn from_raw(kind: SemifieldKind, data: Vec<Option<f64>>) -> Self {
        Self { kind, data }
    }

    /// Max-plus vector from finite values.
    pub fn max_plus(values: &[f64]) -> Self {
        Self::from_raw(SemifieldKind::MaxPlus, values.iter().map(|&v| Some(v)).collect())
    }

    pub fn filled(kind: SemifieldKind, dim: usize, value: Option<f64>) -> Self {
        Self::from_raw(kind, vec![value; dim])
    }

    pub fn kind(&self) -> SemifieldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize) -> TropicalScalar {
        TropicalScalar::from_raw(self.kind, self.data[i])
    }

    pub fn raw(&self) -> &[Option<f64>] {
        &self.data
    }

    pub fn norm(&self) -> TropicalScalar {
        let v = self
            .data
            .iter()
            .fold(None, |acc, &x| self.kind.add_raw(acc, x));
        TropicalScalar::from_raw(self.kind, v)
    }

    pub fn as_column(&self) -> TropicalMatrix {
        TropicalMatrix::from_raw(self.kind, self.dim(), 1, self.data.clone())
            .expect("vector length matches")
    }

    pub fn as_row(&self) -> TropicalMatrix {
        TropicalMatrix::from_raw(self.kind, 1, self.dim(), self.data.clone())
            .expect("vector length matches")
    }

    /// Inner product `selfᵀ other`.
    pub fn dot(&self, other: &TropicalVector) -> Result<TropicalScalar> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: other.kind,
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                op: "dot",
                left: (self.dim(), 1),
                right: (other.dim(), 1),
            });
        }
        let v = self
            .data
            .iter()
            .zip(&other.data)
            .fold(None, |acc, (&a, &b)| {
                self.kind.add_raw(acc, self.kind.mul_raw(a, b))
            });
        Ok(TropicalScalar::from_raw(self.kind, v))
    }
}

impl TropicalMatrix {
    pub fn from_raw(
        kind: SemifieldKind,
        rows: usize,
        cols: usize,
        data: Vec<Option<f64>>,
    ) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::ShapeMismatch {
                op: "from_raw",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(bad) = data.iter().flatten().find(|v| !kind.admits(**v)) {
            return Err(Error::Domain { kind, value: *bad });
        }
        Ok(Self {
            kind,
            rows,
            cols,
            data,
        })
    }

    /// Builds from scalars; all must share one kind.
    pub fn from_scalars(rows: usize, cols: usize, entries: &[TropicalScalar]) -> Result<Self> {
        let kind = entries
            .first()
            .map(|s| s.kind())
            .unwrap_or(SemifieldKind::MaxPlus);
        if let Some(other) = entries.iter().find(|s| s.kind() != kind) {
            return Err(Error::KindMismatch {
                left: kind,
                right: other.kind(),
            });
        }
        Self::from_raw(kind, rows, cols, entries.iter().map(|s| s.value()).collect())
    }

    /// Max-plus matrix from rows; `f64::NEG_INFINITY` marks 𝟘.
    pub fn max_plus(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows
            .iter()
            .flatten()
            .map(|&v| if v == f64::NEG_INFINITY { None } else { Some(v) })
            .collect();
        Self::from_raw(SemifieldKind::MaxPlus, r, c, data).expect("finite max-plus entries")
    }

    pub fn zeros(kind: SemifieldKind, rows: usize, cols: usize) -> Self {
        Self {
            kind,
            rows,
            cols,
            data: vec![None; rows * cols],
        }
    }

    pub fn identity(kind: SemifieldKind, n: usize) -> Self {
        let mut m = Self::zeros(kind, n, n);
        for i in 0..n {
            m.data[i * n + i] = Some(kind.one_value());
        }
        m
    }

    pub fn diag(kind: SemifieldKind, d: &[Option<f64>]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(kind, n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn kind(&self) -> SemifieldKind {
        self.kind
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> Option<f64> {
        self.data[i * self.cols + j]
    }

    pub fn raw_data(&self) -> &[Option<f64>] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> TropicalScalar {
        TropicalScalar::from_raw(self.kind, self.raw(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, v: TropicalScalar) -> Result<()> {
        if v.kind() != self.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: v.kind(),
            });
        }
        self.data[i * self.cols + j] = v.value();
        Ok(())
    }

    pub(crate) fn set_raw(&mut self, i: usize, j: usize, v: Option<f64>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> TropicalVector {
        TropicalVector::from_raw(self.kind, self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> TropicalVector {
        TropicalVector::from_raw(self.kind, (0..self.rows).map(|i| self.raw(i, j)).collect())
    }

    /// Every row has at least one non-𝟘 entry.
    pub fn is_regular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).any(|j| self.raw(i, j).is_some()))
    }

    fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    fn require_kind(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: other.kind,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_kind(other)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.kind.add_raw(a, b))
            .collect();
        Ok(Self {
            kind: self.kind,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.require_kind(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let kind = self.kind;
        let mut out = Self::zeros(kind, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.raw(i, l);
                if a.is_none() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = kind.add_raw(out.data[idx], kind.mul_raw(a, other.raw(l, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &TropicalVector) -> Result<TropicalVector> {
        let m = self.mul(&x.as_column())?;
        Ok(TropicalVector::from_raw(m.kind, m.data))
    }

    pub fn scale(&self, x: &TropicalScalar) -> Result<Self> {
        if x.kind() != self.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: x.kind(),
            });
        }
        let data = self
            .data
            .iter()
            .map(|&a| self.kind.mul_raw(x.value(), a))
            .collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.kind, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.raw(i, j);
            }
        }
        out
    }

    /// ⊕ of all entries.
    pub fn norm(&self) -> TropicalScalar {
        let v = self.data.iter().fold(None, |acc, &x| self.kind.add_raw(acc, x));
        TropicalScalar::from_raw(self.kind, v)
    }

    /// ⊕ of the diagonal.
    pub fn trace(&self) -> Result<TropicalScalar> {
        self.require_square("trace")?;
        let v = (0..self.rows).fold(None, |acc, i| self.kind.add_raw(acc, self.raw(i, i)));
        Ok(TropicalScalar::from_raw(self.kind, v))
    }

    /// `A^k` by iterated multiplication.
    pub fn power(&self, k: usize) -> Result<Self> {
        self.require_square("power")?;
        let mut p = Self::identity(self.kind, self.rows);
        for _ in 0..k {
            p = p.mul(self)?;
        }
        Ok(p)
    }

    /// The trajectory `A^1, A^2, …` (unbounded; take what you need).
    pub fn powers(&self) -> Result<Powers<'_>> {
        self.require_square("powers")?;
        Ok(Powers {
            base: self,
            current: None,
        })
    }

    /// `ρ(A) = ⊕_{m=1..n} tr(A^m)^{1/m}`: the maximum cycle mean in max-plus.
    ///
    /// Returns 𝟘 for matrices whose digraph has no cycle.
    pub fn spectral_radius(&self) -> Result<TropicalScalar> {
        self.require_square("spectral_radius")?;
        let mut rho = TropicalScalar::zero(self.kind);
        for (m, p) in self.powers()?.take(self.rows).enumerate() {
            let tr = p.trace()?;
            if tr.is_zero() {
                continue;
            }
            rho = rho.oplus(&tr.root(m as u32 + 1)?)?;
        }
        Ok(rho)
    }

    /// Finite span `max − min` over the finite entries, in canonical (max-plus) units.
    pub fn span(&self) -> f64 {
        let (lo, hi) = self.data.iter().flatten().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        );
        if lo > hi {
            0.0
        } else {
            hi - lo
        }
    }

    /// Parses the whitespace/newline literal format (`-inf` for 𝟘 in max-plus).
    pub fn parse_literal(kind: SemifieldKind, text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| TropicalScalar::parse(kind, tok).map(|s| s.value()))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} entries, found {}",
                        lineno + 1,
                        first.len(),
                        row.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix literal".into()));
        }
        let (r, c) = (rows.len(), rows[0].len());
        Self::from_raw(kind, r, c, rows.into_iter().flatten().collect())
    }

    /// Image under the semifield isomorphism onto `target`.
    pub fn convert(&self, target: SemifieldKind) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|&v| TropicalScalar::from_raw(self.kind, v).convert(target).map(|s| s.value()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: target,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise comparison with relative tolerance; 𝟘 patterns must agree exactly.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        self.kind == other.kind
            && self.shape() == other.shape()
            && self.data.iter().zip(&other.data).all(|(a, b)| match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => approx_eq(*x, *y, rel_tol),
                _ => false,
            })
    }
}

pub(crate) fn approx_eq(x: f64, y: f64, rel_tol: f64) -> bool {
    (x - y).abs() <= rel_tol * x.abs().max(y.abs()).max(1.0)
}

pub struct Powers<'a> {
    base: &'a TropicalMatrix,
    current: Option<TropicalMatrix>,
}

impl Iterator for Powers<'_> {
    type Item = TropicalMatrix;

    fn next(&mut self) -> Option<Self::Item> {
        let next = match &self.current {
            None => self.base.clone(),
            Some(p) => p.mul(self.base).expect("square"),
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

impl fmt::Display for TropicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    const NEG: f64 = f64::NEG_INFINITY;

    fn mp(v: f64) -> TropicalScalar {
        TropicalScalar::max_plus(v)
    }

    #[test]
    fn add_examples() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, NEG], vec![2.0, 0.0]]);
        let b = TropicalMatrix::max_plus(&[vec![0.0, 3.0], vec![NEG, NEG]]);
        let expect = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![2.0, 0.0]]);
        assert_eq!(a.add(&b).unwrap(), expect);
        let z = TropicalMatrix::zeros(SemifieldKind::MaxPlus, 2, 2);
        assert_eq!(a.add(&z).unwrap(), a);
        assert_eq!(a.add(&a).unwrap(), a);
    }

    #[test]
    fn mul_examples() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        let i = TropicalMatrix::identity(SemifieldKind::MaxPlus, 2);
        assert_eq!(i.mul(&a).unwrap(), a);
        // hand expansion: [max(1+1,3+0), max(1+3,3+2)], [max(0+1,2+0), max(0+3,2+2)]
        let expect = TropicalMatrix::max_plus(&[vec![3.0, 5.0], vec![2.0, 4.0]]);
        assert_eq!(a.mul(&a).unwrap(), expect);
    }

    #[test]
    fn shape_errors() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0]]);
        assert!(matches!(a.mul(&a), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(a.trace(), Err(Error::NotSquare { .. })));
        assert!(matches!(a.power(2), Err(Error::NotSquare { .. })));
        let b = TropicalMatrix::max_plus(&[vec![1.0], vec![2.0]]);
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn norm_and_trace() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, NEG], vec![2.0, 0.0]]);
        assert_eq!(a.norm(), mp(2.0));
        assert!(TropicalMatrix::zeros(SemifieldKind::MaxPlus, 2, 3).norm().is_zero());
        let b = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        assert_eq!(b.trace().unwrap(), mp(2.0));
        assert_eq!(
            TropicalMatrix::identity(SemifieldKind::MaxPlus, 3).trace().unwrap(),
            mp(0.0)
        );
        let d = TropicalMatrix::diag(SemifieldKind::MaxPlus, &[Some(1.0), Some(7.0), Some(-2.0)]);
        assert_eq!(d.trace().unwrap(), mp(7.0));
        // ‖xA‖ = x‖A‖
        assert_eq!(b.scale(&mp(2.5)).unwrap().norm(), mp(5.5));
    }

    #[test]
    fn spectral_radius_examples() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        assert_eq!(a.spectral_radius().unwrap(), mp(2.0));
        let d = TropicalMatrix::diag(SemifieldKind::MaxPlus, &[Some(1.0), Some(4.0), Some(2.0)]);
        assert_eq!(d.spectral_radius().unwrap(), mp(4.0));
        let strict = TropicalMatrix::max_plus(&[
            vec![NEG, NEG, NEG],
            vec![1.0, NEG, NEG],
            vec![5.0, 2.0, NEG],
        ]);
        assert!(strict.spectral_radius().unwrap().is_zero());
        assert!(TropicalMatrix::zeros(SemifieldKind::MaxPlus, 3, 3)
            .spectral_radius()
            .unwrap()
            .is_zero());
    }

    #[test]
    fn powers_and_limit() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        let id = TropicalMatrix::identity(SemifieldKind::MaxPlus, 2);
        assert_eq!(a.power(0).unwrap(), id);
        assert_eq!(a.power(1).unwrap(), a);
        let a500 = a.power(500).unwrap();
        let est = a500.norm().value().unwrap() / 500.0;
        assert!((est - 2.0).abs() <= 2.0 * a.span() / 500.0);
    }

    #[test]
    fn other_kinds_follow_isomorphism() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        let conv: Vec<TropicalScalar> = a
            .raw_data()
            .iter()
            .map(|&v| {
                TropicalScalar::from_raw(SemifieldKind::MaxPlus, v)
                    .convert(SemifieldKind::MinPlus)
                    .unwrap()
            })
            .collect();
        let b = TropicalMatrix::from_scalars(2, 2, &conv).unwrap();
        let rho = b.spectral_radius().unwrap();
        assert_eq!(rho.convert(SemifieldKind::MaxPlus).unwrap(), mp(2.0));
    }

    #[test]
    fn literal_roundtrip() {
        let text = "1 -inf\n2 0\n";
        let a = TropicalMatrix::parse_literal(SemifieldKind::MaxPlus, text).unwrap();
        assert_eq!(a, TropicalMatrix::max_plus(&[vec![1.0, NEG], vec![2.0, 0.0]]));
        assert_eq!(a.to_string(), text);
        assert!(TropicalMatrix::parse_literal(SemifieldKind::MaxPlus, "1 2\n3").is_err());
        assert!(TropicalMatrix::parse_literal(SemifieldKind::MaxPlus, "").is_err());
    }

    #[test]
    fn regularity() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, NEG], vec![NEG, NEG]]);
        assert!(!a.is_regular());
        assert!(TropicalMatrix::identity(SemifieldKind::MaxPlus, 3).is_regular());
    }
}

//! Structural classification of square matrices and skeleton decompositions.

use crate::error::Result;
use crate::matrix::{approx_eq, TropicalMatrix, TropicalVector};
use crate::semiring::{SemifieldKind, TropicalScalar};

/// Relative tolerance for value equalities in similarity and rank-one tests.
pub const VALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixClass {
    Diagonal,
    TriangularLower,
    TriangularUpper,
    /// Lower triangular after reordering rows and columns by `order`
    /// (`order[new] = old`).
    TriangularUnderPermutation(Vec<usize>),
    Similarity(TropicalScalar),
    RankOne(TropicalVector, TropicalVector),
    General,
}

impl MatrixClass {
    pub fn is_triangular(&self) -> bool {
        matches!(
            self,
            MatrixClass::Diagonal
                | MatrixClass::TriangularLower
                | MatrixClass::TriangularUpper
                | MatrixClass::TriangularUnderPermutation(_)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            MatrixClass::Diagonal => "diagonal",
            MatrixClass::TriangularLower => "triangular-lower",
            MatrixClass::TriangularUpper => "triangular-upper",
            MatrixClass::TriangularUnderPermutation(_) => "triangular-permuted",
            MatrixClass::Similarity(_) => "similarity",
            MatrixClass::RankOne(..) => "rank-one",
            MatrixClass::General => "general",
        }
    }
}

/// Shape of the finite-entry pattern of a square matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternShape {
    Diagonal,
    Lower,
    Upper,
    Permuted(Vec<usize>),
    Cyclic,
}

/// Classifies an `n x n` pattern given by `finite(i, j)`.
///
/// `Permuted` holds a topological order of the digraph with an arc `j -> i`
/// for every finite off-diagonal entry `(i, j)`; such an order exists iff that
/// digraph is acyclic.
pub fn pattern_shape(n: usize, finite: impl Fn(usize, usize) -> bool) -> PatternShape {
    let off = |i: usize, j: usize| i != j && finite(i, j);
    let any_above = (0..n).any(|i| (i + 1..n).any(|j| off(i, j)));
    let any_below = (0..n).any(|i| (0..i).any(|j| off(i, j)));
    match (any_above, any_below) {
        (false, false) => return PatternShape::Diagonal,
        (false, true) => return PatternShape::Lower,
        (true, false) => return PatternShape::Upper,
        _ => {}
    }
    // Kahn's algorithm, smallest index first.
    let mut indegree: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| off(i, j)).count()).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let Some(next) = (0..n).find(|&v| !done[v] && indegree[v] == 0) else {
            return PatternShape::Cyclic;
        };
        done[next] = true;
        order.push(next);
        for (i, deg) in indegree.iter_mut().enumerate() {
            if off(i, next) {
                *deg -= 1;
            }
        }
    }
    PatternShape::Permuted(order)
}

/// Most specific class, by priority Diagonal > Triangular > Similarity > RankOne > General.
pub fn classify(a: &TropicalMatrix) -> Result<MatrixClass> {
    if !a.is_square() {
        return Err(crate::Error::NotSquare {
            op: "classify",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    match pattern_shape(n, |i, j| a.raw(i, j).is_some()) {
        PatternShape::Diagonal => return Ok(MatrixClass::Diagonal),
        PatternShape::Lower => return Ok(MatrixClass::TriangularLower),
        PatternShape::Upper => return Ok(MatrixClass::TriangularUpper),
        PatternShape::Permuted(order) => return Ok(MatrixClass::TriangularUnderPermutation(order)),
        PatternShape::Cyclic => {}
    }
    if let Some(alpha) = similarity_coefficient(a) {
        return Ok(MatrixClass::Similarity(alpha));
    }
    if let Some((u, v)) = rank_one_factorize(a) {
        return Ok(MatrixClass::RankOne(u, v));
    }
    Ok(MatrixClass::General)
}

/// The common column ⊕ of `a`, if all columns share one non-𝟘 value.
pub fn similarity_coefficient(a: &TropicalMatrix) -> Option<TropicalScalar> {
    let mut alpha: Option<f64> = None;
    for j in 0..a.cols() {
        let m = a.col(j).norm().value()?;
        match alpha {
            None => alpha = Some(m),
            Some(x) if approx_eq(x, m, VALUE_TOL) => {}
            Some(_) => return None,
        }
    }
    alpha.map(|v| TropicalScalar::from_raw(a.kind(), Some(v)))
}

/// Factors `a = u vᵀ`, with the first finite entry of `u` pinned to 𝟙.
pub fn rank_one_factorize(a: &TropicalMatrix) -> Option<(TropicalVector, TropicalVector)> {
    let kind = a.kind();
    let mp = a.convert(SemifieldKind::MaxPlus).ok()?;
    let (rows, cols) = mp.shape();
    let pivot = (0..rows).find(|&i| (0..cols).any(|j| mp.raw(i, j).is_some()))?;
    let v: Vec<Option<f64>> = (0..cols).map(|j| mp.raw(pivot, j)).collect();
    let jstar = v.iter().position(|x| x.is_some())?;
    let vj = v[jstar].unwrap();
    let mut u = vec![None; rows];
    for (i, ui) in u.iter_mut().enumerate() {
        *ui = mp.raw(i, jstar).map(|aij| aij - vj);
        for (j, vj) in v.iter().enumerate() {
            let ok = match (mp.raw(i, j), *ui, *vj) {
                (None, None, _) | (None, _, None) => true,
                (Some(x), Some(p), Some(q)) => approx_eq(x, p + q, VALUE_TOL),
                _ => false,
            };
            if !ok {
                return None;
            }
        }
    }
    let back = |xs: Vec<Option<f64>>| {
        TropicalVector::from_raw(SemifieldKind::MaxPlus, xs)
            .as_column()
            .convert(kind)
            .map(|m| TropicalVector::from_raw(kind, m.raw_data().to_vec()))
    };
    Some((back(u).ok()?, back(v).ok()?))
}

/// `A = B ⊗ C` with inner dimension below `A`'s order.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonDecomposition {
    pub b: TropicalMatrix,
    pub c: TropicalMatrix,
    /// Rows of `A` kept as the rows of `C`.
    pub basis_rows: Vec<usize>,
    pub backward_triangular: bool,
}

impl SkeletonDecomposition {
    pub fn inner_dim(&self) -> usize {
        self.c.rows()
    }

    pub fn reconstruct(&self) -> TropicalMatrix {
        self.b.mul(&self.c).expect("conforming factors")
    }
}

/// Row-basis search: rows are scanned from last to first and dropped when
/// they are tropical combinations of the rows still kept. The kept rows
/// form `C`; the combination coefficients (greatest solution by residuation,
/// then sparsified) form `B`. Returns `None` when every row is needed.
pub fn skeleton_decompose(a: &TropicalMatrix) -> Result<Option<SkeletonDecomposition>> {
    if !a.is_square() {
        return Err(crate::Error::NotSquare {
            op: "skeleton_decompose",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let kind = a.kind();
    let mp = a.convert(SemifieldKind::MaxPlus)?;
    let n = mp.rows();
    let rows: Vec<Vec<Option<f64>>> = (0..n).map(|i| mp.row(i).raw().to_vec()).collect();

    let mut kept: Vec<usize> = (0..n).collect();
    for i in (0..n).rev() {
        let others: Vec<usize> = kept.iter().copied().filter(|&s| s != i).collect();
        let basis: Vec<&[Option<f64>]> = others.iter().map(|&s| rows[s].as_slice()).collect();
        if combination(&rows[i], &basis).is_some() {
            kept = others;
        }
    }
    if kept.len() >= n {
        return Ok(None);
    }

    let r = kept.len();
    let basis: Vec<&[Option<f64>]> = kept.iter().map(|&s| rows[s].as_slice()).collect();
    let mut b = TropicalMatrix::zeros(SemifieldKind::MaxPlus, n, r);
    let mut c = TropicalMatrix::zeros(SemifieldKind::MaxPlus, r, n);
    for (s, &row) in kept.iter().enumerate() {
        for j in 0..n {
            c.set_raw(s, j, rows[row][j]);
        }
    }
    for i in 0..n {
        let coeffs = match kept.iter().position(|&s| s == i) {
            Some(pos) => (0..r).map(|s| if s == pos { Some(0.0) } else { None }).collect(),
            None => combination(&rows[i], &basis).expect("dropped rows are combinations"),
        };
        for (s, x) in coeffs.into_iter().enumerate() {
            b.set_raw(i, s, x);
        }
    }
    let backward_triangular = triangular_shape(&c.mul(&b)?);
    Ok(Some(SkeletonDecomposition {
        b: b.convert(kind)?,
        c: c.convert(kind)?,
        basis_rows: kept,
        backward_triangular,
    }))
}

/// `C ⊗ B` is triangular, possibly after a simultaneous permutation.
pub fn is_backward_triangular(d: &SkeletonDecomposition) -> bool {
    d.c.mul(&d.b).map(|m| triangular_shape(&m)).unwrap_or(false)
}

fn triangular_shape(m: &TropicalMatrix) -> bool {
    m.is_square() && pattern_shape(m.rows(), |i, j| m.raw(i, j).is_some()) != PatternShape::Cyclic
}

/// Coefficients `x` with `x ⊗ basis = target` (max-plus row vectors), if any.
fn combination(target: &[Option<f64>], basis: &[&[Option<f64>]]) -> Option<Vec<Option<f64>>> {
    // greatest solution: x_s = min_j (target_j - basis_sj) over finite basis_sj
    let mut x: Vec<Option<f64>> = basis
        .iter()
        .map(|row| {
            let mut best: Option<f64> = None;
            for (t, bj) in target.iter().zip(row.iter()) {
                let Some(bj) = bj else { continue };
                let Some(t) = t else { return None };
                let d = t - bj;
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
            best
        })
        .collect();
    if !reproduces(target, basis, &x) {
        return None;
    }
    for s in 0..x.len() {
        if x[s].is_none() {
            continue;
        }
        let saved = x[s].take();
        if !reproduces(target, basis, &x) {
            x[s] = saved;
        }
    }
    Some(x)
}

fn reproduces(target: &[Option<f64>], basis: &[&[Option<f64>]], x: &[Option<f64>]) -> bool {
    target.iter().enumerate().all(|(j, t)| {
        let got = basis.iter().zip(x).fold(None, |acc: Option<f64>, (row, xs)| {
            match (xs, row[j]) {
                (Some(p), Some(q)) => Some(acc.map_or(p + q, |a| a.max(p + q))),
                _ => acc,
            }
        });
        match (t, got) {
            (None, None) => true,
            (Some(a), Some(b)) => approx_eq(*a, b, VALUE_TOL),
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    const NEG: f64 = f64::NEG_INFINITY;

    #[test]
    fn classify_examples() {
        let d = TropicalMatrix::diag(SemifieldKind::MaxPlus, &[Some(1.0), Some(2.0), Some(3.0)]);
        assert_eq!(classify(&d).unwrap(), MatrixClass::Diagonal);

        // open tandem sample with tau = (1, 2, 3)
        let open = TropicalMatrix::max_plus(&[
            vec![1.0, NEG, NEG],
            vec![3.0, 2.0, NEG],
            vec![6.0, 5.0, 3.0],
        ]);
        assert_eq!(classify(&open).unwrap(), MatrixClass::TriangularLower);
        assert_eq!(
            classify(&open.transpose()).unwrap(),
            MatrixClass::TriangularUpper
        );

        // closed tandem n=2 sample with tau = (1.5, 0.25)
        let closed = TropicalMatrix::max_plus(&[vec![1.5, 1.5], vec![0.25, 0.25]]);
        assert_eq!(
            classify(&closed).unwrap(),
            MatrixClass::Similarity(TropicalScalar::max_plus(1.5))
        );

        let general = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 5.0]]);
        assert_eq!(classify(&general).unwrap(), MatrixClass::General);
    }

    #[test]
    fn permuted_triangular() {
        // arcs 2->0 and 0->1 only: order (2, 0, 1)
        let a = TropicalMatrix::max_plus(&[
            vec![1.0, NEG, 4.0],
            vec![2.0, 1.0, NEG],
            vec![NEG, NEG, 0.0],
        ]);
        match classify(&a).unwrap() {
            MatrixClass::TriangularUnderPermutation(order) => assert_eq!(order, vec![2, 0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rank_one_examples() {
        let a = TropicalMatrix::max_plus(&[vec![2.0, 2.0], vec![3.0, 3.0]]);
        let (u, v) = rank_one_factorize(&a).unwrap();
        assert_eq!(u, TropicalVector::max_plus(&[0.0, 1.0]));
        assert_eq!(v, TropicalVector::max_plus(&[2.0, 2.0]));
        assert_eq!(u.as_column().mul(&v.as_row()).unwrap(), a);

        let id = TropicalMatrix::identity(SemifieldKind::MaxPlus, 2);
        assert!(rank_one_factorize(&id).is_none());

        // symbolic C(k)B(k+1) of the communication-blocking tandem, sampled
        let (t1, t2n, t3n) = (0.7, 1.3, 0.2);
        let a = TropicalMatrix::max_plus(&[
            vec![t1 + t2n, t1 + t2n],
            vec![t2n + t3n, t2n + t3n],
        ]);
        let (u, v) = rank_one_factorize(&a).unwrap();
        assert!(u.as_column().mul(&v.as_row()).unwrap().approx_eq(&a, 1e-12));
    }

    #[test]
    fn skeleton_of_identity_is_none() {
        let id = TropicalMatrix::identity(SemifieldKind::MaxPlus, 4);
        assert!(skeleton_decompose(&id).unwrap().is_none());
    }

    #[test]
    fn manufacturing_skeleton_matches_printed_factors() {
        let (t1, t2, t3) = (1.25, 0.5, 2.0);
        let a = TropicalMatrix::max_plus(&[
            vec![t1, NEG, NEG],
            vec![t1 + t2, t2, 0.0],
            vec![t1 + t2 + t3, t2 + t3, t3],
        ]);
        let d = skeleton_decompose(&a).unwrap().unwrap();
        assert_eq!(d.inner_dim(), 2);
        assert_eq!(
            d.b,
            TropicalMatrix::max_plus(&[vec![0.0, NEG], vec![NEG, 0.0], vec![NEG, t3]])
        );
        assert_eq!(
            d.c,
            TropicalMatrix::max_plus(&[vec![t1, NEG, NEG], vec![t1 + t2, t2, 0.0]])
        );
        assert!(d.backward_triangular);
        assert!(is_backward_triangular(&d));
        assert_eq!(d.reconstruct(), a);
    }

    #[test]
    fn identity_factors_are_backward_triangular() {
        let id = TropicalMatrix::identity(SemifieldKind::MaxPlus, 3);
        let d = SkeletonDecomposition {
            b: id.clone(),
            c: id,
            basis_rows: vec![0, 1, 2],
            backward_triangular: true,
        };
        assert!(is_backward_triangular(&d));
    }
}

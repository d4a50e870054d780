#![allow(dead_code)]

use tropical_lyapunov::{SemifieldKind, TropicalMatrix};

/// Maximum cycle mean by enumerating every simple cycle (each cycle is rooted
/// at its smallest vertex).
pub fn brute_force_cycle_mean(a: &TropicalMatrix) -> Option<f64> {
    let n = a.rows();
    let mut best: Option<f64> = None;
    fn walk(
        a: &TropicalMatrix,
        root: usize,
        v: usize,
        weight: f64,
        len: usize,
        on_path: &mut Vec<bool>,
        best: &mut Option<f64>,
    ) {
        for w in root..a.rows() {
            let Some(x) = a.raw(v, w) else { continue };
            if w == root {
                let mean = (weight + x) / (len + 1) as f64;
                *best = Some(best.map_or(mean, |b| b.max(mean)));
            } else if !on_path[w] {
                on_path[w] = true;
                walk(a, root, w, weight + x, len + 1, on_path, best);
                on_path[w] = false;
            }
        }
    }
    for root in 0..n {
        let mut on_path = vec![false; n];
        on_path[root] = true;
        walk(a, root, root, 0.0, 0, &mut on_path, &mut best);
    }
    best
}

pub fn int_matrix(rows: usize, cols: usize, cells: &[Option<i32>]) -> TropicalMatrix {
    TropicalMatrix::from_raw(
        SemifieldKind::MaxPlus,
        rows,
        cols,
        cells.iter().map(|c| c.map(f64::from)).collect(),
    )
    .unwrap()
}

/// E max(X, Y) for independent X ~ Exp(a), Y ~ Exp(b).
pub fn e_max_exponential(a: f64, b: f64) -> f64 {
    1.0 / a + 1.0 / b - 1.0 / (a + b)
}

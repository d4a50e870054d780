//! Sample paths of departure epochs.

use super::compile::CompiledModel;
use crate::error::Result;
use crate::stochastic::RandomMatrixProcess;

type State = Vec<Option<f64>>;

fn apply(a: &[Option<f64>], n: usize, x: &[Option<f64>], acc: &mut [Option<f64>]) {
    for i in 0..n {
        for j in 0..x.len() {
            if let (Some(aij), Some(xj)) = (a[i * x.len() + j], x[j]) {
                let v = aij + xj;
                acc[i] = Some(acc[i].map_or(v, |b: f64| b.max(v)));
            }
        }
    }
}

/// `x(1), …, x(steps)` of `x(k) = ⊕_m A_m(k) x(k-m)` with `x(0) = 𝟙` and
/// `x(k) = 𝟘` for `k < 0`.
pub fn direct_trajectory(model: &CompiledModel, seed: u64, replication: u64, steps: usize) -> Result<Vec<State>> {
    let n = model.n();
    let m = model.max_delay();
    let procs: Vec<RandomMatrixProcess> = (1..=m)
        .map(|d| model.component_process(d, seed))
        .collect::<Result<_>>()?;
    // history[0] = x(0), history[d] = x(-d)
    let mut history: Vec<State> = vec![vec![None; n]; m];
    history[0] = vec![Some(0.0); n];
    let mut out = Vec::with_capacity(steps);
    let mut taus = Vec::new();
    let mut a = vec![None; n * n];
    for k in 1..=steps as u64 {
        let mut x = vec![None; n];
        for (d, p) in procs.iter().enumerate() {
            p.sample_into(replication, k, &mut taus, &mut a);
            apply(&a, n, &history[d], &mut x);
        }
        history.rotate_right(1);
        history[0] = x.clone();
        out.push(x);
    }
    Ok(out)
}

/// States `y(1), …, y(steps)` of the companion system with `blocks` blocks.
pub fn lifted_trajectory(
    model: &CompiledModel,
    blocks: usize,
    seed: u64,
    replication: u64,
    steps: usize,
) -> Result<Vec<State>> {
    let p = model.lifted_process(blocks, seed)?;
    let dim = p.dim();
    let mut y: State = vec![None; dim];
    for v in y.iter_mut().take(model.n()) {
        *v = Some(0.0);
    }
    let mut out = Vec::with_capacity(steps);
    let mut taus = Vec::new();
    let mut a = vec![None; dim * dim];
    for k in 1..=steps as u64 {
        p.sample_into(replication, k, &mut taus, &mut a);
        let mut next = vec![None; dim];
        apply(&a, dim, &y, &mut next);
        y = next;
        out.push(y.clone());
    }
    Ok(out)
}

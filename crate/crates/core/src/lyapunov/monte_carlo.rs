use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{Checkpoint, LyapunovEstimate, Method};
use crate::error::{Error, Result};
use crate::stochastic::{kingman_check, RandomMatrixProcess, DEFAULT_EXPECTATION_SAMPLES};

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub k: usize,
    pub replications: usize,
    /// Subtract the running maximum after every step.
    pub normalize: bool,
    /// Propagate the full product `A(1)…A(t)` instead of a state vector.
    pub full_matrix: bool,
    pub override_existence: bool,
    pub checkpoints: Vec<usize>,
    pub kingman_samples: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            k: 10_000,
            replications: 20,
            normalize: true,
            full_matrix: false,
            override_existence: false,
            checkpoints: vec![100, 1_000, 10_000],
            kingman_samples: DEFAULT_EXPECTATION_SAMPLES,
        }
    }
}

/// One replication: `‖A(1)…A(t)‖ / t` at the final step and at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationPath {
    pub lambda: f64,
    pub checkpoints: Vec<f64>,
}

fn max_of(xs: &[Option<f64>]) -> Option<f64> {
    xs.iter().flatten().copied().reduce(f64::max)
}

/// Runs replication `rep` of `p` for `k` steps.
///
/// With vector propagation the state is the row vector `yᵀ(t) = yᵀ(t-1) A(t)`
/// started from the 𝟙 vector, so `‖y(t)‖ = ‖A(1)…A(t)‖`.
pub fn replication_path(
    p: &RandomMatrixProcess,
    rep: u64,
    k: usize,
    normalize: bool,
    full_matrix: bool,
    checkpoints: &[usize],
) -> Result<ReplicationPath> {
    let n = p.dim();
    let mut taus = Vec::new();
    let mut a = vec![None; n * n];
    let width = if full_matrix { n } else { 1 };
    // state: width x n, row-major
    let mut state: Vec<Option<f64>> = if full_matrix {
        (0..n * n).map(|e| (e / n == e % n).then_some(0.0)).collect()
    } else {
        vec![Some(0.0); n]
    };
    let mut next = state.clone();
    let mut offset = 0.0;
    let mut marks = Vec::with_capacity(checkpoints.len());
    for t in 1..=k {
        p.sample_into(rep, t as u64, &mut taus, &mut a);
        for r in 0..width {
            let row = &state[r * n..(r + 1) * n];
            for j in 0..n {
                let mut best: Option<f64> = None;
                for (i, yi) in row.iter().enumerate() {
                    if let (Some(y), Some(x)) = (yi, a[i * n + j]) {
                        let v = y + x;
                        best = Some(best.map_or(v, |b: f64| b.max(v)));
                    }
                }
                next[r * n + j] = best;
            }
        }
        std::mem::swap(&mut state, &mut next);
        let Some(top) = max_of(&state) else {
            return Err(Error::ExistenceUnverified(format!(
                "product norm became zero at step {t}"
            )));
        };
        if normalize {
            for v in state.iter_mut().flatten() {
                *v -= top;
            }
            offset += top;
        }
        if checkpoints.contains(&t) {
            marks.push((offset + max_of(&state).unwrap()) / t as f64);
        }
    }
    Ok(ReplicationPath {
        lambda: (offset + max_of(&state).unwrap_or(f64::NEG_INFINITY)) / k as f64,
        checkpoints: marks,
    })
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Replication mean of `‖A(1)…A(k)‖ / k` with a Student-t 95% interval.
pub fn estimate_monte_carlo(p: &RandomMatrixProcess, cfg: &MonteCarloConfig) -> Result<LyapunovEstimate> {
    if cfg.k < 1 || cfg.replications < 2 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs k >= 1 and at least 2 replications".into(),
        ));
    }
    let report = kingman_check(p, cfg.kingman_samples);
    if !report.ok {
        let msg = format!(
            "E|A| finite: {}, rho(E A): {}",
            report.e_norm_finite,
            report.rho_of_mean_scalar()
        );
        if !cfg.override_existence {
            return Err(Error::ExistenceUnverified(msg));
        }
        log::warn!("proceeding without existence guarantee ({msg})");
    }
    let mut marks: Vec<usize> = cfg.checkpoints.iter().copied().filter(|&c| c <= cfg.k).collect();
    marks.sort_unstable();
    marks.dedup();
    let paths: Vec<ReplicationPath> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| replication_path(p, rep, cfg.k, cfg.normalize, cfg.full_matrix, &marks))
        .collect::<Result<_>>()?;

    let finals: Vec<f64> = paths.iter().map(|r| r.lambda).collect();
    let (lambda, stderr) = mean_and_stderr(&finals);
    let t = StudentsT::new(0.0, 1.0, (cfg.replications - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(c, &k)| {
            let xs: Vec<f64> = paths.iter().map(|r| r.checkpoints[c]).collect();
            let (lambda, stderr) = mean_and_stderr(&xs);
            Checkpoint { k, lambda, stderr }
        })
        .collect();
    Ok(LyapunovEstimate {
        lambda,
        stderr,
        ci95: (lambda - t * stderr, lambda + t * stderr),
        method: Method::MonteCarlo,
        k_used: cfg.k,
        replications: cfg.replications,
        checkpoints,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprMatrix;
    use crate::matrix::TropicalMatrix;
    use crate::semiring::SemifieldKind;
    use crate::stochastic::ServiceDistribution;

    fn quick(k: usize) -> MonteCarloConfig {
        MonteCarloConfig {
            k,
            replications: 4,
            kingman_samples: 1000,
            ..Default::default()
        }
    }

    #[test]
    fn fixed_matrix_tends_to_spectral_radius() {
        let a = TropicalMatrix::max_plus(&[vec![1.0, 3.0], vec![0.0, 2.0]]);
        let p = RandomMatrixProcess::fixed(&a, 0).unwrap();
        let e = estimate_monte_carlo(&p, &quick(1000)).unwrap();
        // |A^k| = 2k + 1
        assert!((e.lambda - 2.0).abs() <= 1.0 / 1000.0 + 1e-12);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.interval(0.99), (e.lambda, e.lambda));
    }

    #[test]
    fn identity_process_is_exactly_zero() {
        let p = RandomMatrixProcess::fixed(&TropicalMatrix::identity(SemifieldKind::MaxPlus, 3), 0).unwrap();
        let e = estimate_monte_carlo(&p, &quick(500)).unwrap();
        assert_eq!(e.lambda, 0.0);
        assert!(e.throughput().is_none());
    }

    #[test]
    fn vector_and_matrix_propagation_agree_without_normalization() {
        let e = ExprMatrix::parse_rows(&[&["t1", "t1"], &["t2", "t2*t1 + 1"]]).unwrap();
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 2];
        let p = RandomMatrixProcess::new(e, d, 5).unwrap();
        for rep in 0..3 {
            let v = replication_path(&p, rep, 200, false, false, &[50]).unwrap();
            let m = replication_path(&p, rep, 200, false, true, &[50]).unwrap();
            assert_eq!(v, m);
        }
    }

    #[test]
    fn normalization_does_not_change_the_estimate() {
        // integer data: every intermediate value is exact
        let e = ExprMatrix::parse_rows(&[&["t1", "2*t2", "-inf"], &["t2", "-inf", "t3"], &["1", "t3", "t1*t2"]]).unwrap();
        let d = [3.0, 1.0, 4.0].map(|v| ServiceDistribution::deterministic(v).unwrap()).to_vec();
        let p = RandomMatrixProcess::new(e.clone(), d, 0).unwrap();
        for full in [false, true] {
            let a = replication_path(&p, 0, 300, true, full, &[30]).unwrap();
            let b = replication_path(&p, 0, 300, false, full, &[30]).unwrap();
            assert_eq!(a, b);
        }
        // continuous data: equal up to rounding of the accumulated offsets
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 3];
        let p = RandomMatrixProcess::new(e, d, 9).unwrap();
        for rep in 0..3 {
            let a = replication_path(&p, rep, 2000, true, false, &[]).unwrap().lambda;
            let b = replication_path(&p, rep, 2000, false, false, &[]).unwrap().lambda;
            assert!((a - b).abs() <= 1e-9 * a.abs());
        }
    }

    #[test]
    fn parallel_reduction_is_reproducible() {
        let e = ExprMatrix::parse_rows(&[&["t1", "t1*t2"], &["t2", "t2"]]).unwrap();
        let d = vec![ServiceDistribution::uniform(0.0, 2.0).unwrap(); 2];
        let p = RandomMatrixProcess::new(e, d, 17).unwrap();
        let cfg = MonteCarloConfig {
            replications: 8,
            ..quick(500)
        };
        let a = estimate_monte_carlo(&p, &cfg).unwrap();
        let b = estimate_monte_carlo(&p, &cfg).unwrap();
        assert_eq!(a, b);
        let (lo95, hi95) = a.ci95;
        let (lo99, hi99) = a.interval(0.99);
        assert!((a.interval(0.95).0 - lo95).abs() < 1e-12 && lo99 < lo95 && hi99 > hi95);
        let serial: Vec<f64> = (0..8)
            .map(|rep| replication_path(&p, rep, 500, true, false, &[]).unwrap().lambda)
            .collect();
        assert_eq!(a.lambda, serial.iter().sum::<f64>() / 8.0);
    }

    #[test]
    fn nilpotent_process_is_rejected_unless_overridden() {
        let a = TropicalMatrix::max_plus(&[vec![f64::NEG_INFINITY, 1.0], vec![f64::NEG_INFINITY, f64::NEG_INFINITY]]);
        let p = RandomMatrixProcess::fixed(&a, 0).unwrap();
        assert!(matches!(
            estimate_monte_carlo(&p, &quick(10)),
            Err(Error::ExistenceUnverified(_))
        ));
        let cfg = MonteCarloConfig {
            override_existence: true,
            ..quick(10)
        };
        // the product vanishes after two steps
        assert!(estimate_monte_carlo(&p, &cfg).is_err());
    }

    #[test]
    fn checkpoints_are_reported_in_order() {
        let p = RandomMatrixProcess::fixed(&TropicalMatrix::max_plus(&[vec![1.0]]), 0).unwrap();
        let cfg = MonteCarloConfig {
            checkpoints: vec![1000, 10, 100, 10_000],
            ..quick(1000)
        };
        let e = estimate_monte_carlo(&p, &cfg).unwrap();
        let ks: Vec<usize> = e.checkpoints.iter().map(|c| c.k).collect();
        assert_eq!(ks, vec![10, 100, 1000]);
        assert!(e.checkpoints.iter().all(|c| c.lambda == 1.0));
    }
}

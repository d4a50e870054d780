//! Run configuration, report assembly and rendering for the
//! `tropical-lyapunov` command.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use tropical_lyapunov::lyapunov::{
    evaluate_by_decomposition, evaluate_closed_form, estimate_monte_carlo, Checkpoint,
    LyapunovEstimate, MonteCarloConfig,
};
use tropical_lyapunov::network::{compile, NetworkSpec, Preset, PresetOptions};
use tropical_lyapunov::stochastic::{kingman_check, KingmanReport, DEFAULT_EXPECTATION_SAMPLES};
use tropical_lyapunov::{Error, RandomMatrixProcess, SemifieldKind, ServiceDistribution, TropicalMatrix};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_K: usize = 10_000;
pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Input {
    Spec {
        path: PathBuf,
    },
    Preset {
        name: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        services: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        arrival: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        customers: Option<Vec<u32>>,
    },
    Matrix {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Mc,
    Closed,
    Decomp,
    /// ρ of a fixed matrix (matrix input only).
    SpectralRadius,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Fully resolved settings; embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: Input,
    pub seed: u64,
    pub k: usize,
    pub replications: usize,
    pub expectation_samples: usize,
    pub method: MethodChoice,
    pub max_depth: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub override_existence: bool,
}

impl RunConfig {
    pub fn new(input: Input) -> Self {
        Self {
            input,
            seed: DEFAULT_SEED,
            k: DEFAULT_K,
            replications: DEFAULT_REPLICATIONS,
            expectation_samples: DEFAULT_EXPECTATION_SAMPLES,
            method: MethodChoice::All,
            max_depth: DEFAULT_MAX_DEPTH,
            format: Format::Table,
            out: None,
            override_existence: false,
        }
    }

    fn monte_carlo(&self, k: usize, checkpoints: Vec<usize>) -> MonteCarloConfig {
        MonteCarloConfig {
            k,
            replications: self.replications,
            override_existence: self.override_existence,
            checkpoints,
            kingman_samples: self.expectation_samples,
            ..MonteCarloConfig::default()
        }
    }
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidArgument(_) => 2,
        Error::ModelInvalid(_) => 3,
        Error::ExistenceUnverified(_) => 4,
        _ => 1,
    }
}

pub struct Model {
    pub process: RandomMatrixProcess,
    /// The matrix itself for matrix-literal input.
    pub fixed: Option<TropicalMatrix>,
}

fn parse_distribution(s: &str) -> Result<ServiceDistribution, Error> {
    s.parse()
}

/// Accepts the whitespace literal format or a bracketed `[[1,3],[0,2]]` form.
pub fn parse_matrix(text: &str) -> Result<TropicalMatrix, Error> {
    let text = if text.trim_start().starts_with('[') {
        text.replace('[', " ").replace("],", "\n").replace(']', "\n").replace(',', " ")
    } else {
        text.to_string()
    };
    let m = TropicalMatrix::parse_literal(SemifieldKind::MaxPlus, &text)?;
    if !m.is_square() {
        return Err(Error::Parse(format!("matrix must be square, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

pub fn resolve(input: &Input, seed: u64) -> Result<Model, Error> {
    match input {
        Input::Spec { path } => {
            let spec = NetworkSpec::load(path)?;
            Ok(Model {
                process: compile(&spec)?.process(seed)?,
                fixed: None,
            })
        }
        Input::Preset {
            name,
            n,
            services,
            arrival,
            customers,
        } => {
            let preset: Preset = name.parse()?;
            let opts = PresetOptions {
                n: *n,
                services: services
                    .as_ref()
                    .map(|v| v.iter().map(|s| parse_distribution(s)).collect::<Result<Vec<_>, _>>())
                    .transpose()?,
                arrival: arrival.as_deref().map(parse_distribution).transpose()?,
                customers: customers.clone(),
            };
            let spec = preset.build(&opts).map_err(|e| match e {
                Error::InvalidArgument(m) => Error::ModelInvalid(m),
                e => e,
            })?;
            Ok(Model {
                process: compile(&spec)?.process(seed)?,
                fixed: None,
            })
        }
        Input::Matrix { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let m = parse_matrix(&text)?;
            Ok(Model {
                process: RandomMatrixProcess::fixed(&m, seed)?,
                fixed: Some(m),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub method: String,
    pub lambda: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
    pub throughput: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<Checkpoint>,
}

impl EstimateRecord {
    fn from_estimate(e: &LyapunovEstimate, seed: u64) -> Self {
        Self {
            method: e.method.to_string(),
            lambda: e.lambda,
            stderr: e.stderr,
            ci_lo: e.ci95.0,
            ci_hi: e.ci95.1,
            k: e.k_used,
            reps: e.replications,
            seed,
            throughput: e.throughput(),
            note: e.note.clone(),
            checkpoints: e.checkpoints.clone(),
        }
    }
}

/// Monte Carlo against an analytic estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub method: String,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub within_mc_ci99: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub dim: usize,
    pub kingman: KingmanReport,
    pub estimates: Vec<EstimateRecord>,
    pub comparisons: Vec<Comparison>,
    pub warnings: Vec<String>,
}

pub fn run(config: &RunConfig) -> Result<Report, Error> {
    if config.k < 1 || config.replications < 2 {
        return Err(Error::InvalidArgument("need k >= 1 and reps >= 2".into()));
    }
    let model = resolve(&config.input, config.seed)?;
    let p = &model.process;
    let all = config.method == MethodChoice::All;
    let wants = |m: MethodChoice| all || config.method == m;
    let mut warnings = Vec::new();
    let mut estimates = Vec::new();
    let kingman = kingman_check(p, config.expectation_samples);

    let mc = if wants(MethodChoice::Mc) {
        let e = estimate_monte_carlo(p, &config.monte_carlo(config.k, vec![100, 1_000, 10_000]))?;
        estimates.push(EstimateRecord::from_estimate(&e, config.seed));
        Some(e)
    } else {
        None
    };
    let mut analytic = Vec::new();
    if wants(MethodChoice::Closed) {
        match evaluate_closed_form(p, config.expectation_samples)? {
            Some(e) => analytic.push(e),
            None => warnings.push("no closed form: the process is of general type".to_string()),
        }
    }
    if wants(MethodChoice::Decomp) {
        match evaluate_by_decomposition(p, config.max_depth, config.expectation_samples)? {
            Some(e) => analytic.push(e),
            None => warnings.push(format!(
                "decomposition method found no closed form within depth {}",
                config.max_depth
            )),
        }
    }
    for e in &analytic {
        estimates.push(EstimateRecord::from_estimate(e, config.seed));
    }
    if wants(MethodChoice::SpectralRadius) {
        match &model.fixed {
            Some(m) => {
                let rho = m.spectral_radius()?.value().unwrap_or(f64::NEG_INFINITY);
                estimates.push(EstimateRecord {
                    method: "spectral_radius".into(),
                    lambda: rho,
                    stderr: 0.0,
                    ci_lo: rho,
                    ci_hi: rho,
                    k: 0,
                    reps: 0,
                    seed: config.seed,
                    throughput: (rho > 0.0).then(|| 1.0 / rho),
                    note: None,
                    checkpoints: Vec::new(),
                });
            }
            None if !all => {
                return Err(Error::InvalidArgument(
                    "spectral_radius needs a fixed matrix (--matrix)".into(),
                ))
            }
            None => {}
        }
    }

    let mut comparisons = Vec::new();
    if let Some(mc) = &mc {
        let (lo, hi) = mc.interval(0.99);
        for e in &analytic {
            let abs_diff = (mc.lambda - e.lambda).abs();
            let within = lo <= e.lambda && e.lambda <= hi;
            if !within {
                warnings.push(format!(
                    "Monte Carlo {:.6} and {} {:.6} differ by {abs_diff:.3e}, outside the 99% interval",
                    mc.lambda, e.method, e.lambda
                ));
            }
            comparisons.push(Comparison {
                method: e.method.to_string(),
                abs_diff,
                rel_diff: if e.lambda != 0.0 { abs_diff / e.lambda.abs() } else { abs_diff },
                within_mc_ci99: within,
            });
        }
    }
    Ok(Report {
        config: config.clone(),
        dim: p.dim(),
        kingman,
        estimates,
        comparisons,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub lambda: f64,
    pub stderr: f64,
    /// Difference from the last row.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub config: RunConfig,
    pub ks: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
}

/// Monte Carlo estimates at each horizon in `ks` from one set of replications.
pub fn convergence_table(config: &RunConfig, ks: &[usize]) -> Result<ConvergenceTable, Error> {
    if ks.is_empty() || ks[0] < 1 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("ks must be a nonempty ascending list of positive counts".into()));
    }
    if config.replications < 2 {
        return Err(Error::InvalidArgument("need reps >= 2".into()));
    }
    let model = resolve(&config.input, config.seed)?;
    let last = *ks.last().expect("nonempty");
    let e = estimate_monte_carlo(&model.process, &config.monte_carlo(last, ks.to_vec()))?;
    let final_lambda = e.checkpoints.last().map_or(e.lambda, |c| c.lambda);
    let rows = e
        .checkpoints
        .iter()
        .map(|c| ConvergenceRow {
            k: c.k,
            lambda: c.lambda,
            stderr: c.stderr,
            drift: c.lambda - final_lambda,
        })
        .collect();
    let mut config = config.clone();
    config.k = last;
    Ok(ConvergenceTable {
        config,
        ks: ks.to_vec(),
        rows,
    })
}

fn config_comment(config: &RunConfig) -> String {
    format!("# config: {}\n", serde_json::to_string(config).expect("serializable"))
}

fn csv_text<T: Serialize>(header: String, rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("flat record");
    }
    header + &String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
}

#[derive(Serialize)]
struct CsvEstimate<'a> {
    method: &'a str,
    lambda: f64,
    stderr: f64,
    ci_lo: f64,
    ci_hi: f64,
    k: usize,
    reps: usize,
    seed: u64,
}

pub fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("serializable") + "\n",
        Format::Csv => {
            let rows: Vec<CsvEstimate> = r
                .estimates
                .iter()
                .map(|e| CsvEstimate {
                    method: &e.method,
                    lambda: e.lambda,
                    stderr: e.stderr,
                    ci_lo: e.ci_lo,
                    ci_hi: e.ci_hi,
                    k: e.k,
                    reps: e.reps,
                    seed: e.seed,
                })
                .collect();
            csv_text(config_comment(&r.config), &rows)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "input: {}", serde_json::to_string(&r.config.input).expect("serializable"));
            let _ = writeln!(
                s,
                "dimension {}, seed {}, k {}, reps {}, expectation samples {}",
                r.dim, r.config.seed, r.config.k, r.config.replications, r.config.expectation_samples
            );
            let fmt_opt = |v: Option<f64>| v.map_or("-inf".to_string(), |x| format!("{x:.6}"));
            let _ = writeln!(
                s,
                "existence check: {} (E|A| = {}, rho(E A) = {})\n",
                if r.kingman.ok { "ok" } else { "failed" },
                fmt_opt(r.kingman.e_norm),
                fmt_opt(r.kingman.rho_of_mean)
            );
            let _ = writeln!(
                s,
                "{:<26} {:>12} {:>10} {:>25} {:>7} {:>5}",
                "method", "lambda", "stderr", "95% interval", "k", "reps"
            );
            for e in &r.estimates {
                let _ = writeln!(
                    s,
                    "{:<26} {:>12.6} {:>10.2e} {:>25} {:>7} {:>5}",
                    e.method,
                    e.lambda,
                    e.stderr,
                    format!("[{:.6}, {:.6}]", e.ci_lo, e.ci_hi),
                    e.k,
                    e.reps
                );
                for c in &e.checkpoints {
                    let _ = writeln!(s, "  at k = {:<8} {:>12.6} {:>10.2e}", c.k, c.lambda, c.stderr);
                }
                if let Some(note) = &e.note {
                    let _ = writeln!(s, "  {note}");
                }
            }
            for c in &r.comparisons {
                let _ = writeln!(
                    s,
                    "\nmonte_carlo vs {}: |diff| {:.3e} (relative {:.3e}), within 99% interval: {}",
                    c.method, c.abs_diff, c.rel_diff, c.within_mc_ci99
                );
            }
            s
        }
    }
}

pub fn render_convergence(t: &ConvergenceTable, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(t).expect("serializable") + "\n",
        Format::Csv => csv_text(config_comment(&t.config), &t.rows),
        Format::Table => {
            let mut s = format!("{:>10} {:>12} {:>10} {:>12}\n", "k", "lambda", "stderr", "drift");
            for r in &t.rows {
                let _ = writeln!(s, "{:>10} {:>12.6} {:>10.2e} {:>12.3e}", r.k, r.lambda, r.stderr, r.drift);
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(name: &str) -> RunConfig {
        let mut c = RunConfig::new(Input::Preset {
            name: name.into(),
            n: None,
            services: None,
            arrival: None,
            customers: None,
        });
        c.k = 2000;
        c.replications = 4;
        c.expectation_samples = 10_000;
        c
    }

    #[test]
    fn bracketed_and_plain_literals_agree() {
        let a = parse_matrix("[[1, 3], [0, 2]]").unwrap();
        let b = parse_matrix("1 3\n0 2\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_matrix("[[1, -inf], [0, 2]]").unwrap().raw(0, 1), None);
        assert!(matches!(parse_matrix("1 2 3"), Err(Error::Parse(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse(String::new())), 2);
        assert_eq!(exit_code(&Error::ModelInvalid(String::new())), 3);
        assert_eq!(exit_code(&Error::ExistenceUnverified(String::new())), 4);
    }

    #[test]
    fn open_tandem_all_methods() {
        let r = run(&preset("open_tandem")).unwrap();
        let methods: Vec<&str> = r.estimates.iter().map(|e| e.method.as_str()).collect();
        assert_eq!(methods, vec!["monte_carlo", "triangular"]);
        assert_eq!(r.estimates[1].lambda, 1.0);
        assert_eq!(r.comparisons.len(), 1);
        assert!(r.kingman.ok);
        // the decomposition finds nothing for a full-rank matrix
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn bad_inputs_map_to_errors() {
        let mut c = preset("nope");
        assert!(matches!(run(&c), Err(Error::Parse(_))));
        c = preset("closed_tandem");
        if let Input::Preset { customers, .. } = &mut c.input {
            *customers = Some(vec![1]);
        }
        assert!(matches!(run(&c), Err(Error::ModelInvalid(_))));
        c = preset("open_tandem");
        c.method = MethodChoice::SpectralRadius;
        assert!(matches!(run(&c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn convergence_rows_end_with_zero_drift() {
        let t = convergence_table(&preset("closed_tandem"), &[10, 100, 1000]).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[2].drift, 0.0);
        assert!(convergence_table(&preset("closed_tandem"), &[100, 10]).is_err());
        assert!(convergence_table(&preset("closed_tandem"), &[]).is_err());
    }

    #[test]
    fn csv_has_the_documented_columns() {
        let r = run(&preset("closed_tandem")).unwrap();
        let text = render_report(&r, Format::Csv);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert_eq!(lines.next().unwrap(), "method,lambda,stderr,ci_lo,ci_hi,k,reps,seed");
        assert_eq!(lines.count(), r.estimates.len());
    }
}

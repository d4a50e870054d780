mod common;

use common::e_max_exponential;
use tropical_lyapunov::lyapunov::decomposition::{evaluate_by_decomposition, symbolic_decompositions};
use tropical_lyapunov::lyapunov::monte_carlo::{estimate_monte_carlo, MonteCarloConfig};
use tropical_lyapunov::network::{compile, NetworkSpec, Preset, PresetOptions};
use tropical_lyapunov::stochastic::kingman_check;
use tropical_lyapunov::structure::{is_backward_triangular, skeleton_decompose};
use tropical_lyapunov::{Error, Method, ServiceDistribution};

fn exp(rate: f64) -> ServiceDistribution {
    ServiceDistribution::exponential(rate).unwrap()
}

#[test]
fn json_spec_compiles_like_the_preset() {
    let text = r#"{
        "nodes": [
            {"id": 1, "c": "inf", "service": "exp(1)"},
            {"id": 2, "c": 0, "service": "exp(1)"},
            {"id": 3, "c": 0, "b": 0, "service": "exp(1)"}
        ],
        "arcs": [[1, 2], [2, 3]],
        "blocking": "manufacturing"
    }"#;
    let spec = NetworkSpec::from_json(text).unwrap();
    let preset = Preset::ManufacturingTandem.build(&PresetOptions::default()).unwrap();
    assert_eq!(spec, preset);
    assert_eq!(compile(&spec).unwrap().a(1), compile(&preset).unwrap().a(1));
}

#[test]
fn invalid_specs_are_model_errors() {
    let cyclic = r#"{
        "nodes": [
            {"id": 1, "c": "inf", "service": "exp(1)"},
            {"id": 2, "c": 0, "service": "exp(1)"},
            {"id": 3, "c": 0, "service": "exp(1)"}
        ],
        "arcs": [[1, 2], [2, 3], [3, 2]]
    }"#;
    assert!(matches!(NetworkSpec::from_json(cyclic), Err(Error::ModelInvalid(_))));
    assert!(matches!(NetworkSpec::from_json(r#"{"nodes": []"#), Err(Error::Parse(_))));
    let unknown_field = r#"{"nodes": [{"id": 1, "c": "inf", "service": "exp(1)", "speed": 2}], "arcs": []}"#;
    assert!(matches!(NetworkSpec::from_json(unknown_field), Err(Error::Parse(_))));
}

#[test]
fn every_preset_satisfies_the_existence_check() {
    for p in Preset::ALL {
        let m = compile(&p.build(&PresetOptions::default()).unwrap()).unwrap();
        let report = kingman_check(&m.process(1).unwrap(), 10_000);
        assert!(report.ok, "{p}");
    }
}

#[test]
fn decomposition_values_for_the_fork_join_family() {
    let fj = compile(&Preset::ForkJoin5.build(&PresetOptions::default()).unwrap()).unwrap();
    let e = evaluate_by_decomposition(&fj.process(1).unwrap(), 3, 1000).unwrap().unwrap();
    assert_eq!((e.lambda, e.method, e.stderr), (5.0, Method::BackwardSkeleton, 0.0));

    let rr = compile(&Preset::RoundRobin.build(&PresetOptions::default()).unwrap()).unwrap();
    let e = evaluate_by_decomposition(&rr.process(1).unwrap(), 3, 1000).unwrap().unwrap();
    assert_eq!(e.lambda, 2.0);

    // slower queues than arrivals: the queues dominate
    let opts = PresetOptions {
        services: Some(vec![exp(0.25), exp(1.0)]),
        arrival: Some(exp(1.0)),
        ..Default::default()
    };
    let rr = compile(&Preset::RoundRobin.build(&opts).unwrap()).unwrap();
    let e = evaluate_by_decomposition(&rr.process(1).unwrap(), 3, 1000).unwrap().unwrap();
    assert_eq!(e.lambda, 4.0);
}

#[test]
fn longer_tandems_decompose() {
    let opts = PresetOptions {
        n: Some(4),
        ..Default::default()
    };
    let m = compile(&Preset::ManufacturingTandem.build(&opts).unwrap()).unwrap();
    let e = evaluate_by_decomposition(&m.process(1).unwrap(), 3, 1000).unwrap().unwrap();
    assert_eq!(e.lambda, e_max_exponential(1.0, 1.0));
    assert!(!symbolic_decompositions(m.a(1)).is_empty());
}

#[test]
fn numeric_skeleton_of_network_samples() {
    let fj = compile(&Preset::ForkJoin5.build(&PresetOptions::default()).unwrap()).unwrap();
    let a = fj.process(3).unwrap().sample_matrix(1);
    let d = skeleton_decompose(&a).unwrap().unwrap();
    assert_eq!((d.b.shape(), d.c.shape()), ((5, 4), (4, 5)));
    assert!(is_backward_triangular(&d));
    assert_eq!(d.reconstruct(), a);

    let rr = compile(&Preset::RoundRobin.build(&PresetOptions::default()).unwrap()).unwrap();
    let a = rr.process(3).unwrap().sample_matrix(1);
    let d = skeleton_decompose(&a).unwrap().unwrap();
    assert!(is_backward_triangular(&d));
    assert!(d.reconstruct().approx_eq(&a, 1e-9));
}

#[test]
fn monte_carlo_on_the_open_tandem() {
    let m = compile(&Preset::OpenTandem.build(&PresetOptions::default()).unwrap()).unwrap();
    let cfg = MonteCarloConfig {
        k: 2000,
        replications: 8,
        kingman_samples: 10_000,
        ..Default::default()
    };
    let e = estimate_monte_carlo(&m.process(11).unwrap(), &cfg).unwrap();
    assert!((e.lambda - 1.0).abs() < 0.05, "{}", e.lambda);
    assert!(e.stderr > 0.0);
    assert_eq!(e.throughput(), Some(1.0 / e.lambda));
}

//! Fork-join queueing networks and their max-plus models.

pub mod compile;
pub mod presets;
pub mod spec;
pub mod trajectory;

pub use compile::{build_partial_graphs, compile, longest_path, CompiledModel, PartialGraphs};
pub use presets::{
    closed_tandem, communication_tandem, fork_join_5, manufacturing_tandem, open_tandem,
    round_robin_expand, Preset, PresetOptions,
};
pub use spec::{Blocking, NetworkSpec, NodeSpec};
pub use trajectory::{direct_trajectory, lifted_trajectory};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprMatrix;
    use crate::stochastic::ServiceDistribution;

    fn default(p: Preset) -> CompiledModel {
        compile(&p.build(&PresetOptions::default()).unwrap()).unwrap()
    }

    #[test]
    fn open_tandem_matrix() {
        let m = default(Preset::OpenTandem);
        assert_eq!(m.max_delay(), 1);
        let expect = ExprMatrix::parse_rows(&[
            &["t1", "-inf", "-inf"],
            &["t1*t2", "t2", "-inf"],
            &["t1*t2*t3", "t2*t3", "t3"],
        ])
        .unwrap();
        assert_eq!(*m.a(1), expect);
        assert_eq!(m.lifted_exprs(1).unwrap(), expect);
    }

    fn assert_compiles_to(p: Preset, rows: &[&[&str]]) {
        let m = default(p);
        assert_eq!(m.max_delay(), 1, "{p}");
        assert_eq!(*m.a(1), ExprMatrix::parse_rows(rows).unwrap(), "{p}");
    }

    #[test]
    fn closed_tandem_matrix() {
        assert_compiles_to(Preset::ClosedTandem, &[&["t1", "t1"], &["t2", "t2"]]);
    }

    #[test]
    fn manufacturing_matrix() {
        assert_compiles_to(
            Preset::ManufacturingTandem,
            &[
                &["t1", "-inf", "-inf"],
                &["t1*t2", "t2", "0"],
                &["t1*t2*t3", "t2*t3", "t3"],
            ],
        );
    }

    #[test]
    fn communication_matrix() {
        assert_compiles_to(
            Preset::CommunicationTandem,
            &[
                &["t1", "t1", "-inf"],
                &["t1*t2", "t1*t2", "t2"],
                &["t1*t2*t3", "t1*t2*t3", "t2*t3"],
            ],
        );
    }

    #[test]
    fn fork_join_matrix() {
        assert_compiles_to(
            Preset::ForkJoin5,
            &[
                &["t1", "-inf", "-inf", "-inf", "-inf"],
                &["t1*t2", "t2*t3", "t2*t3", "-inf", "-inf"],
                &["-inf", "t3", "t3", "-inf", "-inf"],
                &["t1*t2*t4", "t2*t3*t4", "t2*t3*t4", "t4", "-inf"],
                &["-inf", "-inf", "t5", "t5", "t5"],
            ],
        );
    }

    #[test]
    fn round_robin_matrix() {
        assert_compiles_to(
            Preset::RoundRobin,
            &[
                &["t1", "-inf", "t1*t3", "t1*t3"],
                &["-inf", "t2", "t2*t3*t4", "t2*t3*t4"],
                &["-inf", "-inf", "t3", "t3"],
                &["-inf", "-inf", "t3*t4", "t3*t4"],
            ],
        );
    }

    #[test]
    fn without_finite_buffers_blocking_rules_coincide() {
        let base = Preset::OpenTandem.build(&PresetOptions::default()).unwrap();
        let plain = compile(&base).unwrap();
        for rule in [Blocking::Manufacturing, Blocking::Communication] {
            let mut s = base.clone();
            s.blocking = rule;
            assert_eq!(*compile(&s).unwrap().a(1), *plain.a(1));
        }
    }

    #[test]
    fn delayed_closed_tandem_has_two_blocks() {
        let d = vec![ServiceDistribution::exponential(1.0).unwrap(); 3];
        let m = compile(&closed_tandem(&d, &[2, 0, 1]).unwrap()).unwrap();
        assert_eq!(m.max_delay(), 2);
        assert_eq!(m.lifted_exprs(2).unwrap().rows(), 6);
        assert!(m.lifted_exprs(1).is_err());
    }

    #[test]
    fn departures_are_nondecreasing() {
        for p in Preset::ALL {
            let m = default(p);
            let path = direct_trajectory(&m, 3, 0, 40).unwrap();
            let mut prev = vec![Some(0.0); m.n()];
            for x in path {
                for (a, b) in prev.iter().zip(&x) {
                    assert!(b >= a, "{p}");
                }
                prev = x;
            }
        }
    }
}

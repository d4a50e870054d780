use std::fmt;
use std::str::FromStr;

use super::spec::{Blocking, NetworkSpec, NodeSpec};
use crate::error::{Error, Result};
use crate::stochastic::{ServiceDistribution, TauSource};

fn exp(rate: f64) -> ServiceDistribution {
    ServiceDistribution::exponential(rate).expect("positive rate")
}

/// Open tandem `1 -> 2 -> … -> n` with infinite buffers.
pub fn open_tandem(services: &[ServiceDistribution]) -> Result<NetworkSpec> {
    let n = services.len();
    let spec = NetworkSpec {
        nodes: services
            .iter()
            .enumerate()
            .map(|(k, &d)| NodeSpec::new(k + 1, if k == 0 { None } else { Some(0) }, d))
            .collect(),
        arcs: (1..n).map(|i| (i, i + 1)).collect(),
        blocking: Blocking::None,
    };
    spec.validate()?;
    Ok(spec)
}

/// Closed tandem `1 -> … -> n -> 1` with `c_i` customers at node `i`.
pub fn closed_tandem(services: &[ServiceDistribution], customers: &[u32]) -> Result<NetworkSpec> {
    let n = services.len();
    if customers.len() != n || n < 2 {
        return Err(Error::InvalidArgument(
            "closed tandem needs at least two nodes and one customer count per node".into(),
        ));
    }
    let spec = NetworkSpec {
        nodes: services
            .iter()
            .zip(customers)
            .enumerate()
            .map(|(k, (&d, &c))| NodeSpec::new(k + 1, Some(c), d))
            .collect(),
        arcs: (1..=n).map(|i| (i, i % n + 1)).collect(),
        blocking: Blocking::None,
    };
    spec.validate()?;
    Ok(spec)
}

/// Open tandem whose last buffer holds nothing (`b_n = 0`), manufacturing blocking.
pub fn manufacturing_tandem(services: &[ServiceDistribution]) -> Result<NetworkSpec> {
    let mut spec = open_tandem(services)?;
    spec.blocking = Blocking::Manufacturing;
    if let Some(last) = spec.nodes.last_mut() {
        last.b = Some(0);
    }
    spec.validate()?;
    Ok(spec)
}

/// Open tandem with `b_i = 0` past the source, communication blocking.
pub fn communication_tandem(services: &[ServiceDistribution]) -> Result<NetworkSpec> {
    let mut spec = open_tandem(services)?;
    spec.blocking = Blocking::Communication;
    for node in spec.nodes.iter_mut().skip(1) {
        node.b = Some(0);
    }
    spec.validate()?;
    Ok(spec)
}

/// Five-node fork-join network: 1 feeds 2, which forks to 3 and 4; 3 feeds
/// back to 2 and, with 4, joins into 5.
pub fn fork_join_5(services: &[ServiceDistribution]) -> Result<NetworkSpec> {
    if services.len() != 5 {
        return Err(Error::InvalidArgument("fork_join_5 has exactly five nodes".into()));
    }
    let c = [None, Some(0), Some(1), Some(0), Some(1)];
    let spec = NetworkSpec {
        nodes: (0..5).map(|k| NodeSpec::new(k + 1, c[k], services[k])).collect(),
        arcs: vec![(1, 2), (2, 3), (2, 4), (3, 2), (3, 5), (4, 5)],
        blocking: Blocking::None,
    };
    spec.validate()?;
    Ok(spec)
}

/// Fork-join equivalent of round-robin routing over `l` queues.
///
/// Nodes `1..=l` are the queues; nodes `l+1..=2l` form a cycle carrying one
/// customer at node `l+1` and each feeds its queue. Node `l+i` takes the
/// arrival stream's draw number `(k-1)·l + i` in cycle `k`.
pub fn round_robin_expand(
    l: usize,
    arrival: ServiceDistribution,
    services: &[ServiceDistribution],
) -> Result<NetworkSpec> {
    if l < 2 || services.len() != l {
        return Err(Error::InvalidArgument(
            "round robin needs l >= 2 queues and one service law per queue".into(),
        ));
    }
    let mut nodes: Vec<NodeSpec> = (0..l).map(|i| NodeSpec::new(i + 1, Some(0), services[i])).collect();
    for i in 1..=l {
        let mut node = NodeSpec::new(l + i, Some(if i == 1 { 1 } else { 0 }), arrival);
        node.source = TauSource::Shared {
            stream: 0,
            stride: l as u64,
            offset: i as u64,
        };
        nodes.push(node);
    }
    let mut arcs: Vec<(usize, usize)> = (1..=l).map(|i| (l + i, i)).collect();
    arcs.extend((1..=l).map(|i| (l + i, l + i % l + 1)));
    let spec = NetworkSpec {
        nodes,
        arcs,
        blocking: Blocking::None,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    OpenTandem,
    ClosedTandem,
    ManufacturingTandem,
    CommunicationTandem,
    ForkJoin5,
    RoundRobin,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::OpenTandem,
        Preset::ClosedTandem,
        Preset::ManufacturingTandem,
        Preset::CommunicationTandem,
        Preset::ForkJoin5,
        Preset::RoundRobin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::OpenTandem => "open_tandem",
            Preset::ClosedTandem => "closed_tandem",
            Preset::ManufacturingTandem => "manufacturing_tandem",
            Preset::CommunicationTandem => "communication_tandem",
            Preset::ForkJoin5 => "fork_join_5",
            Preset::RoundRobin => "round_robin",
        }
    }

    /// Default service laws.
    pub fn default_services(&self, n: Option<usize>) -> Vec<ServiceDistribution> {
        match self {
            Preset::OpenTandem => (1..=n.unwrap_or(3)).map(|i| exp(i as f64)).collect(),
            Preset::ClosedTandem => vec![exp(1.0); n.unwrap_or(2)],
            Preset::ManufacturingTandem | Preset::CommunicationTandem => vec![exp(1.0); n.unwrap_or(3)],
            Preset::ForkJoin5 => (1..=5)
                .map(|i| ServiceDistribution::deterministic(i as f64).expect("nonnegative"))
                .collect(),
            Preset::RoundRobin => vec![exp(1.0); n.unwrap_or(2)],
        }
    }

    pub fn build(&self, opts: &PresetOptions) -> Result<NetworkSpec> {
        let services = opts
            .services
            .clone()
            .unwrap_or_else(|| self.default_services(opts.n));
        if let Some(n) = opts.n {
            if n != services.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} service laws given for {n} nodes",
                    services.len()
                )));
            }
        }
        match self {
            Preset::OpenTandem => open_tandem(&services),
            Preset::ClosedTandem => {
                let c = opts.customers.clone().unwrap_or_else(|| vec![1; services.len()]);
                closed_tandem(&services, &c)
            }
            Preset::ManufacturingTandem => manufacturing_tandem(&services),
            Preset::CommunicationTandem => communication_tandem(&services),
            Preset::ForkJoin5 => fork_join_5(&services),
            Preset::RoundRobin => round_robin_expand(
                services.len(),
                opts.arrival.unwrap_or_else(|| exp(1.0)),
                &services,
            ),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown preset {s:?}")))
    }
}

/// Overrides for a preset. `n` is the node count (queue count for round robin).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetOptions {
    pub n: Option<usize>,
    pub services: Option<Vec<ServiceDistribution>>,
    pub arrival: Option<ServiceDistribution>,
    pub customers: Option<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::compile::{build_partial_graphs, longest_path};

    #[test]
    fn presets_validate_with_defaults() {
        for p in Preset::ALL {
            let spec = p.build(&PresetOptions::default()).unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            assert!(spec.validate().is_ok(), "{p}");
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn longest_paths() {
        let open = Preset::OpenTandem.build(&PresetOptions { n: Some(4), ..Default::default() }).unwrap();
        assert_eq!(longest_path(&open).unwrap(), 3);
        let fj = Preset::ForkJoin5.build(&PresetOptions::default()).unwrap();
        assert_eq!(longest_path(&fj).unwrap(), 2);
        let closed = Preset::ClosedTandem.build(&PresetOptions::default()).unwrap();
        assert_eq!(longest_path(&closed).unwrap(), 0);
        let rr = Preset::RoundRobin.build(&PresetOptions { n: Some(3), ..Default::default() }).unwrap();
        assert_eq!(longest_path(&rr).unwrap(), 3);
    }

    #[test]
    fn partial_graphs() {
        let open = Preset::OpenTandem.build(&PresetOptions::default()).unwrap();
        let g = build_partial_graphs(&open).unwrap();
        assert_eq!((g.m1, g.m2, g.max_delay()), (0, 0, 1));
        assert_eq!(g.g[0].raw(0, 1), Some(0.0));
        assert_eq!(g.g[0].raw(1, 2), Some(0.0));
        assert_eq!(g.g[1].norm().value(), None);

        let closed = Preset::ClosedTandem.build(&PresetOptions::default()).unwrap();
        let g = build_partial_graphs(&closed).unwrap();
        assert_eq!(g.g[0].norm().value(), None);
        assert_eq!(g.g[1].raw(0, 1), Some(0.0));
        assert_eq!(g.g[1].raw(1, 0), Some(0.0));

        let manu = Preset::ManufacturingTandem.build(&PresetOptions::default()).unwrap();
        let g = build_partial_graphs(&manu).unwrap();
        assert_eq!(g.h[1].raw(1, 2), Some(0.0));
        assert_eq!(g.h[1].norm().value(), Some(0.0));
        assert_eq!(g.h[1].raw(0, 1), None);
    }

    #[test]
    fn round_robin_streams() {
        let rr = round_robin_expand(2, exp(1.0), &[exp(1.0), exp(1.0)]).unwrap();
        assert_eq!(rr.n(), 4);
        assert_eq!(rr.nodes[2].c, Some(1));
        assert_eq!(rr.nodes[3].c, Some(0));
        assert_eq!(
            rr.nodes[3].source,
            TauSource::Shared { stream: 0, stride: 2, offset: 2 }
        );
        assert!(round_robin_expand(1, exp(1.0), &[exp(1.0)]).is_err());
    }
}

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stochastic::{ServiceDistribution, TauSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Blocking {
    #[default]
    None,
    /// A finished customer waits at its server while a successor buffer is full.
    Manufacturing,
    /// Service does not start until every successor buffer has room.
    Communication,
}

/// `null`, `"inf"` or a count.
mod count_or_inf {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Count(u32),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u32(*n),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<u32>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Count(n)) => Ok(Some(n)),
            Some(Raw::Text(t)) if matches!(t.as_str(), "inf" | "infinity" | "∞") => Ok(None),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("expected a count or \"inf\", got {t:?}"))),
        }
    }
}

fn is_own(s: &TauSource) -> bool {
    *s == TauSource::Own
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    /// 1-based label; nodes must be listed as 1, 2, …, n.
    pub id: usize,
    /// Initial customers; `None` is infinite (source nodes only).
    #[serde(default, with = "count_or_inf")]
    pub c: Option<u32>,
    /// Buffer capacity; `None` is infinite.
    #[serde(default, with = "count_or_inf")]
    pub b: Option<u32>,
    pub service: ServiceDistribution,
    #[serde(default, skip_serializing_if = "is_own")]
    pub source: TauSource,
}

impl NodeSpec {
    pub fn new(id: usize, c: Option<u32>, service: ServiceDistribution) -> Self {
        Self {
            id,
            c,
            b: None,
            service,
            source: TauSource::Own,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    /// Directed arcs `(i, j)` between 1-based labels.
    pub arcs: Vec<(usize, usize)>,
    #[serde(default)]
    pub blocking: Blocking,
}

impl NetworkSpec {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// 0-based arcs.
    pub fn arcs0(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().map(|&(i, j)| (i - 1, j - 1))
    }

    /// `P(j)`, 0-based.
    pub fn predecessors(&self, j: usize) -> Vec<usize> {
        self.arcs0().filter(|&(_, b)| b == j).map(|(a, _)| a).collect()
    }

    /// `S(i)`, 0-based.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        self.arcs0().filter(|&(a, _)| a == i).map(|(_, b)| b).collect()
    }

    /// Nodes with no predecessors, 0-based.
    pub fn source_nodes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.predecessors(j).is_empty()).collect()
    }

    /// Arcs `(i, j)` with `c_j = 0`, 0-based.
    pub fn g0_arcs(&self) -> Vec<(usize, usize)> {
        self.arcs0().filter(|&(_, j)| self.nodes[j].c == Some(0)).collect()
    }

    /// Structural checks first, then acyclicity of the zero-delay graph.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ModelInvalid(msg));
        let n = self.n();
        if n == 0 {
            return bad("network has no nodes".into());
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.id != k + 1 {
                return bad(format!("node at position {} has id {}, expected {}", k + 1, node.id, k + 1));
            }
            if !node.service.is_nonnegative() {
                return bad(format!("node {}: service times must be nonnegative", node.id));
            }
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in &self.arcs {
            if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
                return bad(format!("arc ({i}, {j}) references an unknown node"));
            }
            if !seen.insert((i, j)) {
                return bad(format!("duplicate arc ({i}, {j})"));
            }
        }
        let mut shared = BTreeSet::new();
        for (k, node) in self.nodes.iter().enumerate() {
            let is_source = self.predecessors(k).is_empty();
            match (is_source, node.c) {
                (true, Some(_)) => {
                    return bad(format!("source node {} must have infinitely many customers", node.id))
                }
                (false, None) => {
                    return bad(format!("node {} has predecessors but an infinite customer count", node.id))
                }
                _ => {}
            }
            match (node.c, node.b) {
                (None, Some(b)) => return bad(format!("node {}: buffer {b} below infinite customer count", node.id)),
                (Some(c), Some(b)) if b < c => {
                    return bad(format!("node {}: buffer {b} smaller than customer count {c}", node.id))
                }
                _ => {}
            }
            if let TauSource::Shared {
                stream,
                stride,
                offset,
            } = node.source
            {
                if stride == 0 || offset == 0 || offset > stride || !shared.insert((stream, offset)) {
                    return bad(format!("node {}: invalid or clashing shared stream", node.id));
                }
            }
        }
        if crate::network::compile::longest_path_in(n, &self.g0_arcs()).is_none() {
            return bad("the graph of arcs into nodes with no initial customers has a cycle".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn distributions(&self) -> Vec<ServiceDistribution> {
        self.nodes.iter().map(|n| n.service).collect()
    }

    pub fn tau_sources(&self) -> Vec<TauSource> {
        self.nodes.iter().map(|n| n.source).collect()
    }
}

//! Canonical graph documents.
//!
//! ```json
//! {
//!   "nodes": ["A", "X", "Y"],
//!   "edges": [["A", "X"], ["X", "Y"]],
//!   "observed": ["A", "X", "Y"],
//!   "treatment": "X",
//!   "outcome": "Y"
//! }
//! ```
//!
//! Saving writes two-space indented JSON with edges in ascending
//! `(from, to)` index order and a trailing newline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DirectedGraph, Node};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub observed: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub treatment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

impl GraphFile {
    pub fn from_graph(g: &DirectedGraph, treatment: Option<Node>, outcome: Option<Node>) -> Self {
        let l = |v: Node| g.label(v).to_string();
        Self {
            nodes: g.labels().to_vec(),
            edges: g.edges().map(|(a, b)| [l(a), l(b)]).collect(),
            observed: g.observed().iter().map(l).collect(),
            treatment: treatment.map(l),
            outcome: outcome.map(l),
        }
    }

    /// The graph plus resolved treatment and outcome indices.
    pub fn to_graph(&self) -> Result<(DirectedGraph, Option<Node>, Option<Node>)> {
        let labels = self.nodes.clone();
        let pos = |l: &str| {
            labels.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let edges =
            self.edges.iter().map(|[a, b]| Ok((pos(a)?, pos(b)?))).collect::<Result<Vec<_>>>()?;
        let observed = self.observed.iter().map(|l| pos(l)).collect::<Result<Vec<_>>>()?;
        let treatment = self.treatment.as_deref().map(pos).transpose()?;
        let outcome = self.outcome.as_deref().map(pos).transpose()?;
        let g = DirectedGraph::new(labels.clone(), edges, observed)?;
        Ok((g, treatment, outcome))
    }

    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_string()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_stable() {
        let g = DirectedGraph::new(
            vec!["L".into(), "A".into(), "X".into(), "Y".into()],
            [(2, 3), (0, 2), (0, 3), (1, 2)],
            [1, 2, 3],
        )
        .unwrap();
        let doc = GraphFile::from_graph(&g, Some(2), Some(3));
        let text = doc.to_canonical_string().unwrap();
        let parsed = GraphFile::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        let (g2, t, o) = parsed.to_graph().unwrap();
        assert_eq!(g2, g);
        assert_eq!((t, o), (Some(2), Some(3)));
        assert_eq!(GraphFile::from_graph(&g2, t, o).to_canonical_string().unwrap(), text);
        assert!(text.starts_with("{\n  \"nodes\": ["));
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn unknown_labels_rejected() {
        let doc = GraphFile {
            nodes: vec!["A".into()],
            edges: vec![["A".into(), "B".into()]],
            observed: vec![],
            treatment: None,
            outcome: None,
        };
        assert!(matches!(doc.to_graph(), Err(Error::UnknownLabel(_))));
    }
}

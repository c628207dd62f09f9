use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::TelemetryError;
use crate::collab::Posting;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PropagationNode {
    pub posting_id: String,
    pub channel_id: String,
    pub author_id: String,
    pub posted_at: NaiveDate,
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationEdge {
    pub parent: String,
    pub child: String,
}

/// Postings of one snapshot linked by reshares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationGraph {
    pub nodes: Vec<PropagationNode>,
    pub edges: Vec<PropagationEdge>,
    pub roots: Vec<String>,
}

impl PropagationGraph {
    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        let parent: BTreeMap<&str, &str> = self.edges.iter().map(|e| (e.child.as_str(), e.parent.as_str())).collect();
        self.nodes
            .iter()
            .map(|n| {
                let mut d = 1;
                let mut cur = n.posting_id.as_str();
                while let Some(p) = parent.get(cur) {
                    d += 1;
                    cur = p;
                }
                d
            })
            .max()
            .unwrap_or(0)
    }
}

/// Builds the reshare forest from a snapshot's postings.
///
/// Every parent must be one of the given postings, created before its child
/// (lower sequence number, no later date); anything else is reported.
pub fn propagation<'a>(postings: impl IntoIterator<Item = &'a Posting>) -> Result<PropagationGraph, TelemetryError> {
    let mut postings: Vec<&Posting> = postings.into_iter().collect();
    postings.sort_by_key(|p| p.seq);
    let by_id: BTreeMap<&str, &Posting> = postings.iter().map(|p| (p.id.as_str(), *p)).collect();
    let mut graph = PropagationGraph { nodes: Vec::new(), edges: Vec::new(), roots: Vec::new() };
    for p in &postings {
        graph.nodes.push(PropagationNode {
            posting_id: p.id.clone(),
            channel_id: p.channel_id.clone(),
            author_id: p.author_id.clone(),
            posted_at: p.posted_at,
            version: p.version,
        });
        match &p.parent_posting_id {
            None => graph.roots.push(p.id.clone()),
            Some(parent) => {
                let q = by_id
                    .get(parent.as_str())
                    .ok_or_else(|| TelemetryError::BrokenLineage(format!("{} has unknown parent {parent}", p.id)))?;
                if q.seq >= p.seq || q.posted_at > p.posted_at {
                    return Err(TelemetryError::BrokenLineage(format!("{parent} is not older than {}", p.id)));
                }
                graph.edges.push(PropagationEdge { parent: parent.clone(), child: p.id.clone() });
            }
        }
    }
    Ok(graph)
}

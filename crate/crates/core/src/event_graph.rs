//! Offset-weighted match graph and event clustering.
//!
//! Every surviving primary match `q -> i` contributes the edge pair
//! `(q, i, start(i) - start(q))` and `(i, q, start(q) - start(i))`. Events are
//! the connected components.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::fingerprint::{MatchEntry, MatchingList};

/// Decides whether a primary match is kept as a true match.
pub trait MatchFilter: Sync {
    fn is_true_match(&self, entry: &MatchEntry) -> bool;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEdge {
    pub from: String,
    pub to: String,
    /// `start(to) - start(from)` in seconds.
    pub weight: f64,
    pub source_entry: MatchEntry,
}

/// Disagreement between the two directions of a mutual match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualResidual {
    pub a: String,
    pub b: String,
    /// `|w(a->b) + w(b->a)|` in seconds, using both original entries.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchGraph {
    nodes: Vec<String>,
    edges: Vec<MatchEdge>,
    adjacency: BTreeMap<String, Vec<usize>>,
    residuals: Vec<MutualResidual>,
}

impl MatchGraph {
    /// Build from explicit edges, adding each reverse edge. Intended for
    /// tests and tools; [`build_graph`] is the pipeline path.
    pub fn from_weighted_edges(nodes: &[&str], edges: &[(&str, &str, f64)]) -> Self {
        let mut g = MatchGraph::with_nodes(nodes.iter().map(|s| s.to_string()));
        for &(a, b, w) in edges {
            let entry = MatchEntry {
                query_id: a.to_string(),
                clip_id: b.to_string(),
                offset_frames: 0,
                offset_seconds: -w,
                ml: 1,
                tml: 1,
                lq: 1,
                li: 1,
            };
            g.insert_pair(entry);
        }
        g.finish();
        g
    }

    fn with_nodes(nodes: impl IntoIterator<Item = String>) -> Self {
        let set: BTreeSet<String> = nodes.into_iter().collect();
        MatchGraph {
            nodes: set.into_iter().collect(),
            ..Default::default()
        }
    }

    fn insert_pair(&mut self, entry: MatchEntry) {
        let w = -entry.offset_seconds;
        self.edges.push(MatchEdge {
            from: entry.query_id.clone(),
            to: entry.clip_id.clone(),
            weight: w,
            source_entry: entry.clone(),
        });
        self.edges.push(MatchEdge {
            from: entry.clip_id.clone(),
            to: entry.query_id.clone(),
            weight: -w,
            source_entry: entry,
        });
    }

    fn finish(&mut self) {
        for e in &self.edges {
            for n in [&e.from, &e.to] {
                if let Err(at) = self.nodes.binary_search(n) {
                    self.nodes.insert(at, n.clone());
                }
            }
        }
        self.edges.sort_by(|a, b| a.from.cmp(&b.from).then(a.to.cmp(&b.to)));
        self.adjacency.clear();
        for (i, e) in self.edges.iter().enumerate() {
            self.adjacency.entry(e.from.clone()).or_default().push(i);
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[MatchEdge] {
        &self.edges
    }

    pub fn residuals(&self) -> &[MutualResidual] {
        &self.residuals
    }

    /// Outgoing edges of `node`, sorted by target id.
    pub fn outgoing(&self, node: &str) -> impl Iterator<Item = &MatchEdge> {
        self.adjacency
            .get(node)
            .into_iter()
            .flat_map(move |ids| ids.iter().map(move |&i| &self.edges[i]))
    }

    pub fn degree(&self, node: &str) -> usize {
        self.adjacency.get(node).map_or(0, Vec::len)
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&MatchEdge> {
        self.outgoing(from).find(|e| e.to == to)
    }
}

/// Separate each candidate's strongest offset from its other offsets.
///
/// Per candidate clip the entry with the largest `ml` is primary; ties go to
/// the smaller `|offset_seconds|`, then the smaller `offset_seconds`.
pub fn split_repetitions(list: &MatchingList) -> (Vec<MatchEntry>, Vec<MatchEntry>) {
    let mut by_clip: BTreeMap<&str, Vec<&MatchEntry>> = BTreeMap::new();
    for e in &list.entries {
        by_clip.entry(e.clip_id.as_str()).or_default().push(e);
    }
    let mut primaries = Vec::new();
    let mut repetitions = Vec::new();
    for (_, mut entries) in by_clip {
        entries.sort_by(|a, b| {
            b.ml.cmp(&a.ml)
                .then(a.offset_seconds.abs().total_cmp(&b.offset_seconds.abs()))
                .then(a.offset_seconds.total_cmp(&b.offset_seconds))
        });
        let mut it = entries.into_iter();
        primaries.extend(it.next().cloned());
        repetitions.extend(it.cloned());
    }
    (primaries, repetitions)
}

/// Build the match graph from every clip's matching list.
///
/// Repetitions are dropped. With a filter, primaries it rejects are dropped
/// too. When both `q -> i` and `i -> q` survive, the entry with the larger
/// `ml` defines the edge pair (ties: smaller query id) and the disagreement
/// is recorded as a residual.
pub fn build_graph(lists: &[MatchingList], filter: Option<&dyn MatchFilter>) -> MatchGraph {
    let mut graph = MatchGraph::with_nodes(lists.iter().map(|l| l.query_id.clone()));

    let mut by_pair: HashMap<(String, String), Vec<MatchEntry>> = HashMap::new();
    for list in lists {
        let (primaries, _) = split_repetitions(list);
        for e in primaries {
            if e.query_id == e.clip_id {
                continue;
            }
            if filter.is_some_and(|f| !f.is_true_match(&e)) {
                continue;
            }
            let key = if e.query_id < e.clip_id {
                (e.query_id.clone(), e.clip_id.clone())
            } else {
                (e.clip_id.clone(), e.query_id.clone())
            };
            by_pair.entry(key).or_default().push(e);
        }
    }

    let mut pairs: Vec<_> = by_pair.into_iter().collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    for ((a, b), mut entries) in pairs {
        entries.sort_by(|x, y| y.ml.cmp(&x.ml).then(x.query_id.cmp(&y.query_id)));
        if entries.len() >= 2 {
            let w1 = -entries[0].offset_seconds;
            let w2 = -entries[1].offset_seconds;
            graph.residuals.push(MutualResidual {
                a,
                b,
                residual: (w1 + w2).abs(),
            });
        }
        graph.insert_pair(entries.swap_remove(0));
    }
    graph.finish();
    graph
}

/// A connected component of the match graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cluster {
    /// Smallest member id.
    pub id: String,
    /// Sorted member ids.
    pub members: Vec<String>,
}

/// Undirected connectivity over the graph; isolated nodes are singletons.
/// Output is sorted by cluster id.
pub fn connected_components(g: &MatchGraph) -> Vec<Cluster> {
    let position: HashMap<&str, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut uf = UnionFind::<usize>::new(g.nodes.len());
    for e in &g.edges {
        uf.union(position[e.from.as_str()], position[e.to.as_str()]);
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, n) in g.nodes.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(n.clone());
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|members| Cluster {
            id: members[0].clone(),
            members,
        })
        .collect();
    clusters.sort();
    clusters
}

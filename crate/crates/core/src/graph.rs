//! Immutable simple undirected graphs and connected-component analysis.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = usize;

/// Simple undirected graph stored as sorted adjacency lists.
///
/// Construction deduplicates edges given in either orientation and rejects
/// self-loops. Once built the graph never changes, so it can be shared freely
/// between concurrent readers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate and reversed pairs collapse
    /// into one edge.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange {
                        index: x,
                        node_count: n,
                    });
                }
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_raw_adjacency(adjacency))
    }

    /// Sorts and dedups every list. Callers guarantee symmetry and no loops.
    pub(crate) fn from_raw_adjacency(mut adjacency: Vec<Vec<NodeId>>) -> Self {
        let mut twice_m = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice_m += list.len();
        }
        debug_assert!(twice_m % 2 == 0);
        Graph {
            adjacency,
            edge_count: twice_m / 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Number of neighbors of `u`.
    pub fn degree(&self, u: NodeId) -> Result<usize> {
        self.check_node(u)?;
        Ok(self.adjacency[u].len())
    }

    /// Sorted neighbor list of `u`.
    ///
    /// Panics if `u` is out of range; use [`Graph::check_node`] first for
    /// untrusted input.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: u,
                node_count: self.node_count(),
            })
        }
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.iter().map(Vec::len)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.node_count() as f64
        }
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Subgraph on the same node set keeping only edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(NodeId, NodeId) -> bool) -> Graph {
        let mut adjacency = vec![Vec::new(); self.node_count()];
        for (u, v) in self.edges() {
            if keep(u, v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        Graph::from_raw_adjacency(adjacency)
    }
}

/// Component id for every node plus component sizes.
///
/// Components are numbered in order of their smallest node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub label: Vec<usize>,
    pub component_sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn largest_size(&self) -> usize {
        self.component_sizes.iter().copied().max().unwrap_or(0)
    }
}

pub fn connected_components(g: &Graph) -> ComponentLabeling {
    const UNSEEN: usize = usize::MAX;
    let n = g.node_count();
    let mut label = vec![UNSEEN; n];
    let mut component_sizes = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..n {
        if label[start] != UNSEEN {
            continue;
        }
        let id = component_sizes.len();
        label[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(u) {
                if label[v] == UNSEEN {
                    label[v] = id;
                    queue.push_back(v);
                }
            }
        }
        component_sizes.push(size);
    }

    ComponentLabeling {
        label,
        component_sizes,
    }
}

/// Induced subgraph on the largest connected component, relabeled densely in
/// increasing original-id order.
///
/// Returns the subgraph and a map from original node id to new id (`None` for
/// nodes outside the component). Ties between equally large components go to
/// the one containing the smallest node id.
pub fn largest_connected_component(g: &Graph) -> Result<(Graph, Vec<Option<NodeId>>)> {
    if g.is_empty() {
        return Err(Error::validation("graph has no nodes"));
    }
    let comps = connected_components(g);
    // Components are numbered by smallest member, so the first maximum wins ties.
    let best = comps
        .component_sizes
        .iter()
        .enumerate()
        .fold((0, 0), |acc, (id, &size)| if size > acc.1 { (id, size) } else { acc })
        .0;

    let mut mapping = vec![None; g.node_count()];
    let mut next = 0;
    for (u, &l) in comps.label.iter().enumerate() {
        if l == best {
            mapping[u] = Some(next);
            next += 1;
        }
    }

    let mut adjacency = vec![Vec::new(); next];
    for (u, slot) in mapping.iter().enumerate() {
        if let Some(nu) = *slot {
            adjacency[nu] = g
                .neighbors(u)
                .iter()
                .map(|&v| mapping[v].expect("neighbor shares component"))
                .collect();
        }
    }
    Ok((Graph::from_raw_adjacency(adjacency), mapping))
}

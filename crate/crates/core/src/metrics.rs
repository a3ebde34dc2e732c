//! Diversity measures of a coloring.

use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph};

/// All diversity statistics for one coloring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub f_d: f64,
    pub r_max: usize,
    pub defective_edge_count: usize,
    pub defective_component_sizes: Vec<usize>,
    pub max_defective_degree: usize,
}

pub fn defective_edge_count(g: &Graph, col: &Coloring) -> usize {
    g.edges().filter(|&(u, v)| col.get(u) == col.get(v)).count()
}

/// Defective edges over all edges; 0 for an edgeless graph.
pub fn fraction_defective(g: &Graph, col: &Coloring) -> f64 {
    match g.edge_count() {
        0 => 0.0,
        m => defective_edge_count(g, col) as f64 / m as f64,
    }
}

/// Same node set, only the edges whose endpoints share a color.
pub fn defective_subgraph(g: &Graph, col: &Coloring) -> Graph {
    g.filter_edges(|u, v| col.get(u) == col.get(v))
}

/// Node count of the largest color-induced component. Isolated nodes count
/// as components of size 1, so a proper coloring gives 1.
pub fn r_max(g: &Graph, col: &Coloring) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::validation("R_max is undefined for a graph with no nodes"));
    }
    col.check_fits(g)?;
    Ok(connected_components(&defective_subgraph(g, col)).largest_size())
}

pub fn max_defective_degree(g: &Graph, col: &Coloring) -> usize {
    (0..g.node_count())
        .map(|u| {
            let c = col.get(u);
            g.neighbors(u).iter().filter(|&&v| col.get(v) == c).count()
        })
        .max()
        .unwrap_or(0)
}

pub fn measure(g: &Graph, col: &Coloring) -> Result<MetricsRecord> {
    col.check_fits(g)?;
    let sub = defective_subgraph(g, col);
    let comps = connected_components(&sub);
    let r_max = comps.largest_size();
    if r_max == 0 {
        return Err(Error::validation("R_max is undefined for a graph with no nodes"));
    }
    let defective = sub.edge_count();
    Ok(MetricsRecord {
        f_d: match g.edge_count() {
            0 => 0.0,
            m => defective as f64 / m as f64,
        },
        r_max,
        defective_edge_count: defective,
        defective_component_sizes: comps.component_sizes,
        max_defective_degree: sub.max_degree(),
    })
}

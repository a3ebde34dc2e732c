//! Dynamic decentralized coloring (DDC) of complex networks.
//!
//! Nodes repeatedly recolor themselves to minimize a degree-weighted local
//! conflict index, using only the colors and degrees of their neighbors. The
//! crate bundles the coloring dynamics with random network generators,
//! diversity metrics (fraction of defective edges, largest color-induced
//! component) and a seeded experiment harness.

pub mod cli;
pub mod coloring;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metrics;

pub use coloring::{
    best_colors, candidate_lci, ddc_step, has_defect, lci, random_coloring, run_ddc, Color,
    Coloring, DdcConfig, DdcResult, Termination, WeightScheme,
};
pub use error::{Error, Result};
pub use generators::{gen_er, gen_powerlaw_config, gen_two_community, realize, GraphSpec};
pub use graph::{connected_components, largest_connected_component, ComponentLabeling, Graph, NodeId};
pub use metrics::{measure, MetricsRecord};

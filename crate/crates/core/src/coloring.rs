//! Local conflict index and the dynamic decentralized coloring process.
//!
//! The local conflict index of node `u` under coloring `C` is
//!
//! ```text
//! LCI(u) = Σ_{v ∈ N(u)} w_v · [C(u) == C(v)],    w_v = k_v^β
//! ```
//!
//! DDC starts from a uniformly random coloring and repeatedly picks a node at
//! random. A node without defective edges keeps its color; otherwise it moves
//! to a color minimizing its LCI, breaking ties uniformly at random.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{rng_from_seed, DdcRng};
use crate::graph::{Graph, NodeId};

pub type Color = usize;

/// One color in `[0, q)` per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<Color>,
    q: usize,
}

impl Coloring {
    pub fn new(colors: Vec<Color>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::validation("number of colors must be at least 1"));
        }
        if let Some((u, &c)) = colors.iter().enumerate().find(|(_, &c)| c >= q) {
            return Err(Error::validation(format!(
                "node {u} has color {c}, outside [0, {q})"
            )));
        }
        Ok(Coloring { colors, q })
    }

    /// Every node gets color 0.
    pub fn uniform(n: usize, q: usize) -> Result<Self> {
        Coloring::new(vec![0; n], q)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    #[inline]
    pub fn get(&self, u: NodeId) -> Color {
        self.colors[u]
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.colors
    }

    pub fn into_vec(self) -> Vec<Color> {
        self.colors
    }

    /// Overwrites the color of `u`. Panics if `c >= q`.
    pub fn set(&mut self, u: NodeId, c: Color) {
        assert!(c < self.q, "color {c} outside [0, {})", self.q);
        self.colors[u] = c;
    }

    pub(crate) fn check_fits(&self, g: &Graph) -> Result<()> {
        if self.len() == g.node_count() {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "coloring covers {} nodes but graph has {}",
                self.len(),
                g.node_count()
            )))
        }
    }
}

/// I.i.d. uniform colors.
pub fn random_coloring(n: usize, q: usize, seed: u64) -> Result<Coloring> {
    random_coloring_with(n, q, &mut rng_from_seed(seed))
}

pub(crate) fn random_coloring_with(n: usize, q: usize, rng: &mut impl Rng) -> Result<Coloring> {
    if q == 0 {
        return Err(Error::validation("number of colors must be at least 1"));
    }
    let colors = (0..n).map(|_| rng.gen_range(0..q)).collect();
    Ok(Coloring { colors, q })
}

/// Degree-bias weights `w_v = k_v^β`.
///
/// Isolated nodes store weight 0: they are nobody's neighbor, so the value
/// never enters a sum, and `0^β` would be infinite for negative β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    beta: f64,
    weights: Vec<f64>,
}

impl WeightScheme {
    pub fn new(g: &Graph, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::validation(format!("beta = {beta} is not finite")));
        }
        let weights = g
            .degrees()
            .map(|k| match k {
                0 => 0.0,
                _ if beta == 0.0 => 1.0,
                _ => (k as f64).powf(beta),
            })
            .collect();
        Ok(WeightScheme { beta, weights })
    }

    /// Arbitrary positive per-node weights. Used to check scale invariance.
    pub fn from_weights(beta: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::validation("weights must be finite and non-negative"));
        }
        Ok(WeightScheme { beta, weights })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn weight(&self, v: NodeId) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether every neighbor contributes exactly 1, which lets candidate
    /// values be compared exactly.
    fn is_unit(&self) -> bool {
        self.beta == 0.0
    }

    fn check_fits(&self, g: &Graph) -> Result<()> {
        if self.weights.len() == g.node_count() {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "weight scheme covers {} nodes but graph has {}",
                self.weights.len(),
                g.node_count()
            )))
        }
    }
}

/// Float tie rule for candidate LCI values.
#[inline]
pub fn lci_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * 1f64.max(a.abs()).max(b.abs())
}

/// LCI of `u` if it were recolored to `c`.
pub fn candidate_lci(g: &Graph, col: &Coloring, w: &WeightScheme, u: NodeId, c: Color) -> Result<f64> {
    g.check_node(u)?;
    if c >= col.q() {
        return Err(Error::validation(format!("color {c} outside [0, {})", col.q())));
    }
    Ok(g.neighbors(u)
        .iter()
        .filter(|&&v| col.get(v) == c)
        .map(|&v| w.weight(v))
        .sum())
}

/// LCI of `u` under its current color.
pub fn lci(g: &Graph, col: &Coloring, w: &WeightScheme, u: NodeId) -> Result<f64> {
    g.check_node(u)?;
    candidate_lci(g, col, w, u, col.get(u))
}

/// Whether `u` has a neighbor of its own color.
pub fn has_defect(g: &Graph, col: &Coloring, u: NodeId) -> Result<bool> {
    g.check_node(u)?;
    Ok(has_defect_unchecked(g, col, u))
}

#[inline]
fn has_defect_unchecked(g: &Graph, col: &Coloring, u: NodeId) -> bool {
    let c = col.get(u);
    g.neighbors(u).iter().any(|&v| col.get(v) == c)
}

/// Colors minimizing the LCI of `u`, in increasing order.
pub fn best_colors(g: &Graph, col: &Coloring, w: &WeightScheme, u: NodeId) -> Result<Vec<Color>> {
    g.check_node(u)?;
    let mut scratch = Scratch::new(col.q());
    scratch.fill_minimizers(g, col, w, u);
    Ok(scratch.minimizers)
}

/// Reusable per-run buffers for candidate evaluation.
struct Scratch {
    sums: Vec<f64>,
    counts: Vec<u32>,
    minimizers: Vec<Color>,
}

impl Scratch {
    fn new(q: usize) -> Self {
        Scratch {
            sums: vec![0.0; q],
            counts: vec![0; q],
            minimizers: Vec::with_capacity(q),
        }
    }

    /// Fills `counts` with the number of neighbors of each color and `sums`
    /// with the weighted LCI of each candidate color.
    fn tally(&mut self, g: &Graph, col: &Coloring, w: &WeightScheme, u: NodeId) {
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.counts.iter_mut().for_each(|c| *c = 0);
        for &v in g.neighbors(u) {
            let c = col.get(v);
            self.counts[c] += 1;
            self.sums[c] += w.weight(v);
        }
    }

    fn fill_minimizers(&mut self, g: &Graph, col: &Coloring, w: &WeightScheme, u: NodeId) {
        self.tally(g, col, w, u);
        self.minimizers.clear();

        // Zero-conflict colors are exactly the ones no neighbor uses.
        if self.counts.iter().any(|&k| k == 0) {
            self.minimizers
                .extend((0..self.counts.len()).filter(|&c| self.counts[c] == 0));
            return;
        }

        if w.is_unit() {
            let best = *self.counts.iter().min().expect("q >= 1");
            self.minimizers
                .extend((0..self.counts.len()).filter(|&c| self.counts[c] == best));
        } else {
            let best = self.sums.iter().copied().fold(f64::INFINITY, f64::min);
            self.minimizers
                .extend((0..self.sums.len()).filter(|&c| lci_tied(self.sums[c], best)));
        }
    }
}

/// One DDC update at node `u`. Returns whether the stored color changed.
pub fn ddc_step(
    g: &Graph,
    col: &mut Coloring,
    w: &WeightScheme,
    u: NodeId,
    rng: &mut impl Rng,
) -> Result<bool> {
    g.check_node(u)?;
    col.check_fits(g)?;
    w.check_fits(g)?;
    let mut scratch = Scratch::new(col.q());
    Ok(step_with(&mut scratch, g, col, w, u, rng).is_some())
}

/// Returns `(old, new)` when the color of `u` changed.
#[inline]
fn step_with(
    scratch: &mut Scratch,
    g: &Graph,
    col: &mut Coloring,
    w: &WeightScheme,
    u: NodeId,
    rng: &mut impl Rng,
) -> Option<(Color, Color)> {
    if !has_defect_unchecked(g, col, u) {
        return None;
    }
    scratch.fill_minimizers(g, col, w, u);
    let choice = match scratch.minimizers.len() {
        1 => scratch.minimizers[0],
        k => scratch.minimizers[rng.gen_range(0..k)],
    };
    let old = col.get(u);
    if choice == old {
        None
    } else {
        col.colors[u] = choice;
        Some((old, choice))
    }
}

/// Parameters of one DDC run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdcConfig {
    pub q: usize,
    pub beta: f64,
    pub seed: u64,
    #[serde(default = "DdcConfig::default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "DdcConfig::default_patience")]
    pub patience_sweeps: usize,
    #[serde(default)]
    pub record_trajectory: bool,
}

impl DdcConfig {
    pub const DEFAULT_MAX_SWEEPS: usize = 1000;
    pub const DEFAULT_PATIENCE: usize = 50;

    pub fn new(q: usize, beta: f64, seed: u64) -> Self {
        DdcConfig {
            q,
            beta,
            seed,
            max_sweeps: Self::DEFAULT_MAX_SWEEPS,
            patience_sweeps: Self::DEFAULT_PATIENCE,
            record_trajectory: false,
        }
    }

    fn default_max_sweeps() -> usize {
        Self::DEFAULT_MAX_SWEEPS
    }

    fn default_patience() -> usize {
        Self::DEFAULT_PATIENCE
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::validation("q must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::validation("max_sweeps must be at least 1"));
        }
        if self.patience_sweeps == 0 {
            return Err(Error::validation("patience_sweeps must be at least 1"));
        }
        if !self.beta.is_finite() {
            return Err(Error::validation("beta must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// No defective edge left.
    Proper,
    /// f_d stopped improving for `patience_sweeps` sweeps.
    Patience,
    MaxSweeps,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Proper => "proper",
            Termination::Patience => "patience",
            Termination::MaxSweeps => "max_sweeps",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proper" => Ok(Termination::Proper),
            "patience" => Ok(Termination::Patience),
            "max_sweeps" => Ok(Termination::MaxSweeps),
            other => Err(Error::validation(format!("unknown termination {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdcResult {
    pub final_coloring: Coloring,
    pub sweeps_run: usize,
    /// Selections that changed a node's color.
    pub updates_applied: u64,
    /// `(sweep, f_d)` after each completed sweep, starting with sweep 0 for
    /// the initial random coloring.
    pub trajectory: Option<Vec<(usize, f64)>>,
    pub terminated_by: Termination,
    pub defective_edges: usize,
}

impl DdcResult {
    pub fn fraction_defective(&self, g: &Graph) -> f64 {
        fraction(self.defective_edges, g.edge_count())
    }
}

fn fraction(defective: usize, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else {
        defective as f64 / m as f64
    }
}

fn count_defective(g: &Graph, col: &Coloring) -> usize {
    g.edges().filter(|&(u, v)| col.get(u) == col.get(v)).count()
}

/// Runs DDC from a random initial coloring until the coloring is proper, f_d
/// stalls for `patience_sweeps` sweeps, or `max_sweeps` sweeps have run. A
/// sweep is `n` node selections drawn uniformly with replacement.
///
/// The initial coloring equals `random_coloring(n, q, seed)`; node selection
/// continues on the same random stream.
pub fn run_ddc(g: &Graph, cfg: &DdcConfig) -> Result<DdcResult> {
    cfg.validate()?;
    let n = g.node_count();
    let m = g.edge_count();
    let weights = WeightScheme::new(g, cfg.beta)?;
    let mut rng: DdcRng = rng_from_seed(cfg.seed);
    let mut col = random_coloring_with(n, cfg.q, &mut rng)?;
    let mut scratch = Scratch::new(cfg.q);

    let mut defective = count_defective(g, &col);
    let mut trajectory = cfg
        .record_trajectory
        .then(|| vec![(0, fraction(defective, m))]);
    let mut best = defective;
    let mut stale = 0;
    let mut sweeps = 0;
    let mut updates = 0u64;

    let terminated_by = loop {
        if defective == 0 {
            break Termination::Proper;
        }
        if stale >= cfg.patience_sweeps {
            break Termination::Patience;
        }
        if sweeps >= cfg.max_sweeps {
            break Termination::MaxSweeps;
        }
        for _ in 0..n {
            let u = rng.gen_range(0..n);
            if let Some((old, new)) = step_with(&mut scratch, g, &mut col, &weights, u, &mut rng) {
                updates += 1;
                // `scratch.counts` still holds neighbor color counts for `u`.
                defective = defective + scratch.counts[new] as usize - scratch.counts[old] as usize;
            }
        }
        sweeps += 1;
        if let Some(t) = trajectory.as_mut() {
            t.push((sweeps, fraction(defective, m)));
        }
        if defective < best {
            best = defective;
            stale = 0;
        } else {
            stale += 1;
        }
    };
    debug_assert_eq!(defective, count_defective(g, &col));

    Ok(DdcResult {
        final_coloring: col,
        sweeps_run: sweeps,
        updates_applied: updates,
        trajectory,
        terminated_by,
        defective_edges: defective,
    })
}

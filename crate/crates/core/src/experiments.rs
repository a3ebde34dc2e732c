//! Seeded batch experiments: parameter sweeps, β search and convergence
//! profiles.
//!
//! Every cell `(scheme, q, beta, run)` draws its coloring seed from a pure
//! function of the base seed and the cell coordinates, so results do not
//! depend on worker count or execution order. Graph realizations depend only
//! on `(base_seed, run)`, which pairs the schemes and β values of one run on
//! the same network.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{random_coloring, run_ddc, DdcConfig, Termination};
use crate::error::{Error, Result};
use crate::generators::{realize, GraphSpec};
use crate::graph::Graph;
use crate::metrics::measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Uniform random coloring, no dynamics.
    Random,
    Ddc,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::Ddc => "ddc",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Scheme::Random => 1,
            Scheme::Ddc => 2,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Scheme::Random),
            "ddc" => Ok(Scheme::Ddc),
            other => Err(Error::validation(format!("unknown scheme {other:?}"))),
        }
    }
}

/// DDC termination and parallelism knobs shared by all experiment entry points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub max_sweeps: usize,
    pub patience_sweeps: usize,
    /// Worker threads; 0 uses the rayon default.
    #[serde(default)]
    pub workers: usize,
    /// Draw a fresh graph for every run index. `None` means: fresh for random
    /// models, fixed for file inputs.
    #[serde(default)]
    pub regenerate_graph_per_run: Option<bool>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            max_sweeps: DdcConfig::DEFAULT_MAX_SWEEPS,
            patience_sweeps: DdcConfig::DEFAULT_PATIENCE,
            workers: 0,
            regenerate_graph_per_run: None,
        }
    }
}

impl RunSettings {
    fn regenerate(&self, spec: &GraphSpec) -> bool {
        self.regenerate_graph_per_run.unwrap_or_else(|| spec.is_random())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub graph_spec: GraphSpec,
    pub q_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub runs_per_point: usize,
    pub base_seed: u64,
    #[serde(flatten)]
    pub settings: RunSettings,
}

impl SweepSpec {
    pub const DEFAULT_RUNS: usize = 150;

    pub fn new(graph_spec: GraphSpec) -> Self {
        SweepSpec {
            graph_spec,
            q_values: vec![3],
            beta_values: vec![0.0],
            schemes: vec![Scheme::Ddc],
            runs_per_point: Self::DEFAULT_RUNS,
            base_seed: 0,
            settings: RunSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point == 0 {
            return Err(Error::validation("runs_per_point must be at least 1"));
        }
        if self.q_values.is_empty() || self.beta_values.is_empty() || self.schemes.is_empty() {
            return Err(Error::validation("q, beta and scheme lists must be nonempty"));
        }
        if self.q_values.contains(&0) {
            return Err(Error::validation("q must be at least 1"));
        }
        if self.beta_values.iter().any(|b| !b.is_finite()) {
            return Err(Error::validation("beta values must be finite"));
        }
        if self.settings.max_sweeps == 0 || self.settings.patience_sweeps == 0 {
            return Err(Error::validation("max_sweeps and patience_sweeps must be at least 1"));
        }
        self.graph_spec.validate()
    }
}

/// One colored run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub q: usize,
    /// `None` for random coloring, which has no β.
    pub beta: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub f_d: f64,
    pub r_max: usize,
    pub defective_edges: usize,
    pub max_defective_degree: usize,
    pub sweeps: usize,
    pub terminated_by: Option<Termination>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Cells dropped because their graph could not be generated.
    pub skipped: usize,
    pub diagnostics: Vec<String>,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base` with SplitMix64.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

const GRAPH_TAG: u64 = 0x6772_6170_68;

fn graph_seed(base: u64, run: usize) -> u64 {
    derive_seed(base, &[GRAPH_TAG, run as u64])
}

/// Seed of one sweep cell. `beta` is ignored for random coloring.
pub fn cell_seed(base: u64, scheme: Scheme, q: usize, beta: Option<f64>, run: usize) -> u64 {
    let beta_bits = beta.map_or(0, |b| (b + 0.0).to_bits());
    derive_seed(base, &[scheme.tag(), q as u64, beta_bits, run as u64])
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    scheme: Scheme,
    q: usize,
    beta: Option<f64>,
    run: usize,
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

type GraphSlots = Vec<std::result::Result<Arc<Graph>, String>>;

/// Realizes one graph per run index, or a single shared graph.
fn realize_graphs(spec: &GraphSpec, base_seed: u64, runs: usize, regenerate: bool) -> GraphSlots {
    let count = if regenerate { runs } else { 1 };
    (0..count)
        .into_par_iter()
        .map(|run| {
            realize(spec, graph_seed(base_seed, run))
                .map(Arc::new)
                .map_err(|e| format!("run {run}: {e}"))
        })
        .collect()
}

fn graph_for(slots: &GraphSlots, run: usize) -> &std::result::Result<Arc<Graph>, String> {
    if slots.len() == 1 {
        &slots[0]
    } else {
        &slots[run]
    }
}

fn color_cell(g: &Graph, cell: Cell, seed: u64, settings: &RunSettings) -> Result<SweepRow> {
    let (coloring, sweeps, terminated_by) = match cell.scheme {
        Scheme::Random => (random_coloring(g.node_count(), cell.q, seed)?, 0, None),
        Scheme::Ddc => {
            let cfg = DdcConfig {
                q: cell.q,
                beta: cell.beta.unwrap_or(0.0),
                seed,
                max_sweeps: settings.max_sweeps,
                patience_sweeps: settings.patience_sweeps,
                record_trajectory: false,
            };
            let r = run_ddc(g, &cfg)?;
            (r.final_coloring, r.sweeps_run, Some(r.terminated_by))
        }
    };
    let m = measure(g, &coloring)?;
    Ok(SweepRow {
        scheme: cell.scheme,
        q: cell.q,
        beta: cell.beta,
        run: cell.run,
        seed,
        f_d: m.f_d,
        r_max: m.r_max,
        defective_edges: m.defective_edge_count,
        max_defective_degree: m.max_defective_degree,
        sweeps,
        terminated_by,
    })
}

/// Runs every `(scheme, q, beta, run)` cell and returns rows in canonical
/// order: scheme, then q, then β (as listed), then run. Random coloring
/// emits one row per `(q, run)` with no β.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();

    let mut cells = Vec::new();
    for &scheme in &schemes {
        for &q in &spec.q_values {
            let betas: Vec<Option<f64>> = match scheme {
                Scheme::Random => vec![None],
                Scheme::Ddc => spec.beta_values.iter().map(|&b| Some(b)).collect(),
            };
            for beta in betas {
                for run in 0..spec.runs_per_point {
                    cells.push(Cell { scheme, q, beta, run });
                }
            }
        }
    }

    let regenerate = spec.settings.regenerate(&spec.graph_spec);
    let settings = &spec.settings;
    let results: Vec<std::result::Result<SweepRow, String>> = with_pool(settings.workers, || {
        let graphs = realize_graphs(&spec.graph_spec, spec.base_seed, spec.runs_per_point, regenerate);
        cells
            .par_iter()
            .map(|&cell| {
                let g = graph_for(&graphs, cell.run).as_ref().map_err(Clone::clone)?;
                let seed = cell_seed(spec.base_seed, cell.scheme, cell.q, cell.beta, cell.run);
                color_cell(g, cell, seed, settings).map_err(|e| e.to_string())
            })
            .collect()
    })?;

    let mut outcome = SweepOutcome::default();
    for r in results {
        match r {
            Ok(row) => outcome.rows.push(row),
            Err(msg) => {
                outcome.skipped += 1;
                if !outcome.diagnostics.contains(&msg) {
                    outcome.diagnostics.push(msg);
                }
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "f_d")]
    FractionDefective,
    #[serde(rename = "r_max")]
    RMax,
}

impl Objective {
    fn of(self, row: &SweepRow) -> f64 {
        match self {
            Objective::FractionDefective => row.f_d,
            Objective::RMax => row.r_max as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSearchResult {
    pub q: usize,
    pub beta_star: f64,
    pub objective: Objective,
    /// `(beta, mean objective)` for every grid point.
    pub grid: Vec<(f64, f64)>,
}

pub const BETA_MIN: f64 = -2.0;
pub const BETA_MAX: f64 = 2.0;
pub const DEFAULT_BETA_STEP: f64 = 0.1;

/// Closed grid `{-2, -2 + step, ..., 2}`, values rounded to 12 decimals so
/// that accumulated float error does not produce `0.30000000000000004`.
pub fn beta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::validation(format!("grid step {step} must be positive")));
    }
    let points = ((BETA_MAX - BETA_MIN) / step + 1e-9).floor() as usize + 1;
    Ok((0..points)
        .map(|i| {
            let b = BETA_MIN + i as f64 * step;
            (b * 1e12).round() / 1e12 + 0.0
        })
        .collect())
}

/// Grid search for the β minimizing the mean objective over `runs` DDC runs.
/// Ties go to the smallest β.
pub fn find_optimal_beta(
    graph_spec: &GraphSpec,
    q: usize,
    grid_step: f64,
    runs: usize,
    objective: Objective,
    seed: u64,
    settings: &RunSettings,
) -> Result<BetaSearchResult> {
    let betas = beta_grid(grid_step)?;
    let spec = SweepSpec {
        graph_spec: graph_spec.clone(),
        q_values: vec![q],
        beta_values: betas.clone(),
        schemes: vec![Scheme::Ddc],
        runs_per_point: runs,
        base_seed: seed,
        settings: settings.clone(),
    };
    let outcome = run_sweep(&spec)?;
    if outcome.rows.is_empty() {
        return Err(Error::Generation(outcome.diagnostics.join("; ")));
    }

    let grid: Vec<(f64, f64)> = betas
        .iter()
        .map(|&b| {
            let vals: Vec<f64> = outcome
                .rows
                .iter()
                .filter(|r| r.beta == Some(b))
                .map(|r| objective.of(r))
                .collect();
            (b, mean(&vals))
        })
        .collect();
    let (beta_star, _) = grid
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, (b, v)| if v < best.1 { (b, v) } else { best });

    Ok(BetaSearchResult {
        q,
        beta_star,
        objective,
        grid,
    })
}

/// Mean f_d per sweep index across `runs` DDC runs. Runs that stop early
/// contribute their terminal f_d to later sweeps.
pub fn convergence_profile(
    graph_spec: &GraphSpec,
    q: usize,
    beta: f64,
    runs: usize,
    seed: u64,
    settings: &RunSettings,
) -> Result<Vec<(usize, f64)>> {
    if runs == 0 {
        return Err(Error::validation("runs must be at least 1"));
    }
    graph_spec.validate()?;
    let regenerate = settings.regenerate(graph_spec);
    let trajectories: Vec<Result<Vec<f64>>> = with_pool(settings.workers, || {
        let graphs = realize_graphs(graph_spec, seed, runs, regenerate);
        (0..runs)
            .into_par_iter()
            .map(|run| {
                let g = graph_for(&graphs, run).as_ref().map_err(|e| Error::Generation(e.clone()))?;
                let cfg = DdcConfig {
                    q,
                    beta,
                    seed: cell_seed(seed, Scheme::Ddc, q, Some(beta), run),
                    max_sweeps: settings.max_sweeps,
                    patience_sweeps: settings.patience_sweeps,
                    record_trajectory: true,
                };
                let r = run_ddc(g, &cfg)?;
                Ok(r.trajectory.unwrap_or_default().into_iter().map(|(_, f)| f).collect())
            })
            .collect()
    })?;
    let trajectories = trajectories.into_iter().collect::<Result<Vec<_>>>()?;

    let len = trajectories.iter().map(Vec::len).max().unwrap_or(0);
    Ok((0..len)
        .map(|sweep| {
            let total: f64 = trajectories
                .iter()
                .map(|t| t.get(sweep).or(t.last()).copied().unwrap_or(0.0))
                .sum();
            (sweep, total / trajectories.len() as f64)
        })
        .collect())
}

/// Mean and standard error of f_d and R_max at one `(scheme, q, beta)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub scheme: Scheme,
    pub q: usize,
    pub beta: Option<f64>,
    pub runs: usize,
    pub mean_f_d: f64,
    pub stderr_f_d: f64,
    pub mean_r_max: f64,
    pub stderr_r_max: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Standard error of the mean with the n-1 sample variance; 0 for one value.
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Groups rows by `(scheme, q, beta)`, sorted by those keys.
pub fn summarize(rows: &[SweepRow]) -> Vec<PointSummary> {
    let mut groups: HashMap<(Scheme, usize, Option<u64>), Vec<&SweepRow>> = HashMap::new();
    for r in rows {
        groups
            .entry((r.scheme, r.q, r.beta.map(f64::to_bits)))
            .or_default()
            .push(r);
    }
    let mut out: Vec<PointSummary> = groups
        .into_iter()
        .map(|((scheme, q, beta), rs)| {
            let f: Vec<f64> = rs.iter().map(|r| r.f_d).collect();
            let rm: Vec<f64> = rs.iter().map(|r| r.r_max as f64).collect();
            PointSummary {
                scheme,
                q,
                beta: beta.map(f64::from_bits),
                runs: rs.len(),
                mean_f_d: mean(&f),
                stderr_f_d: std_error(&f),
                mean_r_max: mean(&rm),
                stderr_r_max: std_error(&rm),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.scheme, a.q)
            .cmp(&(b.scheme, b.q))
            .then_with(|| {
                a.beta
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&b.beta.unwrap_or(f64::NEG_INFINITY))
            })
    });
    out
}

//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::coloring::{run_ddc, DdcConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    beta_grid, convergence_profile, find_optimal_beta, run_sweep, summarize, Objective, RunSettings,
    Scheme, SweepOutcome, SweepRow, SweepSpec, DEFAULT_BETA_STEP,
};
use crate::generators::{realize, GraphSpec};
use crate::io::{self, format_sig9, LoadOptions, RowFormat, RunManifest};
use crate::metrics::measure;

#[derive(Debug, Parser)]
#[command(name = "ddc", version, about = "Dynamic decentralized coloring of complex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a network and write it as an edge list.
    Generate {
        #[command(flatten)]
        graph: GraphArgs,
        /// Seed for graph generation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output edge-list path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Color one network with DDC and print its diversity metrics.
    Color {
        #[command(flatten)]
        graph: GraphArgs,
        /// Number of colors.
        #[arg(long)]
        q: usize,
        /// Weight exponent: neighbor v counts k_v^β.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Write the final coloring here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute diversity metrics of a coloring file on an edge-list graph.
    Metrics {
        /// Edge-list file (largest connected component unless --full-graph).
        #[arg(long)]
        graph: PathBuf,
        /// Coloring file: one `node color` pair per line.
        #[arg(long)]
        coloring: PathBuf,
        /// Keep every node instead of only the largest connected component.
        #[arg(long)]
        full_graph: bool,
        /// Write the metrics JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// f_d and R_max as functions of β at fixed color counts.
    SweepBeta {
        #[command(flatten)]
        graph: GraphArgs,
        /// Color counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
        /// β grid spacing over [-2, 2]; ignored when --betas is given.
        #[arg(long, default_value_t = DEFAULT_BETA_STEP)]
        beta_step: f64,
        /// Explicit comma-separated β values instead of a grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        betas: Vec<f64>,
        /// Independent runs per (q, β) point.
        #[arg(long, default_value_t = SweepSpec::DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Random coloring versus DDC across color counts.
    SweepColors {
        #[command(flatten)]
        graph: GraphArgs,
        /// Color counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
        /// β values for DDC rows.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
        betas: Vec<f64>,
        /// Also run DDC at the per-q optimal β found by grid search.
        #[arg(long)]
        optimal_beta: bool,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::FD)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = DEFAULT_BETA_STEP)]
        beta_step: f64,
        /// Runs per grid point during the β search (defaults to --runs).
        #[arg(long)]
        search_runs: Option<usize>,
        /// Independent runs per point.
        #[arg(long, default_value_t = SweepSpec::DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// DDC on two-community networks while varying p_in at fixed p_in + p_out.
    SweepCommunity {
        /// Number of nodes.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Fixed p_in + p_out.
        #[arg(long, default_value_t = 0.02)]
        p_sum: f64,
        /// Within-community edge probabilities, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        p_in: Vec<f64>,
        /// Color counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
        /// β values, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
        betas: Vec<f64>,
        /// Independent runs per point.
        #[arg(long, default_value_t = SweepSpec::DEFAULT_RUNS)]
        runs: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mean f_d after each sweep, averaged over runs.
    Profile {
        #[command(flatten)]
        graph: GraphArgs,
        /// Number of colors.
        #[arg(long)]
        q: usize,
        /// Weight exponent: neighbor v counts k_v^β.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        /// Runs to average.
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// Erdős–Rényi network.
    #[arg(long, num_args = 2, value_names = ["N", "P"])]
    er: Option<Vec<String>>,
    /// Scale-free configuration-model network.
    #[arg(long, num_args = 3, value_names = ["N", "GAMMA", "K_MIN"])]
    sf: Option<Vec<String>>,
    /// Two-community network.
    #[arg(long, num_args = 3, value_names = ["N", "P_IN", "P_OUT"])]
    two_community: Option<Vec<String>>,
    /// Edge-list file.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    source: GraphSource,
    /// With --graph: keep every node instead of the largest connected component.
    #[arg(long)]
    full_graph: bool,
    /// Draw one graph per run (default) or share one realization.
    #[arg(long)]
    fixed_graph: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Base seed; every run derives its own seeds from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DdcConfig::DEFAULT_MAX_SWEEPS)]
    max_sweeps: usize,
    #[arg(long, default_value_t = DdcConfig::DEFAULT_PATIENCE)]
    patience: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output path (stdout if omitted). A `.manifest.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for RowFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => RowFormat::Csv,
            FormatArg::Json => RowFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    #[value(name = "f_d")]
    FD,
    #[value(name = "r_max")]
    RMax,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::FD => Objective::FractionDefective,
            ObjectiveArg::RMax => Objective::RMax,
        }
    }
}

fn parse_num<T: std::str::FromStr>(flag: &str, what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::validation(format!("--{flag}: {what} {s:?} is not a valid number")))
}

impl GraphArgs {
    fn spec(&self) -> Result<GraphSpec> {
        let s = &self.source;
        let spec = if let Some(v) = &s.er {
            GraphSpec::Er {
                n: parse_num("er", "N", &v[0])?,
                p: parse_num("er", "P", &v[1])?,
            }
        } else if let Some(v) = &s.sf {
            GraphSpec::Sf {
                n: parse_num("sf", "N", &v[0])?,
                gamma: parse_num("sf", "GAMMA", &v[1])?,
                k_min: parse_num("sf", "K_MIN", &v[2])?,
            }
        } else if let Some(v) = &s.two_community {
            GraphSpec::TwoCommunity {
                n: parse_num("two-community", "N", &v[0])?,
                p_in: parse_num("two-community", "P_IN", &v[1])?,
                p_out: parse_num("two-community", "P_OUT", &v[2])?,
            }
        } else if let Some(path) = &s.graph {
            GraphSpec::File {
                path: path.clone(),
                take_largest_component: !self.full_graph,
            }
        } else {
            unreachable!("clap enforces one graph source")
        };
        spec.validate()?;
        Ok(spec)
    }

    fn regenerate(&self) -> Option<bool> {
        self.fixed_graph.then_some(false)
    }
}

impl RunArgs {
    fn settings(&self, regenerate: Option<bool>) -> RunSettings {
        RunSettings {
            max_sweeps: self.max_sweeps,
            patience_sweeps: self.patience,
            workers: self.workers,
            regenerate_graph_per_run: regenerate,
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let echo: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, echo) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command, argv: Vec<String>) -> Result<()> {
    match command {
        Command::Generate { graph, seed, out } => {
            let g = realize(&graph.spec()?, seed)?;
            match out {
                Some(path) => io::write_edge_list(&g, path),
                None => io::write_edge_list_to(&g, std::io::stdout().lock())
                    .map_err(|e| Error::io("<stdout>", e)),
            }
        }
        Command::Color {
            graph,
            q,
            beta,
            run,
            out,
        } => {
            let g = realize(&graph.spec()?, run.seed)?;
            let cfg = DdcConfig {
                q,
                beta,
                seed: run.seed,
                max_sweeps: run.max_sweeps,
                patience_sweeps: run.patience,
                record_trajectory: false,
            };
            let result = run_ddc(&g, &cfg)?;
            let m = measure(&g, &result.final_coloring)?;
            if let Some(path) = &out {
                io::write_coloring(&result.final_coloring, path)?;
            }
            let report = json!({
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "q": q,
                "beta": beta,
                "seed": run.seed,
                "f_d": m.f_d,
                "r_max": m.r_max,
                "defective_edges": m.defective_edge_count,
                "defective_components": m.defective_component_sizes.len(),
                "max_defective_degree": m.max_defective_degree,
                "k_max_over_q": g.max_degree() as f64 / q as f64,
                "sweeps": result.sweeps_run,
                "updates": result.updates_applied,
                "terminated_by": result.terminated_by,
            });
            print_json(&report)
        }
        Command::Metrics {
            graph,
            coloring,
            full_graph,
            out,
        } => {
            let opts = LoadOptions {
                take_largest_component: !full_graph,
                ..LoadOptions::default()
            };
            let g = io::load_edge_list(&graph, &opts)?.graph;
            let col = io::read_coloring(&coloring)?;
            let record = measure(&g, &col)?;
            match out {
                Some(path) => write_json_file(&path, &record),
                None => print_json(&record),
            }
        }
        Command::SweepBeta {
            graph,
            q,
            beta_step,
            betas,
            runs,
            run,
            output,
        } => {
            let beta_values = if betas.is_empty() { beta_grid(beta_step)? } else { betas };
            let spec = SweepSpec {
                graph_spec: graph.spec()?,
                q_values: q,
                beta_values,
                schemes: vec![Scheme::Ddc],
                runs_per_point: runs,
                base_seed: run.seed,
                settings: run.settings(graph.regenerate()),
            };
            let outcome = run_sweep(&spec)?;
            report_skips(&outcome);
            emit_rows(&outcome.rows, &output, "sweep-beta", argv, run.seed, serde_json::to_value(&spec)?)
        }
        Command::SweepColors {
            graph,
            q,
            betas,
            optimal_beta,
            objective,
            beta_step,
            search_runs,
            runs,
            run,
            output,
        } => {
            let settings = run.settings(graph.regenerate());
            let spec = SweepSpec {
                graph_spec: graph.spec()?,
                q_values: q.clone(),
                beta_values: betas.clone(),
                schemes: vec![Scheme::Random, Scheme::Ddc],
                runs_per_point: runs,
                base_seed: run.seed,
                settings: settings.clone(),
            };
            let mut outcome = run_sweep(&spec)?;
            let mut optima = Vec::new();
            if optimal_beta {
                for &qv in &q {
                    let search = find_optimal_beta(
                        &spec.graph_spec,
                        qv,
                        beta_step,
                        search_runs.unwrap_or(runs),
                        objective.into(),
                        run.seed,
                        &settings,
                    )?;
                    eprintln!("q = {qv}: optimal beta = {}", format_sig9(search.beta_star));
                    if !betas.contains(&search.beta_star) {
                        let extra = run_sweep(&SweepSpec {
                            q_values: vec![qv],
                            beta_values: vec![search.beta_star],
                            schemes: vec![Scheme::Ddc],
                            ..spec.clone()
                        })?;
                        outcome.rows.extend(extra.rows);
                        outcome.skipped += extra.skipped;
                    }
                    optima.push(search);
                }
            }
            report_skips(&outcome);
            let config = json!({ "sweep": spec, "optimal_beta": optima });
            emit_rows(&outcome.rows, &output, "sweep-colors", argv, run.seed, config)
        }
        Command::SweepCommunity {
            n,
            p_sum,
            p_in,
            q,
            betas,
            runs,
            run,
            output,
        } => {
            let mut labeled = Vec::new();
            let mut specs = Vec::new();
            for &pin in &p_in {
                let p_out = p_sum - pin;
                let spec = SweepSpec {
                    graph_spec: GraphSpec::TwoCommunity { n, p_in: pin, p_out },
                    q_values: q.clone(),
                    beta_values: betas.clone(),
                    schemes: vec![Scheme::Ddc],
                    runs_per_point: runs,
                    base_seed: run.seed,
                    settings: run.settings(None),
                };
                let outcome = run_sweep(&spec)?;
                report_skips(&outcome);
                labeled.extend(outcome.rows.into_iter().map(|r| (pin, r)));
                specs.push(spec);
            }
            let mut buf = Vec::new();
            write_community_rows(&labeled, output.format.into(), &mut buf)?;
            emit_bytes(&buf, &output, "sweep-community", argv, run.seed, serde_json::to_value(&specs)?)
        }
        Command::Profile {
            graph,
            q,
            beta,
            runs,
            run,
            output,
        } => {
            let spec = graph.spec()?;
            let settings = run.settings(graph.regenerate());
            let profile = convergence_profile(&spec, q, beta, runs, run.seed, &settings)?;
            let mut buf = Vec::new();
            match output.format {
                FormatArg::Csv => {
                    writeln!(buf, "sweep,mean_f_d").expect("vec write");
                    for (s, f) in &profile {
                        writeln!(buf, "{s},{}", format_sig9(*f)).expect("vec write");
                    }
                }
                FormatArg::Json => {
                    let rows: Vec<_> = profile
                        .iter()
                        .map(|(s, f)| json!({ "sweep": s, "mean_f_d": f }))
                        .collect();
                    serde_json::to_writer_pretty(&mut buf, &rows)?;
                    buf.push(b'\n');
                }
            }
            let config = json!({ "graph": spec, "q": q, "beta": beta, "runs": runs, "settings": settings });
            emit_bytes(&buf, &output, "profile", argv, run.seed, config)
        }
    }
}

#[derive(Serialize)]
struct CommunityRow<'a> {
    p_in: f64,
    #[serde(flatten)]
    row: &'a SweepRow,
}

/// Sweep rows prefixed with a `p_in` column.
fn write_community_rows(rows: &[(f64, SweepRow)], format: RowFormat, out: &mut Vec<u8>) -> Result<()> {
    match format {
        RowFormat::Csv => {
            let mut inner = Vec::new();
            let plain: Vec<SweepRow> = rows.iter().map(|(_, r)| r.clone()).collect();
            io::write_rows_to(&plain, RowFormat::Csv, &mut inner)?;
            let text = String::from_utf8(inner).expect("csv is utf-8");
            let mut lines = text.lines();
            if let Some(header) = lines.next() {
                out.extend_from_slice(format!("p_in,{header}\n").as_bytes());
            }
            for ((p, _), line) in rows.iter().zip(lines) {
                out.extend_from_slice(format!("{},{line}\n", format_sig9(*p)).as_bytes());
            }
        }
        RowFormat::Json => {
            let view: Vec<CommunityRow> = rows.iter().map(|(p, r)| CommunityRow { p_in: *p, row: r }).collect();
            serde_json::to_writer_pretty(&mut *out, &view)?;
            out.push(b'\n');
        }
    }
    Ok(())
}

fn report_skips(outcome: &SweepOutcome) {
    if outcome.skipped > 0 {
        eprintln!("warning: skipped {} cells", outcome.skipped);
        for d in &outcome.diagnostics {
            eprintln!("  {d}");
        }
    }
}

fn emit_rows(
    rows: &[SweepRow],
    output: &OutputArgs,
    command: &str,
    argv: Vec<String>,
    seed: u64,
    config: serde_json::Value,
) -> Result<()> {
    let mut buf = Vec::new();
    io::write_rows_to(rows, output.format.into(), &mut buf)?;
    emit_bytes(&buf, output, command, argv, seed, config)?;
    if output.out.is_some() {
        for s in summarize(rows) {
            eprintln!(
                "{:>6} q={:<3} beta={:<6} f_d={:.4}±{:.4} R_max={:.2}±{:.2}",
                s.scheme,
                s.q,
                s.beta.map(format_sig9).unwrap_or_else(|| "-".into()),
                s.mean_f_d,
                s.stderr_f_d,
                s.mean_r_max,
                s.stderr_r_max
            );
        }
    }
    Ok(())
}

fn emit_bytes(
    data: &[u8],
    output: &OutputArgs,
    command: &str,
    argv: Vec<String>,
    seed: u64,
    config: serde_json::Value,
) -> Result<()> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, data).map_err(|e| Error::io(path, e))?;
            RunManifest::new(command, argv, seed, config).write(RunManifest::sidecar_path(path))
        }
        None => std::io::stdout()
            .lock()
            .write_all(data)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn write_json_file(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

//! `dirichlet`: single-depth boundary value solves, extension towers across
//! increasing depths, and the pendant-chain obstruction table.

use anyhow::{bail, Context, Result};
use clap::Args;
use ohmnet::dirichlet::{
    harmonic_extension_tower, pendant_chain_obstruction, solve_dirichlet, BoundarySpec,
    DirichletProblem, HarmonicSolution, ObstructionTable, SolverConfig, TowerBoundary,
    TowerReport, DEFAULT_DENSE_CAP,
};
use ohmnet::graph::GraphSource;
use ohmnet::metric::Truncation;
use serde::Serialize;
use serde_json::json;

use crate::output::{num, resolve_out_dir, write_artifact, write_json, Csv};
use crate::parse::{
    parse_depths, parse_scheme, parse_solve_method, parse_source, parse_table, truncation_of,
};
use crate::CommonArgs;

#[derive(Args)]
pub struct DirichletArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Single truncation depth to solve at.
    #[arg(long, conflicts_with = "depths")]
    pub depth: Option<usize>,

    /// Depth list (`A..B` inclusive or comma separated) for a tower.
    #[arg(long)]
    pub depths: Option<String>,

    /// Datum at the chain limit / on every frontier class.
    #[arg(long, default_value_t = 1.0)]
    pub limit: f64,

    /// Datum on pendant and other degree-one boundary vertices.
    #[arg(long, default_value_t = 0.0)]
    pub pendants: f64,

    /// Explicit boundary table `name=value,...`; names are frontier classes
    /// or vertex display names.  Single-depth solves only.
    #[arg(long)]
    pub boundary: Option<String>,

    /// Fallback datum for boundary vertices not covered above.
    #[arg(long)]
    pub boundary_default: Option<f64>,

    /// Solve method: auto | cg | dense.
    #[arg(long, default_value = "auto")]
    pub method: String,

    /// Residual tolerance of the iterative solver.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    command: &'static str,
    config: serde_json::Value,
    residual_norm: f64,
    iterations: usize,
    vertices: usize,
}

#[derive(Serialize)]
struct TowerSummary {
    command: &'static str,
    config: serde_json::Value,
    depths: Vec<usize>,
    residual_norms: Vec<f64>,
    /// Sup difference of consecutive solutions over shared vertices; the
    /// Cauchy diagnostic of the tower.
    sup_diffs: Vec<f64>,
}

#[derive(Serialize)]
struct ObstructionSummary {
    command: &'static str,
    config: serde_json::Value,
    table: ObstructionTable,
}

pub fn run(args: &DirichletArgs) -> Result<()> {
    let scheme = parse_scheme(&args.common.scheme)?;
    let spec = parse_source(
        &args.common.generator,
        args.common.seed,
        (args.common.r_min, args.common.r_max),
        &scheme,
    )?;
    let out = resolve_out_dir(args.common.out.as_ref());
    let config = SolverConfig {
        method: parse_solve_method(&args.method)?,
        tolerance: args.tolerance,
        dense_cap: DEFAULT_DENSE_CAP,
        max_iterations: None,
    };
    let config_echo = json!({
        "generator": spec.spelling,
        "scheme": args.common.scheme,
        "seed": args.common.seed,
        "depth": args.depth,
        "depths": args.depths,
        "limit": args.limit,
        "pendants": args.pendants,
        "boundary": args.boundary,
        "boundary_default": args.boundary_default,
        "method": args.method,
        "tolerance": args.tolerance,
    });

    match (&args.depth, &args.depths) {
        (Some(depth), None) => {
            let trunc = truncation_of(&spec, Some(*depth), *depth, &scheme)?;
            let boundary = build_boundary(args, &trunc)?;
            let problem = DirichletProblem::new(&trunc, boundary).with_config(config);
            let sol = solve_dirichlet(&problem)?;
            write_solutions_csv(&out, &[(*depth, &sol)])?;
            let summary = SolveSummary {
                command: "dirichlet",
                config: config_echo,
                residual_norm: sol.residual_norm,
                iterations: sol.iterations,
                vertices: trunc.host().vertex_count(),
            };
            write_json(&out, "dirichlet_summary.json", &summary)?;
            println!(
                "solved depth {depth}: residual {} over {} vertices",
                sol.residual_norm,
                trunc.host().vertex_count()
            );
            Ok(())
        }
        (None, Some(depths)) => {
            let depths = parse_depths(depths)?;
            if args.boundary.is_some() {
                bail!("--boundary applies to single-depth solves; towers take --limit/--pendants");
            }
            if is_pendant_chain(&spec.source)
                && args.pendants == 0.0
                && args.limit == 1.0
                && depths.len() >= 3
            {
                let table = pendant_chain_obstruction(&depths, &config)
                    .context("obstruction table construction")?;
                write_obstruction_csv(&out, &table)?;
                let last_ratio =
                    table.rows.iter().rev().find_map(|r| r.ratio).unwrap_or(f64::NAN);
                println!(
                    "root values decay; last ratio {last_ratio}, limit {}",
                    table.ratio_limit
                );
                let summary = ObstructionSummary {
                    command: "dirichlet",
                    config: config_echo,
                    table,
                };
                write_json(&out, "dirichlet_summary.json", &summary)?;
                Ok(())
            } else {
                let data =
                    TowerBoundary::ChainWithLeaves { limit: args.limit, leaf: args.pendants };
                let report =
                    harmonic_extension_tower(&spec.source, &scheme, &data, &depths, &config)?;
                let rows: Vec<(usize, &HarmonicSolution)> =
                    depths.iter().copied().zip(report.solutions.iter()).collect();
                write_solutions_csv(&out, &rows)?;
                write_tower_summary(&out, config_echo, &report)?;
                if let Some(last) = report.sup_diffs.last() {
                    println!("tower of {} depths; last sup difference {last}", depths.len());
                }
                Ok(())
            }
        }
        _ => bail!("exactly one of --depth or --depths is required"),
    }
}

fn is_pendant_chain(source: &GraphSource) -> bool {
    matches!(source, GraphSource::PendantChain { .. })
}

/// Explicit table entries when given (classes first, vertex names second),
/// otherwise the limit/pendants data shared with towers.
fn build_boundary(args: &DirichletArgs, trunc: &Truncation) -> Result<BoundarySpec> {
    let mut spec = match &args.boundary {
        Some(table) => {
            let classes = trunc.classes();
            let mut spec = BoundarySpec::default();
            for (name, value) in parse_table(table)? {
                if classes.contains_key(&name) {
                    spec = spec.with_class(name, value);
                } else if let Some(v) = trunc.host().vertex_named(&name) {
                    spec = spec.with_vertex(v.clone(), value);
                } else {
                    bail!(
                        "`{name}` is neither a boundary class nor a vertex; classes: {}",
                        classes.keys().cloned().collect::<Vec<_>>().join(", ")
                    );
                }
            }
            spec
        }
        None => TowerBoundary::ChainWithLeaves { limit: args.limit, leaf: args.pendants }
            .spec_at(trunc)?,
    };
    if let Some(d) = args.boundary_default {
        spec = spec.with_default(d);
    }
    Ok(spec)
}

fn write_solutions_csv(
    out: &std::path::Path,
    rows: &[(usize, &HarmonicSolution)],
) -> Result<()> {
    let mut csv = Csv::new("depth,vertexId,value");
    for (depth, sol) in rows {
        for (v, &x) in sol.values.iter() {
            csv.row(&[depth.to_string(), v.to_string(), num(x)]);
        }
    }
    write_artifact(out, "solutions.csv", &csv.finish())?;
    Ok(())
}

fn write_obstruction_csv(out: &std::path::Path, table: &ObstructionTable) -> Result<()> {
    let mut csv = Csv::new("depth,root_value,ratio,residual_norm");
    for row in &table.rows {
        csv.row(&[
            row.depth.to_string(),
            num(row.root_value),
            row.ratio.map(num).unwrap_or_default(),
            num(row.residual_norm),
        ]);
    }
    write_artifact(out, "obstruction.csv", &csv.finish())?;
    Ok(())
}

fn write_tower_summary(
    out: &std::path::Path,
    config: serde_json::Value,
    report: &TowerReport,
) -> Result<()> {
    let summary = TowerSummary {
        command: "dirichlet",
        config,
        depths: report.depths.clone(),
        residual_norms: report.solutions.iter().map(|s| s.residual_norm).collect(),
        sup_diffs: report.sup_diffs.clone(),
    };
    write_json(out, "dirichlet_summary.json", &summary)?;
    Ok(())
}

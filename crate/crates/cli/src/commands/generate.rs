//! `generate`: truncate a source and emit the host as graph JSON, with the
//! frontier classes and basic statistics in a summary file.

use std::collections::BTreeMap;

use anyhow::Result;
use clap::Args;
use ohmnet::forms::assemble_qmatrix;
use ohmnet::metric::ray_tail;
use serde::Serialize;
use serde_json::json;

use crate::output::{resolve_out_dir, write_artifact, write_json};
use crate::parse::{parse_scheme, parse_source, truncation_of};
use crate::CommonArgs;

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Truncation depth in hops from the root.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,

    /// Also export the generator as a Matrix Market file.
    #[arg(long)]
    pub qmatrix: bool,
}

#[derive(Serialize)]
struct FrontierEntry {
    tail: String,
}

#[derive(Serialize)]
struct GenerateSummary {
    command: &'static str,
    config: serde_json::Value,
    vertices: usize,
    edges: usize,
    volume: f64,
    mu_total: f64,
    frontier_classes: BTreeMap<String, FrontierEntry>,
}

pub fn run(args: &GenerateArgs) -> Result<()> {
    let scheme = parse_scheme(&args.common.scheme)?;
    let spec = parse_source(
        &args.common.generator,
        args.common.seed,
        (args.common.r_min, args.common.r_max),
        &scheme,
    )?;
    let trunc = truncation_of(&spec, Some(args.depth), args.depth, &scheme)?;
    let host = trunc.host();
    let out = resolve_out_dir(args.common.out.as_ref());

    write_json(&out, "graph.json", host)?;
    if args.qmatrix {
        write_artifact(&out, "qmatrix.mtx", &assemble_qmatrix(host).to_matrix_market())?;
    }

    let mut frontier_classes = BTreeMap::new();
    for (name, point) in trunc.classes() {
        let tail = ray_tail(&trunc, &point.class)?;
        frontier_classes.insert(name, FrontierEntry { tail: tail.to_string() });
    }

    let summary = GenerateSummary {
        command: "generate",
        config: json!({
            "generator": spec.spelling,
            "depth": args.depth,
            "scheme": args.common.scheme,
            "seed": args.common.seed,
            "qmatrix": args.qmatrix,
        }),
        vertices: host.vertex_count(),
        edges: host.edge_count(),
        volume: host.volume(),
        mu_total: host.mu_total(),
        frontier_classes,
    };
    write_json(&out, "generate_summary.json", &summary)?;

    println!(
        "host: {} vertices, {} edges, volume {}",
        summary.vertices, summary.edges, summary.volume
    );
    Ok(())
}

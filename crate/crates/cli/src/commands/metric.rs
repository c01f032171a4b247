//! `metric`: volume, diameter, and single-source distance tables on a
//! truncation host.

use anyhow::Result;
use clap::Args;
use ohmnet::metric::{distances_from, diameter, Distance};
use serde::Serialize;
use serde_json::json;

use crate::output::{num, resolve_out_dir, write_artifact, write_json, Csv};
use crate::parse::{parse_scheme, parse_source, resolve_vertex, truncation_of};
use crate::CommonArgs;

#[derive(Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Truncation depth; finite graph files default to their full extent.
    #[arg(long)]
    pub depth: Option<usize>,

    /// Report the volume (sum of edge resistances).
    #[arg(long)]
    pub volume: bool,

    /// Report the diameter of the resistance path metric.
    #[arg(long)]
    pub diameter: bool,

    /// Emit distances from this vertex as CSV.
    #[arg(long)]
    pub from: Option<String>,
}

#[derive(Serialize)]
struct MetricSummary {
    command: &'static str,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    volume: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distances_file: Option<String>,
}

pub fn run(args: &MetricArgs) -> Result<()> {
    let scheme = parse_scheme(&args.common.scheme)?;
    let spec = parse_source(
        &args.common.generator,
        args.common.seed,
        (args.common.r_min, args.common.r_max),
        &scheme,
    )?;
    let trunc = truncation_of(&spec, args.depth, 6, &scheme)?;
    let host = trunc.host();
    let out = resolve_out_dir(args.common.out.as_ref());

    // with no selection flags, report both scalars
    let report_all = !args.volume && !args.diameter && args.from.is_none();

    let volume = (args.volume || report_all).then(|| host.volume());
    let diam = if args.diameter || report_all { Some(diameter(host)?) } else { None };

    let mut distances_file = None;
    if let Some(name) = &args.from {
        let src = resolve_vertex(host, name)?;
        let dists = distances_from(host, &src)?;
        let mut csv = Csv::new("vertexId,distance");
        for (i, d) in dists.iter().enumerate() {
            let cell = match d {
                Distance::Finite(x) => num(*x),
                Distance::Unreachable => "unreachable".to_string(),
            };
            csv.row(&[host.vertex(i).to_string(), cell]);
        }
        write_artifact(&out, "distances.csv", &csv.finish())?;
        distances_file = Some("distances.csv".to_string());
    }

    if let Some(v) = volume {
        println!("volume = {v}");
    }
    if let Some(d) = diam {
        println!("diameter = {d}");
    }

    let summary = MetricSummary {
        command: "metric",
        config: json!({
            "generator": spec.spelling,
            "depth": args.depth,
            "scheme": args.common.scheme,
            "seed": args.common.seed,
            "from": args.from,
        }),
        volume,
        diameter: diam,
        distances_file,
    };
    write_json(&out, "metric_summary.json", &summary)?;
    Ok(())
}

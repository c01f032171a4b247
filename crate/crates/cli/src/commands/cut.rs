//! `cut`: verify that a finite edge set separates two boundary classes and,
//! on success, emit the separating flat indicator function.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use ohmnet::forms::VertexFunction;
use ohmnet::metric::{
    components_after_cut, ray_tail, verify_cut_witness, CutVerdict, CutWitness, FlatFunction,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{resolve_out_dir, write_json};
use crate::parse::{parse_edge_list, parse_scheme, parse_source, truncation_of};
use crate::{CheckFailure, CommonArgs};

#[derive(Args)]
pub struct CutArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Depth of the truncation the witness is checked in.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,

    /// Witness edges as `u-v` pairs separated by commas.
    #[arg(long)]
    pub witness: String,

    /// The two boundary class names to separate, comma separated.
    #[arg(long)]
    pub between: String,
}

#[derive(Serialize)]
struct CutSummary {
    command: &'static str,
    config: serde_json::Value,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    connecting_path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flat_function_file: Option<String>,
}

pub fn run(args: &CutArgs) -> Result<()> {
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

    let classes = trunc.classes();
    let (name_x, name_y) = args
        .between
        .split_once(',')
        .ok_or_else(|| anyhow!("--between takes two class names separated by a comma"))?;
    let lookup = |name: &str| {
        classes.get(name.trim()).cloned().ok_or_else(|| {
            anyhow!(
                "no boundary class `{}` at depth {}; available: {}",
                name.trim(),
                args.depth,
                classes.keys().cloned().collect::<Vec<_>>().join(", ")
            )
        })
    };
    let x = lookup(name_x)?;
    let y = lookup(name_y)?;
    let edges = parse_edge_list(&args.witness, host)?;
    let witness = CutWitness::new(edges.clone());

    let verdict = verify_cut_witness(&spec.source, &witness, &x, &y, args.depth)?;

    let mut summary = CutSummary {
        command: "cut",
        config: json!({
            "generator": spec.spelling,
            "depth": args.depth,
            "scheme": args.common.scheme,
            "witness": args.witness,
            "between": args.between,
        }),
        verdict: String::new(),
        connecting_path: None,
        flat_function_file: None,
    };

    match verdict {
        CutVerdict::Separated => {
            summary.verdict = "separated".into();
            // certificate: the indicator of the component holding x's tail
            // is flat across every non-witness edge
            let labeling = components_after_cut(host, &edges)?;
            let tx = ray_tail(&trunc, &x.class)?;
            let ty = ray_tail(&trunc, &y.class)?;
            let side = labeling
                .label_of(&tx)
                .ok_or_else(|| anyhow!("tail {tx} missing from the component labeling"))?;
            let values = VertexFunction::from_fn(host, |v| {
                if labeling.label_of(v) == Some(side) {
                    1.0
                } else {
                    0.0
                }
            });
            let flat = FlatFunction { values: values.0, witness: edges };
            flat.validate(
                host,
                &BTreeSet::from([tx.clone()]),
                &BTreeSet::from([ty.clone()]),
            )
            .context("flat indicator failed its own invariants")?;
            write_json(&out, "flat_function.json", &flat)?;
            summary.flat_function_file = Some("flat_function.json".to_string());
            write_json(&out, "cut_summary.json", &summary)?;
            println!("verdict: separated ({name_x} | {name_y})");
            Ok(())
        }
        CutVerdict::NotSeparated { path } => {
            summary.verdict = "not-separated".into();
            let path: Vec<String> = path.iter().map(|v| v.to_string()).collect();
            summary.connecting_path = Some(path.clone());
            write_json(&out, "cut_summary.json", &summary)?;
            println!("verdict: not separated; path {}", path.join(" "));
            bail!(CheckFailure(format!(
                "witness does not separate {name_x} from {name_y}: path {}",
                path.join(" -> ")
            )))
        }
        CutVerdict::UnknownAtDepth => {
            summary.verdict = "unknown-at-depth".into();
            write_json(&out, "cut_summary.json", &summary)?;
            println!("verdict: unknown at depth {}", args.depth);
            bail!(CheckFailure(format!(
                "separation of {name_x} and {name_y} is not established at depth {}",
                args.depth
            )))
        }
    }
}

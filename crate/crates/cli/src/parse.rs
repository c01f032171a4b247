//! Flag-value parsers: the generator mini-language, weight schemes, depth
//! lists, time grids, and the small `name=value` tables used for boundary
//! data and boundary conditions.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ohmnet::dirichlet::SolveMethod;
use ohmnet::graph::{GraphFile, GraphSource, VertexId, VertexWeightScheme, WeightedGraph};
use ohmnet::metric::Truncation;
use ohmnet::semigroup::Condition;

/// A parsed `--generator` value together with the original spelling, echoed
/// into summaries.
pub struct SourceSpec {
    pub source: GraphSource,
    pub spelling: String,
}

/// Generator mini-language:
///
/// - `figure-a`, `figure-a-lumped`: the pendant chain, full or with lumped
///   pendant banks
/// - `geometric-tree:B,R`: B-ary tree with level-n edge resistance R^n
/// - `ray:F,Q`: single chain with edge resistances F, F*Q, F*Q^2, ...
/// - `sibling-tree:B,R,C`: geometric tree plus one cross edge per level
/// - `random-tree:N`, `random-graph:N,E`: seeded random hosts with
///   resistances drawn from the `--r-min`/`--r-max` range
/// - anything else: path to a graph JSON file
pub fn parse_source(
    spec: &str,
    seed: Option<u64>,
    r_range: (f64, f64),
    scheme: &VertexWeightScheme,
) -> Result<SourceSpec> {
    let spelling = spec.to_string();
    let wrap = |source: GraphSource| SourceSpec { source, spelling: spelling.clone() };
    let need_seed = || {
        seed.ok_or_else(|| anyhow!("generator `{spec}` draws random numbers; pass --seed"))
    };

    match spec {
        "figure-a" => return Ok(wrap(GraphSource::pendant_chain())),
        "figure-a-lumped" => return Ok(wrap(GraphSource::pendant_chain_lumped())),
        _ => {}
    }

    if let Some((family, params)) = spec.split_once(':') {
        let nums: Vec<&str> = params.split(',').collect();
        let float = |i: usize| -> Result<f64> {
            nums.get(i)
                .ok_or_else(|| anyhow!("generator `{spec}` is missing parameter {i}"))?
                .parse::<f64>()
                .with_context(|| format!("bad numeric parameter in `{spec}`"))
        };
        let int = |i: usize| -> Result<u64> {
            nums.get(i)
                .ok_or_else(|| anyhow!("generator `{spec}` is missing parameter {i}"))?
                .parse::<u64>()
                .with_context(|| format!("bad integer parameter in `{spec}`"))
        };
        match family {
            "geometric-tree" => {
                let source = GraphSource::geometric_tree(int(0)? as u32, float(1)?)?;
                return Ok(wrap(source));
            }
            "ray" => {
                let source = GraphSource::ray(float(0)?, float(1)?)?;
                return Ok(wrap(source));
            }
            "sibling-tree" => {
                let source =
                    GraphSource::sibling_tree(int(0)? as u32, float(1)?, float(2)?)?;
                return Ok(wrap(source));
            }
            "random-tree" => {
                let g = ohmnet::sampling::random_tree(
                    need_seed()?,
                    int(0)? as usize,
                    r_range.0,
                    r_range.1,
                    scheme,
                )?;
                return Ok(wrap(GraphSource::finite(g)?));
            }
            "random-graph" => {
                let g = ohmnet::sampling::random_connected_graph(
                    need_seed()?,
                    int(0)? as usize,
                    int(1)? as usize,
                    r_range.0,
                    r_range.1,
                    scheme,
                )?;
                return Ok(wrap(GraphSource::finite(g)?));
            }
            _ => {
                if !Path::new(spec).exists() {
                    bail!(
                        "unknown generator family `{family}`; expected figure-a, \
                         figure-a-lumped, geometric-tree:B,R, ray:F,Q, \
                         sibling-tree:B,R,C, random-tree:N, random-graph:N,E, \
                         or a path to a graph JSON file"
                    );
                }
            }
        }
    }

    let text = std::fs::read_to_string(spec)
        .with_context(|| format!("cannot read graph file `{spec}`"))?;
    let file: GraphFile =
        serde_json::from_str(&text).with_context(|| format!("bad graph JSON in `{spec}`"))?;
    let g = WeightedGraph::from_json(&file, scheme)?;
    Ok(wrap(GraphSource::finite(g)?))
}

/// `mu0` (half the incident edge lengths, the default), `conductance`
/// (incident conductance sum), or `constant:C`.
pub fn parse_scheme(s: &str) -> Result<VertexWeightScheme> {
    match s {
        "mu0" | "half-edge-length" => Ok(VertexWeightScheme::HalfEdgeLength),
        "conductance" | "conductance-sum" => Ok(VertexWeightScheme::ConductanceSum),
        _ => {
            if let Some(c) = s.strip_prefix("constant:") {
                let c: f64 = c.parse().context("bad constant weight")?;
                return Ok(VertexWeightScheme::Constant(c));
            }
            bail!("unknown weight scheme `{s}`; expected mu0, conductance, or constant:C")
        }
    }
}

/// `A..B` (inclusive on both ends) or an explicit comma list; the result is
/// strictly increasing.
pub fn parse_depths(s: &str) -> Result<Vec<usize>> {
    let depths: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.parse().context("bad depth range start")?;
        let b: usize = b.parse().context("bad depth range end")?;
        if b < a {
            bail!("empty depth range {a}..{b}");
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().context("bad depth list entry"))
            .collect::<Result<_>>()?
    };
    if depths.is_empty() {
        bail!("no depths given");
    }
    if depths.windows(2).any(|w| w[1] <= w[0]) {
        bail!("depth list must be strictly increasing");
    }
    Ok(depths)
}

pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().context("bad time value"))
        .collect()
}

/// `name=value` pairs separated by commas.  Names may not contain commas or
/// equals signs; the generated class and vertex names never do.
pub fn parse_table(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .map(|entry| {
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("table entry `{entry}` is not name=value"))?;
            let value: f64 =
                value.parse().with_context(|| format!("bad value in `{entry}`"))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

pub fn parse_condition(s: &str) -> Result<Condition> {
    match s {
        "absorbing" => Ok(Condition::Absorbing),
        "reflecting" => Ok(Condition::Reflecting),
        _ => bail!("unknown boundary condition `{s}`; expected absorbing or reflecting"),
    }
}

/// `class=absorbing` pairs separated by commas.
pub fn parse_condition_table(s: &str) -> Result<Vec<(String, Condition)>> {
    s.split(',')
        .map(|entry| {
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("table entry `{entry}` is not class=condition"))?;
            Ok((name.trim().to_string(), parse_condition(value.trim())?))
        })
        .collect()
}

/// `u-v` endpoint pairs separated by commas, matched against vertex display
/// names (which never contain `-` for generated sources).
pub fn parse_edge_list(s: &str, host: &WeightedGraph) -> Result<Vec<(VertexId, VertexId)>> {
    s.split(',')
        .map(|entry| {
            let (u, v) = entry
                .split_once('-')
                .ok_or_else(|| anyhow!("edge `{entry}` is not u-v"))?;
            Ok((resolve_vertex(host, u.trim())?, resolve_vertex(host, v.trim())?))
        })
        .collect()
}

pub fn parse_vertex_list(s: &str, host: &WeightedGraph) -> Result<Vec<VertexId>> {
    s.split(',').map(|name| resolve_vertex(host, name.trim())).collect()
}

pub fn resolve_vertex(host: &WeightedGraph, name: &str) -> Result<VertexId> {
    host.vertex_named(name)
        .cloned()
        .ok_or_else(|| anyhow!("no vertex named `{name}` in the host graph"))
}

pub fn parse_solve_method(s: &str) -> Result<SolveMethod> {
    match s {
        "auto" => Ok(SolveMethod::Auto),
        "cg" | "conjugate-gradient" => Ok(SolveMethod::ConjugateGradient),
        "dense" => Ok(SolveMethod::Dense),
        _ => bail!("unknown solve method `{s}`; expected auto, cg, or dense"),
    }
}

/// Truncation of a parsed source: infinite generators are cut at `depth`,
/// finite graphs become covering truncations when no depth is given.
pub fn truncation_of(
    spec: &SourceSpec,
    depth: Option<usize>,
    default_depth: usize,
    scheme: &VertexWeightScheme,
) -> Result<Truncation> {
    if depth.is_none() {
        if let GraphSource::Finite(graph) = &spec.source {
            return Ok(Truncation::covering(graph.clone())?);
        }
    }
    Ok(ohmnet::metric::truncate(&spec.source, depth.unwrap_or(default_depth), scheme)?)
}

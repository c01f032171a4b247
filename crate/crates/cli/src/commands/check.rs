//! `check`: randomized invariant suite over one host graph.  Every check
//! names the invariant it guards and, on failure, the offending sample in
//! machine-readable form.  Samples fan out over a worker pool; the reported
//! failure is always the lowest-indexed one, so reruns are reproducible.

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use ohmnet::dirichlet::{
    lambda_min_dirichlet, solve_dirichlet, BoundarySpec, DirichletProblem, SolveMethod,
    SolverConfig,
};
use ohmnet::forms::{
    assemble_qmatrix, bilinear_form, continuity_modulus_check, laplacian_apply, mu_inner,
};
use ohmnet::graph::{VertexId, WeightedGraph};
use ohmnet::metric::{distance, Distance, Truncation};
use ohmnet::sampling::{random_contraction, random_density, random_vertex_function};
use ohmnet::semigroup::{
    assemble_generator, markov_checks, BoundaryCondition, Condition, Density, MarkovSamples,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{resolve_out_dir, write_json};
use crate::parse::{parse_scheme, parse_source, truncation_of};
use crate::{CheckFailure, CommonArgs};

#[derive(Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Truncation depth for infinite generators.
    #[arg(long)]
    pub depth: Option<usize>,

    /// Randomized samples per check.
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
}

#[derive(Serialize)]
struct CheckOutcome {
    invariant: &'static str,
    tolerance: &'static str,
    samples: usize,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct CheckReport {
    command: &'static str,
    config: Value,
    checks: Vec<CheckOutcome>,
    all_green: bool,
}

struct Ctx {
    host: WeightedGraph,
    trunc: Truncation,
    seed: u64,
    samples: usize,
}

/// A failed sample: machine-readable description plus the violation.
type Fail = (Value, String);

pub fn run(args: &CheckArgs) -> Result<()> {
    let seed = args
        .common
        .seed
        .ok_or_else(|| anyhow!("check draws random samples; --seed is mandatory"))?;
    let scheme = parse_scheme(&args.common.scheme)?;
    let spec = parse_source(
        &args.common.generator,
        args.common.seed,
        (args.common.r_min, args.common.r_max),
        &scheme,
    )?;
    let trunc = truncation_of(&spec, args.depth, 6, &scheme)?;
    let ctx = Ctx { host: trunc.host().clone(), trunc, seed, samples: args.samples.max(1) };
    let out = resolve_out_dir(args.common.out.as_ref());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.common.threads)
        .build()
        .context("building the worker pool")?;

    let checks: Vec<(&'static str, &'static str, fn(&Ctx, u64) -> Option<Fail>, usize)> = vec![
        ("metric.axioms", "1e-12 relative triangle slack", metric_axioms, ctx.samples),
        ("forms.adjointness", "1e-12 relative", adjointness, ctx.samples),
        ("forms.row-sums", "1e-12 absolute", row_sums, 1),
        ("forms.contraction", "exact", contraction, ctx.samples),
        ("forms.continuity", "exact (4 B d bound)", continuity, ctx.samples),
        ("dirichlet.maximum-principle", "1e-9 absolute", maximum_principle, ctx.samples),
        ("dirichlet.solver-agreement", "1e-9 sup difference", solver_agreement, ctx.samples),
        ("dirichlet.spectral-bound", "1/(4 mu diam) lower bound", spectral_bound, 1),
        (
            "semigroup.markov",
            "positivity -1e-12, contraction growth 1e-10, mass drift 1e-10",
            markov,
            1,
        ),
    ];

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (invariant, tolerance, body, samples) in checks {
        let worst: Option<(usize, Fail)> = pool.install(|| {
            (0..samples)
                .into_par_iter()
                .filter_map(|k| {
                    let sample_seed =
                        ctx.seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9));
                    body(&ctx, sample_seed).map(|f| (k, f))
                })
                .min_by_key(|(k, _)| *k)
        });
        match worst {
            None => {
                println!("check {invariant}: pass ({samples} samples)");
                outcomes.push(CheckOutcome {
                    invariant,
                    tolerance,
                    samples,
                    status: "pass",
                    sample: None,
                    error: None,
                });
            }
            Some((k, (sample, error))) => {
                println!("check {invariant}: FAIL at sample {k}: {error}");
                failures.push(format!("{invariant}: {error}"));
                outcomes.push(CheckOutcome {
                    invariant,
                    tolerance,
                    samples,
                    status: "fail",
                    sample: Some(sample),
                    error: Some(error),
                });
            }
        }
    }

    let all_green = failures.is_empty();
    let report = CheckReport {
        command: "check",
        config: json!({
            "generator": spec.spelling,
            "depth": args.depth,
            "scheme": args.common.scheme,
            "seed": seed,
            "samples": args.samples,
            "r_min": args.common.r_min,
            "r_max": args.common.r_max,
        }),
        checks: outcomes,
        all_green,
    };
    write_json(&out, "check_report.json", &report)?;

    if all_green {
        println!("all invariants green");
        Ok(())
    } else {
        bail!(CheckFailure(format!("{} invariant(s) violated", failures.len())))
    }
}

/// splitmix64 finalizer; all index picks below run through this so sample k
/// is independent of thread scheduling.
fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

fn pick(seed: u64, salt: u64, n: usize) -> usize {
    (mix(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)) % n as u64) as usize
}

/// Uniform in [0, 1) from the same generator.
fn unit(seed: u64, salt: u64) -> f64 {
    mix(seed ^ salt.wrapping_mul(0xd134_2543_de82_ef95)) as f64 / (u64::MAX as f64 + 1.0)
}

fn vertex_json(v: &VertexId) -> Value {
    json!(v.to_string())
}

fn metric_axioms(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let g = &ctx.host;
    let n = g.vertex_count();
    let u = g.vertex(pick(seed, 1, n)).clone();
    let v = g.vertex(pick(seed, 2, n)).clone();
    let w = g.vertex(pick(seed, 3, n)).clone();
    let sample = json!({ "u": vertex_json(&u), "v": vertex_json(&v), "w": vertex_json(&w) });
    let fail = |msg: String| Some((sample.clone(), msg));

    let d = |a: &VertexId, b: &VertexId| -> Result<f64, String> {
        match distance(g, a, b).map_err(|e| e.to_string())? {
            Distance::Finite(x) => Ok(x),
            Distance::Unreachable => Err(format!("{a} and {b} are unreachable")),
        }
    };
    let duv = match d(&u, &v) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let dvu = match d(&v, &u) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let duw = match d(&u, &w) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let dvw = match d(&v, &w) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };

    let scale = 1.0 + duv.abs() + dvw.abs();
    if (duv - dvu).abs() > 1e-12 * scale {
        return fail(format!("asymmetric: d(u,v) = {duv}, d(v,u) = {dvu}"));
    }
    if (u == v) != (duv == 0.0) {
        return fail(format!("identity of indiscernibles fails: d = {duv}"));
    }
    if duw > duv + dvw + 1e-12 * scale {
        return fail(format!("triangle violated: {duw} > {duv} + {dvw}"));
    }
    None
}

fn adjointness(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let g = &ctx.host;
    let f = random_vertex_function(seed, g, 1.0);
    let h = random_vertex_function(seed ^ 0xabcd, g, 1.0);
    let sample = json!({ "f_seed": seed, "g_seed": seed ^ 0xabcd });
    let fail = |msg: String| Some((sample.clone(), msg));

    let run = || -> Result<(), String> {
        let lf = laplacian_apply(g, &f).map_err(|e| e.to_string())?;
        let lh = laplacian_apply(g, &h).map_err(|e| e.to_string())?;
        let left = mu_inner(g, &lf, &h).map_err(|e| e.to_string())?;
        let form = bilinear_form(g, &f, &h).map_err(|e| e.to_string())?;
        let right = mu_inner(g, &f, &lh).map_err(|e| e.to_string())?;
        let scale = 1.0_f64.max(left.abs()).max(form.abs());
        if (left - form).abs() > 1e-12 * scale {
            return Err(format!("<Lf, g> = {left} but B(f, g) = {form}"));
        }
        if (right - form).abs() > 1e-12 * scale {
            return Err(format!("<f, Lg> = {right} but B(f, g) = {form}"));
        }
        Ok(())
    };
    run().err().and_then(|e| fail(e))
}

fn row_sums(ctx: &Ctx, _seed: u64) -> Option<Fail> {
    let q = assemble_qmatrix(&ctx.host);
    for (i, s) in q.row_sums().iter().enumerate() {
        if s.abs() > 1e-12 {
            return Some((
                json!({ "row": ctx.host.vertex(i).to_string() }),
                format!("row sum {s} exceeds 1e-12"),
            ));
        }
    }
    None
}

fn contraction(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let g = &ctx.host;
    let f = random_vertex_function(seed, g, 1.0);
    let c = random_contraction(seed ^ 0x5eed, &f);
    let sample = json!({ "f_seed": seed, "contraction_seed": seed ^ 0x5eed });
    let fail = |msg: String| Some((sample.clone(), msg));

    let run = || -> Result<(), String> {
        let bff = bilinear_form(g, &f, &f).map_err(|e| e.to_string())?;
        let fabs = f.abs();
        let babs = bilinear_form(g, &fabs, &fabs).map_err(|e| e.to_string())?;
        if babs > bff {
            return Err(format!("B(|f|,|f|) = {babs} > B(f,f) = {bff}"));
        }
        let bcc = bilinear_form(g, &c, &c).map_err(|e| e.to_string())?;
        let h1f = bff + mu_inner(g, &f, &f).map_err(|e| e.to_string())?;
        let h1c = bcc + mu_inner(g, &c, &c).map_err(|e| e.to_string())?;
        if h1c > h1f {
            return Err(format!("contraction grows the H1 norm: {h1c} > {h1f}"));
        }
        Ok(())
    };
    run().err().and_then(|e| fail(e))
}

fn continuity(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let g = &ctx.host;
    let n = g.vertex_count();
    let f = random_vertex_function(seed, g, 1.0);
    let pairs: Vec<(VertexId, VertexId)> = (0..10)
        .map(|i| {
            (
                g.vertex(pick(seed, 10 + i, n)).clone(),
                g.vertex(pick(seed, 50 + i, n)).clone(),
            )
        })
        .collect();
    match continuity_modulus_check(g, &f, &pairs) {
        Err(e) => Some((json!({ "f_seed": seed }), e.to_string())),
        Ok(report) if report.max_excess > 0.0 => Some((
            json!({
                "f_seed": seed,
                "worst_pair": report.worst_pair.map(|(u, v)| vec![u.to_string(), v.to_string()]),
            }),
            format!("|f(w) - f(v)|^2 exceeds 4 B d by {}", report.max_excess),
        )),
        Ok(_) => None,
    }
}

fn boundary_data(ctx: &Ctx, seed: u64) -> Option<(BoundarySpec, f64, f64)> {
    let boundary = ctx.trunc.boundary_vertices();
    if boundary.is_empty() {
        return None;
    }
    let mut spec = BoundarySpec::default();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, v) in boundary.iter().enumerate() {
        let x = unit(seed, 1000 + i as u64);
        lo = lo.min(x);
        hi = hi.max(x);
        spec = spec.with_vertex(v.clone(), x);
    }
    Some((spec, lo, hi))
}

fn maximum_principle(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let sample = json!({ "data_seed": seed });
    let Some((spec, lo, hi)) = boundary_data(ctx, seed) else {
        return None; // no boundary vertices: nothing to pin, vacuously true
    };
    let problem = DirichletProblem::new(&ctx.trunc, spec);
    let sol = match solve_dirichlet(&problem) {
        Ok(s) => s,
        Err(e) => return Some((sample, e.to_string())),
    };
    for (v, &x) in sol.values.iter() {
        if x < lo - 1e-9 || x > hi + 1e-9 {
            return Some((
                json!({ "data_seed": seed, "vertex": v.to_string() }),
                format!("value {x} escapes the data range [{lo}, {hi}]"),
            ));
        }
    }
    None
}

fn solver_agreement(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let sample = json!({ "data_seed": seed });
    let Some((spec, _, _)) = boundary_data(ctx, seed) else {
        return None;
    };
    let n = ctx.host.vertex_count();
    let cg = SolverConfig {
        method: SolveMethod::ConjugateGradient,
        tolerance: 1e-12,
        dense_cap: n,
        max_iterations: None,
    };
    let dense = SolverConfig { method: SolveMethod::Dense, ..cg };
    let run = |config: SolverConfig| {
        solve_dirichlet(&DirichletProblem::new(&ctx.trunc, spec.clone()).with_config(config))
    };
    let (a, b) = match (run(cg), run(dense)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Some((sample, e.to_string())),
    };
    for (v, &x) in a.values.iter() {
        let y = b.values.get(v).unwrap_or(f64::NAN);
        if (x - y).abs() > 1e-9 {
            return Some((
                json!({ "data_seed": seed, "vertex": v.to_string() }),
                format!("cg gives {x}, dense gives {y}"),
            ));
        }
    }
    None
}

fn spectral_bound(ctx: &Ctx, _seed: u64) -> Option<Fail> {
    let cap = ctx.host.vertex_count().max(1);
    match lambda_min_dirichlet(&ctx.trunc, true, cap) {
        Err(e) => Some((json!({}), e.to_string())),
        Ok(report) if !report.pass => Some((
            json!({ "dimension": report.dimension }),
            format!("lambda_min {} below the bound {}", report.eigenvalue, report.lower_bound),
        )),
        Ok(_) => None,
    }
}

fn markov(ctx: &Ctx, seed: u64) -> Option<Fail> {
    let host = &ctx.host;
    let build = |bc: &BoundaryCondition| assemble_generator(&ctx.trunc, bc);
    let times = [0.05, 0.4, 1.5];

    let mut samples = MarkovSamples {
        densities: vec![Density::uniform(host)],
        functions: Vec::new(),
        contraction_pairs: Vec::new(),
    };
    if let Ok(p) = random_density(seed ^ 0xd0, host) {
        samples.densities.push(p);
    }
    for k in 0..3u64 {
        let f = random_vertex_function(seed ^ (0xf0 + k), host, 1.0);
        let c = random_contraction(seed ^ (0xc0 + k), &f);
        samples.functions.push(f.clone());
        samples.contraction_pairs.push((f, c));
    }

    // all-reflecting exercises mass conservation; a mixed condition (first
    // class absorbing, if any) exercises the killed semigroup
    let mut conditions = vec![("reflecting", BoundaryCondition::reflecting())];
    if let Some(first) = ctx.trunc.classes().keys().next() {
        conditions.push((
            "mixed",
            BoundaryCondition::reflecting().with_class(first.clone(), Condition::Absorbing),
        ));
    }
    for (label, bc) in conditions {
        let l = match build(&bc) {
            Ok(l) => l,
            Err(e) => return Some((json!({ "bc": label }), e.to_string())),
        };
        if let Err(e) = markov_checks(&l, &samples, &times) {
            return Some((json!({ "bc": label, "sample_seed": seed }), e.to_string()));
        }
    }
    None
}

//! Boundary value problems on truncations: harmonic solves, the spectral
//! lower bound for the zero-data generator, towers of deepening truncations,
//! series reduction of chains, and the pendant-chain obstruction table.
//!
//! A function is harmonic at a vertex when its value is the conductance
//! weighted average of the neighboring values.  Boundary vertices of a
//! truncation are the frontier plus every vertex of host degree one; they
//! carry prescribed data and the solve determines the interior.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::forms::VertexFunction;
use crate::graph::{GraphSource, VertexId, VertexWeightScheme, WeightedGraph};
use crate::metric::{components_after_cut, diameter, truncate, CutWitness, Truncation};
use crate::solver::{cg_solve, dense_spd_solve, sym_eigen_sorted, SparseRows};
use crate::{Error, Result};

/// Default stop threshold on the conductance-scaled residual.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Largest system handed to the dense factorization by default.
pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    /// Conjugate gradient first, dense factorization if it stalls and the
    /// system is small enough.
    Auto,
    ConjugateGradient,
    Dense,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    pub method: SolveMethod,
    pub tolerance: f64,
    /// Largest number of unknowns the dense path accepts.
    pub dense_cap: usize,
    /// Cap on conjugate-gradient iterations; ten times the unknown count
    /// when unset.
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolveMethod::Auto,
            tolerance: DEFAULT_TOLERANCE,
            dense_cap: DEFAULT_DENSE_CAP,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn dense() -> Self {
        SolverConfig { method: SolveMethod::Dense, ..Default::default() }
    }
}

/// Boundary data for a truncation, resolved per boundary vertex in the
/// order: explicit vertex entry, then the frontier class entry, then the
/// default.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundarySpec {
    /// Data per frontier class display name.
    pub classes: BTreeMap<String, f64>,
    /// Data per explicit vertex; takes precedence over class data.
    pub vertices: BTreeMap<VertexId, f64>,
    /// Fallback for boundary vertices not covered above.
    pub default: Option<f64>,
}

impl BoundarySpec {
    pub fn constant(c: f64) -> Self {
        BoundarySpec { default: Some(c), ..Default::default() }
    }

    pub fn with_class(mut self, name: impl Into<String>, x: f64) -> Self {
        self.classes.insert(name.into(), x);
        self
    }

    pub fn with_vertex(mut self, v: impl Into<VertexId>, x: f64) -> Self {
        self.vertices.insert(v.into(), x);
        self
    }

    pub fn with_default(mut self, x: f64) -> Self {
        self.default = Some(x);
        self
    }

    /// Data constant on each side of a cut: boundary vertices in the same
    /// post-cut component as `anchor` take `inside`, the rest `outside`.
    /// This is the finite-depth form of a datum that is locally constant on
    /// a clopen piece of the boundary.
    pub fn clopen(
        trunc: &Truncation,
        witness: &CutWitness,
        anchor: &VertexId,
        inside: f64,
        outside: f64,
    ) -> Result<Self> {
        let labeling = components_after_cut(trunc.host(), &witness.edges)?;
        let side = labeling
            .label_of(anchor)
            .ok_or_else(|| Error::UnknownVertex(anchor.to_string()))?;
        let mut vertices = BTreeMap::new();
        for v in trunc.boundary_vertices() {
            let x = if labeling.label_of(&v) == Some(side) { inside } else { outside };
            vertices.insert(v, x);
        }
        Ok(BoundarySpec { vertices, ..Default::default() })
    }

    /// Value at each boundary vertex of the truncation.
    pub fn resolve(&self, trunc: &Truncation) -> Result<BTreeMap<VertexId, f64>> {
        let mut out = BTreeMap::new();
        for v in trunc.boundary_vertices() {
            let class_value = trunc
                .frontier()
                .get(&v)
                .and_then(|p| self.classes.get(&p.name))
                .copied();
            let x = self
                .vertices
                .get(&v)
                .copied()
                .or(class_value)
                .or(self.default)
                .ok_or_else(|| Error::MissingBoundaryDatum(v.to_string()))?;
            out.insert(v, x);
        }
        Ok(out)
    }
}

/// A harmonic extension problem: prescribed boundary data on a truncation.
#[derive(Debug, Clone)]
pub struct DirichletProblem<'a> {
    pub truncation: &'a Truncation,
    pub boundary: BoundarySpec,
    pub config: SolverConfig,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(truncation: &'a Truncation, boundary: BoundarySpec) -> Self {
        DirichletProblem { truncation, boundary, config: SolverConfig::default() }
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }
}

/// Solution of a [`DirichletProblem`].
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicSolution {
    /// Solved interior values together with the pinned boundary data.
    pub values: VertexFunction,
    /// Largest weighted-average residual over the solved vertices.
    pub residual_norm: f64,
    /// Conjugate-gradient iterations; zero for a direct solve.
    pub iterations: usize,
}

/// Weighted-average residual `f(v) - (sum C(u,v) f(u)) / (sum C(u,v))` at
/// every vertex of degree at least two.
pub fn harmonic_residual(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    let fv = f.to_vec(g)?;
    let mut out = BTreeMap::new();
    for v in 0..g.vertex_count() {
        if g.degree(v) < 2 {
            continue;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &(u, r) in g.adj(v) {
            num += fv[u] / r;
            den += 1.0 / r;
        }
        out.insert(g.vertex(v).clone(), fv[v] - num / den);
    }
    Ok(VertexFunction::new(out))
}

/// Solves the weighted-average equations on the non-boundary vertices
/// against the resolved boundary data.
pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<HarmonicSolution> {
    let trunc = problem.truncation;
    let g = trunc.host();
    let n = g.vertex_count();
    let data = problem.boundary.resolve(trunc)?;
    if data.is_empty() {
        return Err(Error::DisconnectedFromBoundary("host has no boundary vertices".into()));
    }

    let mut value = vec![0.0; n];
    let mut pinned = vec![false; n];
    for (v, &x) in &data {
        let i = g.index_of(v)?;
        pinned[i] = true;
        value[i] = x;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !pinned[i]).collect();

    if !free.is_empty() {
        reach_check(g, &pinned)?;
        let col: BTreeMap<usize, usize> =
            free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut rows: SparseRows = Vec::with_capacity(free.len());
        let mut rhs = vec![0.0; free.len()];
        for (k, &v) in free.iter().enumerate() {
            let mut row = Vec::with_capacity(g.degree(v) + 1);
            let mut diag = 0.0;
            for &(u, r) in g.adj(v) {
                let c = 1.0 / r;
                diag += c;
                if let Some(&j) = col.get(&u) {
                    row.push((j, -c));
                } else {
                    rhs[k] += c * value[u];
                }
            }
            row.push((k, diag));
            rows.push(row);
        }

        let (x, iterations) = solve_system(&rows, &rhs, &problem.config)?;
        for (k, &v) in free.iter().enumerate() {
            value[v] = x[k];
        }
        let residual_norm = free
            .iter()
            .map(|&v| {
                let mut num = 0.0;
                let mut den = 0.0;
                for &(u, r) in g.adj(v) {
                    num += value[u] / r;
                    den += 1.0 / r;
                }
                (value[v] - num / den).abs()
            })
            .fold(0.0, f64::max);
        return Ok(HarmonicSolution {
            values: VertexFunction::from_vec(g, &value),
            residual_norm,
            iterations,
        });
    }

    Ok(HarmonicSolution {
        values: VertexFunction::from_vec(g, &value),
        residual_norm: 0.0,
        iterations: 0,
    })
}

/// Every free vertex must reach a pinned vertex through the host.
fn reach_check(g: &WeightedGraph, pinned: &[bool]) -> Result<()> {
    let n = g.vertex_count();
    let mut seen = pinned.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| pinned[i]).collect();
    while let Some(v) = queue.pop_front() {
        for &(u, _) in g.adj(v) {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(i) => Err(Error::DisconnectedFromBoundary(g.vertex(i).to_string())),
        None => Ok(()),
    }
}

fn solve_system(rows: &SparseRows, rhs: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, usize)> {
    let k = rhs.len();
    let dense = |rows: &SparseRows| -> Result<(Vec<f64>, usize)> {
        let mut a = DMatrix::zeros(k, k);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] = v;
            }
        }
        Ok((dense_spd_solve(a, rhs)?, 0))
    };
    match config.method {
        SolveMethod::ConjugateGradient => {
            cg_solve(rows, rhs, config.tolerance, config.max_iterations)
        }
        SolveMethod::Dense => {
            if k > config.dense_cap {
                return Err(Error::MethodCapExceeded { size: k, cap: config.dense_cap });
            }
            dense(rows)
        }
        SolveMethod::Auto => {
            match cg_solve(rows, rhs, config.tolerance, config.max_iterations) {
                Ok(out) => Ok(out),
                Err(Error::SolverDiverged { .. }) if k <= config.dense_cap => dense(rows),
                Err(e) => Err(e),
            }
        }
    }
}

/// Report of the smallest eigenvalue of the zero-data generator.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaMinReport {
    pub eigenvalue: f64,
    /// `1 / (4 mu(host) diam(host))`.
    pub lower_bound: f64,
    /// Whether `eigenvalue >= lower_bound`.
    pub pass: bool,
    /// Number of free vertices in the eigenproblem.
    pub dimension: usize,
}

/// Smallest eigenvalue of the generator with zero data everywhere beyond the
/// free vertices, compared against the coarse bound
/// `1/(4 mu(host) diam(host))`.
///
/// Free vertices are the interior plus the frontier.  A frontier vertex
/// keeps a diagonal term for its truncated ray edge, a virtual zero neighbor
/// one edge beyond the host.  Degree-one non-frontier vertices are pinned to
/// zero when `absorb_leaves` is set, and left free otherwise.
pub fn lambda_min_dirichlet(
    trunc: &Truncation,
    absorb_leaves: bool,
    cap: usize,
) -> Result<LambdaMinReport> {
    let g = trunc.host();
    let n = g.vertex_count();
    let mut free = Vec::new();
    let mut any_pinned = false;
    for i in 0..n {
        let id = g.vertex(i);
        if trunc.is_frontier(id) {
            free.push(i);
        } else if g.degree(i) <= 1 && absorb_leaves {
            any_pinned = true;
        } else {
            free.push(i);
        }
    }
    if !any_pinned && trunc.frontier().is_empty() {
        return Err(Error::DisconnectedFromBoundary(
            "no absorbing boundary: the generator would have a constant kernel".into(),
        ));
    }
    if free.is_empty() {
        return Err(Error::CheckFailed("no free vertices to form the eigenproblem".into()));
    }
    if free.len() > cap {
        return Err(Error::HostTooLarge { size: free.len(), cap });
    }

    // similarity transform by mu^{1/2} makes the generator symmetric:
    // S(v,w) = -C(v,w)/sqrt(mu(v) mu(w)), same spectrum
    let col: BTreeMap<usize, usize> = free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut s = DMatrix::zeros(free.len(), free.len());
    for (k, &v) in free.iter().enumerate() {
        let mut diag = 0.0;
        for &(u, r) in g.adj(v) {
            let c = 1.0 / r;
            diag += c;
            if let Some(&j) = col.get(&u) {
                s[(k, j)] = -c / (g.mu_at(v) * g.mu_at(u)).sqrt();
            }
        }
        if let Some(ray_r) = trunc.ray_resistance(g.vertex(v)) {
            diag += 1.0 / ray_r;
        }
        s[(k, k)] = diag / g.mu_at(v);
    }
    let (vals, _) = sym_eigen_sorted(s);
    let eigenvalue = vals[0];
    let lower_bound = 1.0 / (4.0 * g.mu_total() * diameter(g)?);
    Ok(LambdaMinReport {
        eigenvalue,
        lower_bound,
        pass: eigenvalue >= lower_bound,
        dimension: free.len(),
    })
}

/// Boundary data reusable across the depths of a tower.
#[derive(Debug, Clone)]
pub enum TowerBoundary {
    /// The same datum everywhere at every depth.
    Constant(f64),
    /// `inside` on boundary vertices cut off together with `anchor` by the
    /// witness edges, `outside` on the rest.
    Clopen { witness: CutWitness, anchor: VertexId, inside: f64, outside: f64 },
    /// Chain-limit datum on every frontier class, shared datum on degree-one
    /// vertices (the pendants of a chain source).
    ChainWithLeaves { limit: f64, leaf: f64 },
}

impl TowerBoundary {
    pub fn spec_at(&self, trunc: &Truncation) -> Result<BoundarySpec> {
        match self {
            TowerBoundary::Constant(c) => Ok(BoundarySpec::constant(*c)),
            TowerBoundary::Clopen { witness, anchor, inside, outside } => {
                BoundarySpec::clopen(trunc, witness, anchor, *inside, *outside)
            }
            TowerBoundary::ChainWithLeaves { limit, leaf } => {
                let mut spec = BoundarySpec::default().with_default(*leaf);
                for name in trunc.classes().keys() {
                    spec.classes.insert(name.clone(), *limit);
                }
                Ok(spec)
            }
        }
    }
}

/// Solutions along increasing depths with Cauchy diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TowerReport {
    pub depths: Vec<usize>,
    pub solutions: Vec<HarmonicSolution>,
    /// Sup difference of consecutive solutions over shared vertices.
    pub sup_diffs: Vec<f64>,
}

/// Solves the same boundary data on deeper and deeper truncations and
/// reports how much consecutive solutions move on shared vertices.  The
/// differences shrink when the data extends continuously; they stall when
/// it cannot.
pub fn harmonic_extension_tower(
    source: &GraphSource,
    scheme: &VertexWeightScheme,
    data: &TowerBoundary,
    depths: &[usize],
    config: &SolverConfig,
) -> Result<TowerReport> {
    if depths.is_empty() {
        return Err(Error::BadSpec("tower needs at least one depth".into()));
    }
    for w in depths.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::BadDepth(w[1]));
        }
    }
    let mut solutions: Vec<HarmonicSolution> = Vec::with_capacity(depths.len());
    let mut sup_diffs = Vec::new();
    for &d in depths {
        let trunc = truncate(source, d, scheme)?;
        let spec = data.spec_at(&trunc)?;
        let sol = solve_dirichlet(
            &DirichletProblem { truncation: &trunc, boundary: spec, config: *config },
        )?;
        if let Some(prev) = solutions.last() {
            let mut sup = 0.0f64;
            for (v, &x) in prev.values.iter() {
                let y = sol.values.get(v).ok_or_else(|| {
                    Error::DomainMismatch(format!("vertex {v} lost at depth {d}"))
                })?;
                sup = sup.max((y - x).abs());
            }
            sup_diffs.push(sup);
        }
        solutions.push(sol);
    }
    Ok(TowerReport { depths: depths.to_vec(), solutions, sup_diffs })
}

/// A chain of degree-two vertices replaced by one edge.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReduction {
    pub reduced: WeightedGraph,
    pub anchors: (VertexId, VertexId),
    pub chain: Vec<VertexId>,
    /// Distance from the first anchor to each chain vertex along the chain.
    pub offsets: Vec<f64>,
    /// Total resistance of the replaced chain, the new edge's resistance.
    pub total: f64,
}

impl SeriesReduction {
    /// Extends values on the reduced graph back to the chain vertices by
    /// linear interpolation in distance between the anchor values.
    pub fn interpolate(&self, reduced_values: &VertexFunction) -> Result<VertexFunction> {
        let fa = reduced_values.get(&self.anchors.0).ok_or_else(|| {
            Error::DomainMismatch(format!("no value at anchor {}", self.anchors.0))
        })?;
        let fb = reduced_values.get(&self.anchors.1).ok_or_else(|| {
            Error::DomainMismatch(format!("no value at anchor {}", self.anchors.1))
        })?;
        let mut out = reduced_values.clone();
        for (v, off) in self.chain.iter().zip(&self.offsets) {
            out.set(v.clone(), fa + (fb - fa) * off / self.total);
        }
        Ok(out)
    }
}

/// Replaces a chain of interior degree-two vertices between two anchors by a
/// single edge carrying the summed resistance.  Harmonic values along the
/// chain are linear in distance, so the reduction preserves harmonic
/// solutions at every remaining vertex.
pub fn series_reduce(g: &WeightedGraph, chain: &[VertexId]) -> Result<SeriesReduction> {
    if chain.is_empty() {
        return Err(Error::NotAChain("empty chain".into()));
    }
    let mut idx = Vec::with_capacity(chain.len());
    for v in chain {
        let i = g.index_of(v)?;
        if g.degree(i) != 2 {
            return Err(Error::NotAChain(format!("{v} has degree {}", g.degree(i))));
        }
        if idx.contains(&i) {
            return Err(Error::NotAChain(format!("{v} repeats")));
        }
        idx.push(i);
    }
    for (a, b) in idx.iter().zip(idx.iter().skip(1)) {
        if !g.adj(*a).iter().any(|&(u, _)| u == *b) {
            return Err(Error::NotAChain(format!(
                "{} and {} are not adjacent",
                g.vertex(*a),
                g.vertex(*b)
            )));
        }
    }
    let outer = |end: usize, inward: usize| -> Result<(usize, f64)> {
        let picks = g
            .adj(end)
            .iter()
            .filter(|&&(u, _)| u != inward)
            .copied()
            .collect::<Vec<_>>();
        match picks.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::NotAChain(format!("{} has no unique anchor", g.vertex(end)))),
        }
    };
    let ((a, r_first), (b, r_last)) = if idx.len() == 1 {
        // a lone degree-two vertex: its two neighbors are the anchors
        let mut nb = g.adj(idx[0]).to_vec();
        nb.sort_by_key(|&(u, _)| u);
        (nb[0], nb[1])
    } else {
        (outer(idx[0], idx[1])?, outer(idx[idx.len() - 1], idx[idx.len() - 2])?)
    };
    if a == b {
        return Err(Error::NotAChain("chain closes a cycle".into()));
    }
    if idx.contains(&a) || idx.contains(&b) {
        return Err(Error::NotAChain("anchor lies on the chain".into()));
    }
    if g.adj(a).iter().any(|&(u, _)| u == b) {
        return Err(Error::NotAChain("anchors already share an edge".into()));
    }

    let mut offsets = Vec::with_capacity(idx.len());
    let mut total = r_first;
    offsets.push(total);
    for (u, v) in idx.iter().zip(idx.iter().skip(1)) {
        let r = g
            .adj(*u)
            .iter()
            .find(|&&(w, _)| w == *v)
            .map(|&(_, r)| r)
            .expect("adjacency checked above");
        total += r;
        offsets.push(total);
    }
    total += r_last;

    let chain_set: Vec<usize> = idx.clone();
    let mut edges = Vec::new();
    for &(u, v, r) in g.edge_triples() {
        if chain_set.contains(&u) || chain_set.contains(&v) {
            continue;
        }
        edges.push(crate::graph::EdgeRecord::new(g.vertex(u).clone(), g.vertex(v).clone(), r));
    }
    edges.push(crate::graph::EdgeRecord::new(g.vertex(a).clone(), g.vertex(b).clone(), total));
    let mu: BTreeMap<VertexId, f64> = (0..g.vertex_count())
        .filter(|i| !chain_set.contains(i))
        .map(|i| (g.vertex(i).clone(), g.mu_at(i)))
        .collect();
    let reduced = WeightedGraph::build_finite(&edges, &VertexWeightScheme::Explicit(mu))?;

    Ok(SeriesReduction {
        reduced,
        anchors: (g.vertex(a).clone(), g.vertex(b).clone()),
        chain: chain.to_vec(),
        offsets,
        total,
    })
}

/// One depth of the pendant-chain obstruction table.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionRow {
    pub depth: usize,
    /// Value of the solution at the chain root `v0`.
    pub root_value: f64,
    /// Ratio to the previous row's root value when the rows are one depth
    /// apart.
    pub ratio: Option<f64>,
    pub residual_norm: f64,
}

/// Solutions of the pendant-chain problem (pendants at zero, chain limit at
/// one) across depths.  The root values decay geometrically instead of
/// stabilizing: the chain-limit datum and the averages forced by the zero
/// pendants make contradictory demands, so no harmonic extension attains
/// this boundary data.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionTable {
    pub rows: Vec<ObstructionRow>,
    /// Limit of the successive root-value ratios, `2 - sqrt(2)`.
    pub ratio_limit: f64,
    /// Datum prescribed at the chain limit.
    pub limit_datum: f64,
    /// The value deep chain vertices would need instead: with the pendants
    /// held at zero, the conductance-weighted average of a deep vertex's
    /// neighbors tends to `(C_prev + C_next) / (C_prev + C_next + C_pendants)
    /// = 3/4` when the chain values approach the limit datum.  The two
    /// requirements disagree, which is the obstruction.
    pub averaged_requirement: f64,
}

/// Depth beyond which the pendant banks are built lumped; one bank vertex is
/// electrically identical to the individual pendants for shared pendant data,
/// and the full host doubles per depth.
const LUMP_BEYOND: usize = 12;

/// Tabulates the pendant-chain solves over strictly increasing depths (at
/// least three) and checks the expected decay: root values strictly
/// decrease, and past depth 20 the consecutive ratios sit within 0.01 of
/// `2 - sqrt(2)`.
pub fn pendant_chain_obstruction(
    depths: &[usize],
    config: &SolverConfig,
) -> Result<ObstructionTable> {
    if depths.len() < 3 {
        return Err(Error::BadSpec("obstruction table needs at least three depths".into()));
    }
    for w in depths.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::BadDepth(w[1]));
        }
    }
    if depths[0] == 0 {
        return Err(Error::BadDepth(0));
    }

    let data = TowerBoundary::ChainWithLeaves { limit: 1.0, leaf: 0.0 };
    let mut rows: Vec<ObstructionRow> = Vec::with_capacity(depths.len());
    for &d in depths {
        let source = if d <= LUMP_BEYOND {
            GraphSource::pendant_chain()
        } else {
            GraphSource::pendant_chain_lumped()
        };
        let trunc = truncate(&source, d, &VertexWeightScheme::HalfEdgeLength)?;
        let spec = data.spec_at(&trunc)?;
        let sol = solve_dirichlet(
            &DirichletProblem { truncation: &trunc, boundary: spec, config: *config },
        )?;
        let root = sol
            .values
            .get(&VertexId::Spine(0))
            .ok_or_else(|| Error::UnknownVertex("v0".into()))?;
        let ratio = rows
            .last()
            .filter(|prev| prev.depth + 1 == d)
            .map(|prev| root / prev.root_value);
        rows.push(ObstructionRow {
            depth: d,
            root_value: root,
            ratio,
            residual_norm: sol.residual_norm,
        });
    }

    let ratio_limit = 2.0 - 2.0f64.sqrt();
    for w in rows.windows(2) {
        if !(w[1].root_value < w[0].root_value && w[1].root_value > 0.0) {
            return Err(Error::CheckFailed(format!(
                "root values must decay strictly through zero: {} at depth {}, {} at depth {}",
                w[0].root_value, w[0].depth, w[1].root_value, w[1].depth
            )));
        }
    }
    for row in &rows {
        if row.depth >= 20 {
            if let Some(r) = row.ratio {
                if (r - ratio_limit).abs() > 0.01 {
                    return Err(Error::CheckFailed(format!(
                        "ratio {r} at depth {} strays from {ratio_limit}",
                        row.depth
                    )));
                }
            }
        }
    }

    Ok(ObstructionTable {
        rows,
        ratio_limit,
        limit_datum: 1.0,
        averaged_requirement: 0.75,
    })
}

//! Generators with absorbing or reflecting conditions at the truncation
//! frontier, the heat semigroup `exp(-tL)`, Markov property checks, and the
//! edge-boundary decay bound.
//!
//! An absorbing frontier class keeps its truncated ray edge as a virtual
//! neighbor pinned at zero, so the frontier row gains the diagonal term
//! `C_ray / mu`.  A reflecting class simply has no such term: the truncated
//! edge is dropped and the frontier vertex behaves like an ordinary vertex
//! of its host degree.  With every class reflecting the generator is the
//! bare Q-matrix and constants are an exact kernel vector.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::forms::VertexFunction;
use crate::graph::{EdgeRecord, GraphSource, VertexId, VertexWeightScheme, WeightedGraph};
use crate::metric::{truncate, Truncation};
use crate::solver::{cg_solve, sym_eigen_sorted, SparseRows};
use crate::{Error, Result};

/// Largest host the dense eigendecomposition path accepts.
pub const EIGEN_CAP: usize = 2000;

/// What happens to heat crossing a boundary class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// The class drains: a virtual zero-valued neighbor sits one ray edge
    /// beyond each frontier vertex of the class.
    Absorbing,
    /// The class reflects: the truncated ray edge is dropped.
    Reflecting,
}

/// Assignment of a [`Condition`] to every boundary class of a truncation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundaryCondition {
    /// Per-class conditions by class display name.
    pub classes: BTreeMap<String, Condition>,
    /// Fallback for classes not listed.
    pub default: Option<Condition>,
}

impl BoundaryCondition {
    pub fn all(c: Condition) -> Self {
        BoundaryCondition { classes: BTreeMap::new(), default: Some(c) }
    }

    pub fn absorbing() -> Self {
        Self::all(Condition::Absorbing)
    }

    pub fn reflecting() -> Self {
        Self::all(Condition::Reflecting)
    }

    pub fn with_class(mut self, name: impl Into<String>, c: Condition) -> Self {
        self.classes.insert(name.into(), c);
        self
    }

    fn condition_of(&self, class_name: &str) -> Option<Condition> {
        self.classes.get(class_name).copied().or(self.default)
    }
}

/// The generator `L` over the host vertices: `(L f)(v) = mu(v)^-1
/// (sum_u C(u,v)(f(v) - f(u)) + C_virtual(v) f(v))`.
///
/// Conductances and weights are stored separately, so `mu(v) L(v,w)` is
/// exactly `-C(v,w)` and all-reflecting row sums cancel exactly.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    ids: Vec<VertexId>,
    mu: Vec<f64>,
    /// Host conductances per row, ascending by column.
    cond: Vec<Vec<(usize, f64)>>,
    /// Conductance of the virtual absorbing edge per vertex, zero elsewhere.
    virtual_diag: Vec<f64>,
    /// Frontier vertices that carry a virtual absorbing edge.
    absorbing: Vec<VertexId>,
    /// Eigendecomposition of the symmetrized generator, filled on first use
    /// so Markov sweeps over many samples factorize once.
    eigen: OnceLock<Arc<(Vec<f64>, DMatrix<f64>)>>,
}

/// Builds the generator for a truncation under a total boundary condition.
pub fn assemble_generator(
    trunc: &Truncation,
    bc: &BoundaryCondition,
) -> Result<GeneratorMatrix> {
    let g = trunc.host();
    let n = g.vertex_count();
    let mut virtual_diag = vec![0.0; n];
    let mut absorbing = Vec::new();
    for (v, point) in trunc.frontier() {
        let condition = bc
            .condition_of(&point.name)
            .ok_or_else(|| Error::IncompleteBoundaryCondition(point.name.clone()))?;
        if condition == Condition::Absorbing {
            let r = trunc.ray_resistance(v).ok_or_else(|| {
                Error::BadSpec(format!("frontier vertex {v} has no recorded ray edge"))
            })?;
            let i = g.index_of(v)?;
            virtual_diag[i] = 1.0 / r;
            absorbing.push(v.clone());
        }
    }
    Ok(GeneratorMatrix {
        ids: g.vertex_ids().to_vec(),
        mu: (0..n).map(|i| g.mu_at(i)).collect(),
        cond: (0..n)
            .map(|v| {
                let mut row: Vec<(usize, f64)> =
                    g.adj(v).iter().map(|&(u, r)| (u, 1.0 / r)).collect();
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect(),
        virtual_diag,
        absorbing,
        eigen: OnceLock::new(),
    })
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.cond.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn index_of(&self, v: &VertexId) -> Result<usize> {
        self.ids.binary_search(v).map_err(|_| Error::UnknownVertex(v.to_string()))
    }

    /// Frontier vertices with a virtual absorbing edge.
    pub fn absorbing_vertices(&self) -> &[VertexId] {
        &self.absorbing
    }

    /// Conductance of the virtual absorbing edge at vertex `i`.
    pub fn virtual_conductance(&self, i: usize) -> f64 {
        self.virtual_diag[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            let host: f64 = self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum();
            return host + self.virtual_diag[i] / self.mu[i];
        }
        self.cond[i]
            .iter()
            .find(|&&(col, _)| col == j)
            .map(|&(_, c)| -c / self.mu[i])
            .unwrap_or(0.0)
    }

    /// `L f` in vertex order.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let host: f64 =
                    self.cond[i].iter().map(|&(j, c)| c * (f[i] - f[j])).sum();
                (host + self.virtual_diag[i] * f[i]) / self.mu[i]
            })
            .collect()
    }

    /// Row sums; without virtual edges the quotients cancel term by term and
    /// the sums are exactly zero.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let off: f64 = self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum();
                let diag: f64 = self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum::<f64>()
                    + self.virtual_diag[i] / self.mu[i];
                diag - off
            })
            .collect()
    }

    /// Energy of the generator: `<L f, f>_mu`, a conductance-weighted sum of
    /// squared increments plus the virtual absorbing terms.
    pub fn form_value(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for &(j, c) in &self.cond[i] {
                if j > i {
                    acc += c * (f[i] - f[j]) * (f[i] - f[j]);
                }
            }
            acc += self.virtual_diag[i] * f[i] * f[i];
        }
        acc
    }

    /// `sum f g mu`.
    pub fn mu_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mu).map(|((a, b), m)| a * b * m).sum()
    }

    /// `sum p mu`.
    pub fn mass(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.mu).map(|(a, m)| a * m).sum()
    }

    /// The symmetric matrix `D^{1/2} L D^{-1/2}` with `D = diag(mu)`; it has
    /// the same spectrum as `L`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for &(j, c) in &self.cond[i] {
                s[(i, j)] = -c / (self.mu[i] * self.mu[j]).sqrt();
            }
            s[(i, i)] = self.entry(i, i);
        }
        s
    }

    /// Sparse rows of the symmetrized matrix.
    fn symmetrized_rows(&self) -> SparseRows {
        (0..self.dim())
            .map(|i| {
                let mut row: Vec<(usize, f64)> = self.cond[i]
                    .iter()
                    .map(|&(j, c)| (j, -c / (self.mu[i] * self.mu[j]).sqrt()))
                    .collect();
                row.push((i, self.entry(i, i)));
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect()
    }

    /// Upper bound on the spectrum by Gershgorin discs.
    pub fn gershgorin_max(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let radius: f64 =
                    self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum();
                self.entry(i, i) + radius
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue, by dense symmetric eigendecomposition.
    pub fn lambda_min(&self) -> Result<f64> {
        if self.dim() > EIGEN_CAP {
            return Err(Error::MethodCapExceeded { size: self.dim(), cap: EIGEN_CAP });
        }
        Ok(self.eigen_pair().0[0])
    }

    fn eigen_pair(&self) -> Arc<(Vec<f64>, DMatrix<f64>)> {
        self.eigen.get_or_init(|| Arc::new(sym_eigen_sorted(self.symmetrized()))).clone()
    }

    fn values_in_order(&self, f: &VertexFunction) -> Result<Vec<f64>> {
        self.ids
            .iter()
            .map(|v| {
                f.get(v).ok_or_else(|| {
                    Error::DomainMismatch(format!("function has no value at {v}"))
                })
            })
            .collect()
    }
}

/// A nonnegative vertex function with unit mu-mass.
#[derive(Debug, Clone, Serialize)]
pub struct Density {
    values: VertexFunction,
}

impl Density {
    /// Validates nonnegativity and unit mass against the host weights.
    pub fn new(g: &WeightedGraph, values: VertexFunction) -> Result<Density> {
        let v = values.to_vec(g)?;
        if let Some(i) = v.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDensity(format!(
                "negative or non-finite value {} at {}",
                v[i],
                g.vertex(i)
            )));
        }
        let mass: f64 = v.iter().zip(0..g.vertex_count()).map(|(x, i)| x * g.mu_at(i)).sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDensity(format!("mass {mass} is not 1")));
        }
        Ok(Density { values })
    }

    /// The constant density `1 / mu(host)`.
    pub fn uniform(g: &WeightedGraph) -> Density {
        Density { values: VertexFunction::constant(g, 1.0 / g.mu_total()) }
    }

    /// Unit mass concentrated at one vertex.
    pub fn point(g: &WeightedGraph, v: &VertexId) -> Result<Density> {
        let mu = g.mu_of(v)?;
        let mut f = VertexFunction::constant(g, 0.0);
        f.set(v.clone(), 1.0 / mu);
        Ok(Density { values: f })
    }

    pub fn values(&self) -> &VertexFunction {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvolveMethod {
    /// Dense eigendecomposition of the symmetrized generator; exact up to
    /// rounding, hosts of at most [`EIGEN_CAP`] vertices.
    Eigen,
    /// Implicit midpoint steps with conjugate-gradient inner solves; fixed
    /// step `min(0.01, 1/lambda_max)`, unconditionally stable and
    /// norm-nonexpansive.
    CrankNicolson,
}

/// Densities along a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub densities: Vec<VertexFunction>,
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidTimes("empty time grid".into()));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidTimes("times must be finite and nonnegative".into()));
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidTimes(format!(
                "times must increase strictly: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `p(t) = exp(-tL) p0` at the listed times (strictly increasing, from 0).
pub fn evolve(
    l: &GeneratorMatrix,
    p0: &Density,
    times: &[f64],
    method: EvolveMethod,
) -> Result<Evolution> {
    evolve_function(l, p0.values(), times, method)
}

/// The semigroup applied to an arbitrary function, not necessarily a
/// density; intermediate states of a decaying evolution are composed through
/// this entry point.
pub fn evolve_function(
    l: &GeneratorMatrix,
    f0: &VertexFunction,
    times: &[f64],
    method: EvolveMethod,
) -> Result<Evolution> {
    validate_times(times)?;
    let f0v = l.values_in_order(f0)?;
    let states = match method {
        EvolveMethod::Eigen => evolve_eigen(l, &f0v, times)?,
        EvolveMethod::CrankNicolson => evolve_cn(l, &f0v, times)?,
    };
    let densities = states
        .into_iter()
        .map(|v| VertexFunction::new(zip_ids(&l.ids, &v)))
        .collect();
    Ok(Evolution { times: times.to_vec(), densities })
}

fn zip_ids(ids: &[VertexId], vals: &[f64]) -> BTreeMap<VertexId, f64> {
    ids.iter().cloned().zip(vals.iter().copied()).collect()
}

fn evolve_eigen(l: &GeneratorMatrix, p0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = l.dim();
    if n > EIGEN_CAP {
        return Err(Error::MethodCapExceeded { size: n, cap: EIGEN_CAP });
    }
    let pair = l.eigen_pair();
    let (cached_vals, vecs) = (&pair.0, &pair.1);
    // the generator is positive semidefinite; eigenvalues within rounding of
    // zero are clamped so e^{-t lambda} cannot drift above one
    let mut vals = cached_vals.clone();
    for v in &mut vals {
        if *v < 0.0 && *v > -1e-10 {
            *v = 0.0;
        }
    }
    let sqrt_mu: Vec<f64> = l.mu.iter().map(|m| m.sqrt()).collect();
    let q0: Vec<f64> = p0.iter().zip(&sqrt_mu).map(|(p, s)| p * s).collect();
    let coeff = vecs.transpose() * DMatrix::from_column_slice(n, 1, &q0);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            out.push(p0.to_vec());
            continue;
        }
        let damped: Vec<f64> =
            (0..n).map(|k| coeff[(k, 0)] * (-t * vals[k]).exp()).collect();
        let q = vecs * DMatrix::from_column_slice(n, 1, &damped);
        out.push((0..n).map(|i| q[(i, 0)] / sqrt_mu[i]).collect());
    }
    Ok(out)
}

fn evolve_cn(l: &GeneratorMatrix, p0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let gersh = l.gershgorin_max();
    let h = if gersh > 0.0 { (1.0 / gersh).min(0.01) } else { 0.01 };
    let s_rows = l.symmetrized_rows();
    let sqrt_mu: Vec<f64> = l.mu.iter().map(|m| m.sqrt()).collect();

    let half_step = |q: &[f64], step: f64| -> Result<Vec<f64>> {
        // (I + step/2 S) q_next = (I - step/2 S) q
        let sq = crate::solver::spmv(&s_rows, q);
        let rhs: Vec<f64> = q.iter().zip(&sq).map(|(a, b)| a - 0.5 * step * b).collect();
        let lhs: SparseRows = s_rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|&(j, v)| {
                        let base = if i == j { 1.0 } else { 0.0 };
                        (j, base + 0.5 * step * v)
                    })
                    .collect()
            })
            .collect();
        let (q_next, _) = cg_solve(&lhs, &rhs, 1e-12, None)
            .map_err(|e| Error::StepFailure(e.to_string()))?;
        Ok(q_next)
    };

    let mut q: Vec<f64> = p0.iter().zip(&sqrt_mu).map(|(p, s)| p * s).collect();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            out.push(p0.to_vec());
            continue;
        }
        while t - now > h * (1.0 + 1e-12) {
            q = half_step(&q, h)?;
            now += h;
        }
        let rest = t - now;
        if rest > 0.0 {
            q = half_step(&q, rest)?;
            now = t;
        }
        out.push(q.iter().zip(&sqrt_mu).map(|(a, s)| a / s).collect());
    }
    Ok(out)
}

fn pick_method(l: &GeneratorMatrix) -> EvolveMethod {
    if l.dim() <= EIGEN_CAP {
        EvolveMethod::Eigen
    } else {
        EvolveMethod::CrankNicolson
    }
}

/// Sampled inputs for [`markov_checks`].
#[derive(Debug, Clone, Default)]
pub struct MarkovSamples {
    pub densities: Vec<Density>,
    /// Functions for the absolute-value form comparison.
    pub functions: Vec<VertexFunction>,
    /// `(f, g)` pairs where `g` must be a normal contraction of `f`:
    /// `|g| <= |f|` pointwise and `|g(v) - g(u)| <= |f(v) - f(u)|` on edges.
    pub contraction_pairs: Vec<(VertexFunction, VertexFunction)>,
}

/// Verdicts of the Markov and form checks.
#[derive(Debug, Clone, Serialize)]
pub struct MarkovReport {
    /// Smallest density value seen at any sampled time.
    pub positivity_min: f64,
    /// Largest increase of the `l1(mu)` norm between consecutive times.
    pub l1_max_growth: f64,
    /// Largest increase of the sup norm between consecutive times.
    pub linf_max_growth: f64,
    /// Largest mass drift, recorded only for all-reflecting generators.
    pub mass_max_drift: Option<f64>,
    /// Largest value of `B(|f|,|f|) - B(f,f)`; nonpositive means the
    /// absolute-value comparison held on every sample.
    pub abs_form_max_excess: f64,
    /// Largest value of `(B(g,g) + |g|^2) - (B(f,f) + |f|^2)` over the
    /// contraction pairs.
    pub contraction_max_excess: f64,
    pub densities_checked: usize,
    pub functions_checked: usize,
    pub pairs_checked: usize,
}

/// Evolves each sampled density and checks positivity, the norm
/// contractions, mass conservation (all-reflecting only), and the two
/// Dirichlet-form comparisons.  Fails with the offending sample on any
/// violation.
pub fn markov_checks(
    l: &GeneratorMatrix,
    samples: &MarkovSamples,
    times: &[f64],
) -> Result<MarkovReport> {
    validate_times(times)?;
    let method = pick_method(l);
    let all_reflecting = l.absorbing.is_empty();

    let mut positivity_min = f64::INFINITY;
    let mut l1_max_growth = f64::NEG_INFINITY;
    let mut linf_max_growth = f64::NEG_INFINITY;
    let mut mass_max_drift = f64::NEG_INFINITY;

    for (k, p0) in samples.densities.iter().enumerate() {
        let p0v = l.values_in_order(p0.values())?;
        let run = evolve(l, p0, times, method)?;
        let l1 = |p: &[f64]| p.iter().zip(&l.mu).map(|(x, m)| x.abs() * m).sum::<f64>();
        let linf = |p: &[f64]| p.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let mut prev_l1 = l1(&p0v);
        let mut prev_linf = linf(&p0v);
        let mass0 = l.mass(&p0v);
        for (step, pf) in run.densities.iter().enumerate() {
            let p = l.values_in_order(pf)?;
            let low = p.iter().cloned().fold(f64::INFINITY, f64::min);
            positivity_min = positivity_min.min(low);
            if low < -1e-12 {
                return Err(Error::CheckFailed(format!(
                    "density {k} dips to {low} at t = {}",
                    run.times[step]
                )));
            }
            let (n1, ni) = (l1(&p), linf(&p));
            l1_max_growth = l1_max_growth.max(n1 - prev_l1);
            linf_max_growth = linf_max_growth.max(ni - prev_linf);
            if n1 - prev_l1 > 1e-10 || ni - prev_linf > 1e-10 {
                return Err(Error::CheckFailed(format!(
                    "density {k} norm grew at t = {}: l1 {prev_l1} -> {n1}, sup {prev_linf} -> {ni}",
                    run.times[step]
                )));
            }
            prev_l1 = n1;
            prev_linf = ni;
            if all_reflecting {
                let drift = (l.mass(&p) - mass0).abs();
                mass_max_drift = mass_max_drift.max(drift);
                if drift > 1e-10 {
                    return Err(Error::CheckFailed(format!(
                        "density {k} mass drifts by {drift} at t = {}",
                        run.times[step]
                    )));
                }
            }
        }
    }

    let mut abs_form_max_excess = f64::NEG_INFINITY;
    for (k, f) in samples.functions.iter().enumerate() {
        let fv = l.values_in_order(f)?;
        let av: Vec<f64> = fv.iter().map(|x| x.abs()).collect();
        let excess = l.form_value(&av) - l.form_value(&fv);
        abs_form_max_excess = abs_form_max_excess.max(excess);
        if excess > 0.0 {
            return Err(Error::CheckFailed(format!(
                "B(|f|,|f|) exceeds B(f,f) by {excess} on function {k}"
            )));
        }
    }

    let mut contraction_max_excess = f64::NEG_INFINITY;
    for (k, (f, g)) in samples.contraction_pairs.iter().enumerate() {
        let fv = l.values_in_order(f)?;
        let gv = l.values_in_order(g)?;
        for (i, (a, b)) in fv.iter().zip(&gv).enumerate() {
            if b.abs() > a.abs() {
                return Err(Error::CheckFailed(format!(
                    "pair {k} is not a contraction: |g| > |f| at {}",
                    l.ids[i]
                )));
            }
        }
        for i in 0..l.dim() {
            for &(j, _) in &l.cond[i] {
                if j > i && (gv[i] - gv[j]).abs() > (fv[i] - fv[j]).abs() {
                    return Err(Error::CheckFailed(format!(
                        "pair {k} is not a contraction: increment grows on ({}, {})",
                        l.ids[i], l.ids[j]
                    )));
                }
            }
        }
        let hf = l.form_value(&fv) + l.mu_inner(&fv, &fv);
        let hg = l.form_value(&gv) + l.mu_inner(&gv, &gv);
        contraction_max_excess = contraction_max_excess.max(hg - hf);
        if hg > hf {
            return Err(Error::CheckFailed(format!(
                "contraction pair {k} grows the form: {hg} > {hf}"
            )));
        }
    }

    Ok(MarkovReport {
        positivity_min,
        l1_max_growth,
        linf_max_growth,
        mass_max_drift: if all_reflecting && mass_max_drift > f64::NEG_INFINITY {
            Some(mass_max_drift)
        } else if all_reflecting {
            Some(0.0)
        } else {
            None
        },
        abs_form_max_excess,
        contraction_max_excess,
        densities_checked: samples.densities.len(),
        functions_checked: samples.functions.len(),
        pairs_checked: samples.contraction_pairs.len(),
    })
}

/// Edges with exactly one endpoint in `u`.
pub fn edge_boundary(g: &WeightedGraph, u: &[VertexId]) -> Result<Vec<EdgeRecord>> {
    let mut inside = vec![false; g.vertex_count()];
    for v in u {
        inside[g.index_of(v)?] = true;
    }
    Ok(g.edge_records()
        .into_iter()
        .filter(|e| {
            let a = g.index_of(&e.u).expect("edge endpoint");
            let b = g.index_of(&e.v).expect("edge endpoint");
            inside[a] != inside[b]
        })
        .collect())
}

/// Mass decay of a region against the edge-boundary bound.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// `P_U(t) = sum over U of p(t) mu`.
    pub mass_in_region: Vec<f64>,
    /// `-<L p(t), 1_U>_mu` at each time.
    pub analytic_derivative: Vec<f64>,
    /// The same derivative summed as flux through the region boundary,
    /// including virtual absorbing edges inside the region.
    pub flux_derivative: Vec<f64>,
    /// Largest gap between the two derivative computations.
    pub max_identity_gap: f64,
    /// Total conductance leaving the region (host crossings plus virtual
    /// absorbing edges inside).
    pub boundary_conductance: f64,
    /// `-sup p0 * boundary_conductance`; the derivative never drops below
    /// this.
    pub bound: f64,
    /// Largest gap between finite-difference slopes of `P_U` and the
    /// analytic derivative averaged over the step.
    pub fd_max_gap: f64,
}

/// Evolves `p0` and checks that the mass in `u` decays no faster than the
/// boundary conductance allows: `dP_U/dt >= -sup(p0) sum_{boundary edges} C`.
/// The derivative is computed analytically and verified against the exact
/// edge-flux identity (tolerance 1e-10) and against finite differences of
/// `P_U` (slack 1e-6).
pub fn decay_bound_check(
    l: &GeneratorMatrix,
    p0: &Density,
    u: &[VertexId],
    times: &[f64],
) -> Result<DecayReport> {
    validate_times(times)?;
    let mut inside = vec![false; l.dim()];
    for v in u {
        inside[l.index_of(v)?] = true;
    }
    let p0v = l.values_in_order(p0.values())?;
    let sup_p0 = p0v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));

    let mut boundary_conductance = 0.0;
    for i in 0..l.dim() {
        if inside[i] {
            boundary_conductance += l.virtual_diag[i];
        }
        for &(j, c) in &l.cond[i] {
            if j > i && inside[i] != inside[j] {
                boundary_conductance += c;
            }
        }
    }
    let bound = -sup_p0 * boundary_conductance;

    let run = evolve(l, p0, times, pick_method(l))?;
    let mut mass_in_region = Vec::with_capacity(times.len());
    let mut analytic = Vec::with_capacity(times.len());
    let mut flux = Vec::with_capacity(times.len());
    let mut max_identity_gap = 0.0f64;
    for pf in &run.densities {
        let p = l.values_in_order(pf)?;
        let mass: f64 =
            p.iter().zip(&l.mu).zip(&inside).filter(|(_, &m)| m).map(|((x, w), _)| x * w).sum();
        mass_in_region.push(mass);

        let lp = l.apply(&p);
        let da: f64 = -(0..l.dim())
            .filter(|&i| inside[i])
            .map(|i| lp[i] * l.mu[i])
            .sum::<f64>();
        analytic.push(da);

        let mut f = 0.0;
        for i in 0..l.dim() {
            if !inside[i] {
                continue;
            }
            f += l.virtual_diag[i] * p[i];
            for &(j, c) in &l.cond[i] {
                if !inside[j] {
                    f += c * (p[i] - p[j]);
                }
            }
        }
        flux.push(-f);
        max_identity_gap = max_identity_gap.max((da + f).abs());
    }

    if max_identity_gap > 1e-10 {
        return Err(Error::CheckFailed(format!(
            "flux identity gap {max_identity_gap} exceeds 1e-10"
        )));
    }
    for (k, &d) in analytic.iter().enumerate() {
        if d < bound - 1e-6 {
            return Err(Error::BoundViolated(format!(
                "dP/dt = {d} below {bound} at t = {}",
                times[k]
            )));
        }
    }
    let mut fd_max_gap = 0.0f64;
    for k in 0..times.len().saturating_sub(1) {
        let dt = times[k + 1] - times[k];
        let fd = (mass_in_region[k + 1] - mass_in_region[k]) / dt;
        if fd < bound - 1e-6 {
            return Err(Error::BoundViolated(format!(
                "finite-difference slope {fd} below {bound} over [{}, {}]",
                times[k],
                times[k + 1]
            )));
        }
        fd_max_gap = fd_max_gap.max((fd - 0.5 * (analytic[k] + analytic[k + 1])).abs());
    }

    Ok(DecayReport {
        times: times.to_vec(),
        mass_in_region,
        analytic_derivative: analytic,
        flux_derivative: flux,
        max_identity_gap,
        boundary_conductance,
        bound,
        fd_max_gap,
    })
}

/// Outcome of a behavioral comparison of two boundary conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CompareVerdict {
    /// The evolved densities differ measurably.
    Distinguished,
    /// The conditions differ but the probe never notices at the sampled
    /// times; reported, not a failure.
    IndistinguishableProbe,
    /// The conditions resolve identically on every class.
    IdenticalConditions,
}

/// Behavioral comparison of two boundary conditions on the same truncation.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub verdict: CompareVerdict,
    /// Largest pointwise gap between the evolved densities.
    pub sup_density_difference: f64,
    /// Largest entry gap between the two generators.
    pub sup_generator_difference: f64,
    /// Mass traces under the first and second condition.
    pub mass_first: Vec<f64>,
    pub mass_second: Vec<f64>,
}

/// Evolves the same probe under two boundary conditions and reports how the
/// behaviors differ.
pub fn compare_boundary_conditions(
    source: &GraphSource,
    scheme: &VertexWeightScheme,
    bc1: &BoundaryCondition,
    bc2: &BoundaryCondition,
    probe: &Density,
    depth: usize,
    times: &[f64],
) -> Result<CompareReport> {
    validate_times(times)?;
    let trunc = truncate(source, depth, scheme)?;
    let l1 = assemble_generator(&trunc, bc1)?;
    let l2 = assemble_generator(&trunc, bc2)?;

    let mut sup_generator_difference = 0.0f64;
    for i in 0..l1.dim() {
        sup_generator_difference = sup_generator_difference
            .max((l1.entry(i, i) - l2.entry(i, i)).abs());
    }

    let run1 = evolve(&l1, probe, times, pick_method(&l1))?;
    let run2 = evolve(&l2, probe, times, pick_method(&l2))?;
    let mut sup_density_difference = 0.0f64;
    let mut mass_first = Vec::with_capacity(times.len());
    let mut mass_second = Vec::with_capacity(times.len());
    for (a, b) in run1.densities.iter().zip(&run2.densities) {
        let av = l1.values_in_order(a)?;
        let bv = l2.values_in_order(b)?;
        for (x, y) in av.iter().zip(&bv) {
            sup_density_difference = sup_density_difference.max((x - y).abs());
        }
        mass_first.push(l1.mass(&av));
        mass_second.push(l2.mass(&bv));
    }

    let verdict = if sup_generator_difference == 0.0 {
        CompareVerdict::IdenticalConditions
    } else if sup_density_difference > 1e-12 {
        CompareVerdict::Distinguished
    } else {
        CompareVerdict::IndistinguishableProbe
    };
    Ok(CompareReport {
        verdict,
        sup_density_difference,
        sup_generator_difference,
        mass_first,
        mass_second,
    })
}

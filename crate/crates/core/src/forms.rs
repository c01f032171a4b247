//! Dirichlet energy form, weighted Laplacian, and the Q-matrix.
//!
//! For a function `f` on the vertices the energy is
//! `B(f, g) = sum over edges of C(u,v) (f(v) - f(u)) (g(v) - g(u))`,
//! one term per undirected edge.  The Laplacian weighted by `mu` is
//! `(L f)(v) = mu(v)^-1 sum_{u ~ v} C(u,v) (f(v) - f(u))`, and the two are
//! adjoint: `<L f, g>_mu = B(f, g)`.  The Q-matrix is the matrix of `L` in
//! vertex order; its rows sum to zero and it satisfies detailed balance
//! `mu(v) Q(v, w) = mu(w) Q(w, v)` exactly as assembled.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{VertexId, WeightedGraph};
use crate::metric::{distances_from_index, Distance};
use crate::{Error, Result};

/// Real-valued function on the vertices of a stated host graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction(pub BTreeMap<VertexId, f64>);

impl VertexFunction {
    pub fn new(map: BTreeMap<VertexId, f64>) -> Self {
        VertexFunction(map)
    }

    pub fn constant(g: &WeightedGraph, c: f64) -> Self {
        VertexFunction(g.vertex_ids().iter().map(|v| (v.clone(), c)).collect())
    }

    pub fn from_fn(g: &WeightedGraph, mut f: impl FnMut(&VertexId) -> f64) -> Self {
        VertexFunction(g.vertex_ids().iter().map(|v| (v.clone(), f(v))).collect())
    }

    pub fn get(&self, v: &VertexId) -> Option<f64> {
        self.0.get(v).copied()
    }

    pub fn set(&mut self, v: VertexId, x: f64) {
        self.0.insert(v, x);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &f64)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        VertexFunction(self.0.iter().map(|(v, &x)| (v.clone(), x.abs())).collect())
    }

    /// Values in host vertex order; every host vertex must carry a value.
    pub fn to_vec(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        g.vertex_ids()
            .iter()
            .map(|v| {
                self.get(v).ok_or_else(|| {
                    Error::DomainMismatch(format!("function has no value at {v}"))
                })
            })
            .collect()
    }

    pub fn from_vec(g: &WeightedGraph, vals: &[f64]) -> Self {
        VertexFunction(
            g.vertex_ids().iter().cloned().zip(vals.iter().copied()).collect(),
        )
    }

    /// `{vertex id: value}` with string keys, the interchange map format.
    pub fn to_json_map(&self) -> BTreeMap<String, f64> {
        self.0.iter().map(|(v, &x)| (v.to_string(), x)).collect()
    }
}

/// Energy form `B(f, g)`, a single pass over the edges.
pub fn bilinear_form(g: &WeightedGraph, f: &VertexFunction, h: &VertexFunction) -> Result<f64> {
    let fv = f.to_vec(g)?;
    let hv = h.to_vec(g)?;
    let mut acc = 0.0;
    for &(a, b, r) in g.edge_triples() {
        acc += (fv[b] - fv[a]) * (hv[b] - hv[a]) / r;
    }
    Ok(acc)
}

/// `<f, h>_mu = sum f h mu`.
pub fn mu_inner(g: &WeightedGraph, f: &VertexFunction, h: &VertexFunction) -> Result<f64> {
    let fv = f.to_vec(g)?;
    let hv = h.to_vec(g)?;
    Ok(fv.iter().zip(&hv).zip(0..g.vertex_count()).map(|((x, y), i)| x * y * g.mu_at(i)).sum())
}

/// Applies the mu-weighted Laplacian to `f`.
pub fn laplacian_apply(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    let fv = f.to_vec(g)?;
    let mut out = Vec::with_capacity(fv.len());
    for v in 0..g.vertex_count() {
        let mut acc = 0.0;
        for &(u, r) in g.adj(v) {
            acc += (fv[v] - fv[u]) / r;
        }
        out.push(acc / g.mu_at(v));
    }
    Ok(VertexFunction::from_vec(g, &out))
}

/// Sobolev norm `sqrt(|f|_mu^2 + B(f, f))`.
pub fn h1_norm(g: &WeightedGraph, f: &VertexFunction) -> Result<f64> {
    Ok((mu_inner(g, f, f)? + bilinear_form(g, f, f)?).sqrt())
}

/// Matrix of the mu-weighted Laplacian in vertex order.
///
/// Rows are stored as conductances next to the weight vector rather than as
/// rounded quotients, so the scaled entries satisfy detailed balance
/// `mu(v) Q(v,w) = -C(v,w) = mu(w) Q(w,v)` exactly (see [`QMatrix::scaled_entry`])
/// and each row sum cancels term by term to exactly zero.
#[derive(Debug, Clone)]
pub struct QMatrix {
    ids: Vec<VertexId>,
    mu: Vec<f64>,
    /// Off-diagonal conductances per row, ascending by column.
    cond: Vec<Vec<(usize, f64)>>,
}

/// Assembles the Q-matrix of the graph's Laplacian.
pub fn assemble_qmatrix(g: &WeightedGraph) -> QMatrix {
    let n = g.vertex_count();
    QMatrix {
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
    }
}

impl QMatrix {
    pub fn dim(&self) -> usize {
        self.cond.len()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    fn diag(&self, i: usize) -> f64 {
        self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag(i);
        }
        self.cond[i]
            .iter()
            .find(|&&(col, _)| col == j)
            .map(|&(_, c)| -c / self.mu[i])
            .unwrap_or(0.0)
    }

    /// `mu(i) Q(i, j)` evaluated without forming the quotient; off the
    /// diagonal this is exactly `-C(i, j)`, so `scaled_entry(i, j)` and
    /// `scaled_entry(j, i)` are bitwise equal.
    pub fn scaled_entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.cond[i].iter().map(|&(_, c)| c).sum();
        }
        self.cond[i]
            .iter()
            .find(|&&(col, _)| col == j)
            .map(|&(_, c)| -c)
            .unwrap_or(0.0)
    }

    /// `Q f` in vertex order.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.cond[i].iter().map(|&(j, c)| c * (f[i] - f[j])).sum::<f64>() / self.mu[i]
            })
            .collect()
    }

    /// Row sums; each is a difference of identically ordered quotient sums,
    /// hence exactly zero.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let off: f64 = self.cond[i].iter().map(|&(_, c)| c / self.mu[i]).sum();
                self.diag(i) - off
            })
            .collect()
    }

    /// Coordinate-format Matrix Market serialization, row-major, 1-based.
    pub fn to_matrix_market(&self) -> String {
        let nnz: usize = self.cond.iter().map(|row| row.len() + 1).sum();
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.dim(), self.dim(), nnz);
        for i in 0..self.dim() {
            let mut wrote_diag = false;
            for &(j, _) in &self.cond[i] {
                if j > i && !wrote_diag {
                    let _ = writeln!(out, "{} {} {:e}", i + 1, i + 1, self.entry(i, i));
                    wrote_diag = true;
                }
                let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, self.entry(i, j));
            }
            if !wrote_diag {
                let _ = writeln!(out, "{} {} {:e}", i + 1, i + 1, self.entry(i, i));
            }
        }
        out
    }
}

/// Worst slack of the metric continuity estimate
/// `|f(w) - f(v)|^2 <= 4 B(f, f) d(v, w)` over sampled pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub b_value: f64,
    /// Largest value of `|f(w) - f(v)|^2 - 4 B d(v, w)`; nonpositive means
    /// the estimate held on every pair.
    pub max_excess: f64,
    pub worst_pair: Option<(VertexId, VertexId)>,
    pub pairs_checked: usize,
}

/// Evaluates the continuity estimate on explicit vertex pairs.
pub fn continuity_modulus_check(
    g: &WeightedGraph,
    f: &VertexFunction,
    pairs: &[(VertexId, VertexId)],
) -> Result<ContinuityReport> {
    let fv = f.to_vec(g)?;
    let b = bilinear_form(g, f, f)?;
    let mut by_source: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst = None;
    let mut checked = 0;
    for (u, w) in pairs {
        let (i, j) = (g.index_of(u)?, g.index_of(w)?);
        let dist = by_source.entry(i).or_insert_with(|| distances_from_index(g, i))[j];
        checked += 1;
        if !dist.is_finite() {
            // infinite distance satisfies the estimate vacuously
            continue;
        }
        let excess = (fv[j] - fv[i]).powi(2) - 4.0 * b * dist;
        if excess > max_excess {
            max_excess = excess;
            worst = Some((u.clone(), w.clone()));
        }
    }
    Ok(ContinuityReport { b_value: b, max_excess, worst_pair: worst, pairs_checked: checked })
}

/// Distance helper reexported for report builders.
pub fn pair_distance(g: &WeightedGraph, u: &VertexId, v: &VertexId) -> Result<Distance> {
    crate::metric::distance(g, u, v)
}

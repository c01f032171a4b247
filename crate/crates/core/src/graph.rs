//! Finite weighted graphs and lazy infinite generators.
//!
//! Vertices are addressed symbolically so that infinite networks can hand out
//! neighborhoods on demand: a chain vertex is `v{n}`, a pendant hanging off
//! the chain is `u{n}_{k}`, a tree vertex is the sequence of child indices
//! from the root.  Finite graphs use plain indices or opaque names from an
//! interchange file.  Addresses are unique within one source and ordered, so
//! every traversal in the crate has a deterministic tie-break.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Symbolic vertex address, scoped to one graph source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    /// Opaque name from an interchange file.
    Named(String),
    /// Plain index in a programmatically built finite graph.
    Index(u64),
    /// Chain vertex `v{n}` of a ray or spine.
    Spine(u32),
    /// Pendant `u{n}_{k}`, the k-th leaf hanging off chain vertex n.
    Pendant(u32, u32),
    /// Tree vertex: child indices from the root (the root is the empty path).
    Path(Vec<u32>),
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Named(s) => write!(f, "{s}"),
            VertexId::Index(i) => write!(f, "{i}"),
            VertexId::Spine(n) => write!(f, "v{n}"),
            VertexId::Pendant(n, k) => write!(f, "u{n}_{k}"),
            VertexId::Path(w) => {
                write!(f, "t")?;
                for c in w {
                    write!(f, ".{c}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl Serialize for WeightedGraph {
    /// Serializes as the interchange [`GraphFile`] form.
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        if s.is_empty() {
            return Err(D::Error::custom("empty vertex id"));
        }
        Ok(VertexId::Named(s))
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::Named(s.to_string())
    }
}

/// One undirected edge with its resistance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: VertexId,
    pub v: VertexId,
    #[serde(rename = "r")]
    pub resistance: f64,
}

impl EdgeRecord {
    pub fn new(u: impl Into<VertexId>, v: impl Into<VertexId>, resistance: f64) -> Self {
        EdgeRecord { u: u.into(), v: v.into(), resistance }
    }

    /// Conductance of the edge, `1/R`.
    pub fn conductance(&self) -> f64 {
        1.0 / self.resistance
    }
}

/// Rule assigning a positive weight to every vertex.
///
/// `HalfEdgeLength` is the canonical choice: half the total resistance
/// incident to the vertex, so that the weights of a finite graph sum to its
/// volume.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexWeightScheme {
    HalfEdgeLength,
    ConductanceSum,
    Constant(f64),
    Explicit(BTreeMap<VertexId, f64>),
}

impl VertexWeightScheme {
    /// Weight of one vertex given its full incident edge list.
    pub fn weight(&self, v: &VertexId, incident: &[(VertexId, f64)]) -> Result<f64> {
        let w = match self {
            VertexWeightScheme::HalfEdgeLength => {
                0.5 * incident.iter().map(|(_, r)| r).sum::<f64>()
            }
            VertexWeightScheme::ConductanceSum => {
                incident.iter().map(|(_, r)| 1.0 / r).sum::<f64>()
            }
            VertexWeightScheme::Constant(c) => *c,
            VertexWeightScheme::Explicit(table) => *table
                .get(v)
                .ok_or_else(|| Error::BadSpec(format!("explicit weight table misses {v}")))?,
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::BadSpec(format!("vertex weight {w} at {v} is not positive")));
        }
        Ok(w)
    }
}

/// Finite simple graph with positive edge resistances and vertex weights.
///
/// Vertices are stored in ascending `VertexId` order and referred to by index
/// internally; all public iteration orders follow that order.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    mu: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Builds a finite graph from an edge list; weights come from `scheme`.
    ///
    /// Rejects self loops, duplicate unordered pairs, and non-positive
    /// resistances.  An empty edge list yields the empty graph.
    pub fn build_finite(edges: &[EdgeRecord], scheme: &VertexWeightScheme) -> Result<Self> {
        let mut g = Self::assemble(edges)?;
        g.mu = g.weights_under(scheme)?;
        Ok(g)
    }

    /// Builds a graph with explicitly supplied weights covering every vertex.
    pub fn build_with_weights(
        edges: &[EdgeRecord],
        mu: &BTreeMap<VertexId, f64>,
    ) -> Result<Self> {
        Self::build_finite(edges, &VertexWeightScheme::Explicit(mu.clone()))
    }

    fn assemble(edges: &[EdgeRecord]) -> Result<Self> {
        let mut ids: Vec<VertexId> = Vec::new();
        for e in edges {
            ids.push(e.u.clone());
            ids.push(e.v.clone());
        }
        ids.sort();
        ids.dedup();
        let index: BTreeMap<VertexId, usize> =
            ids.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();

        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for e in edges {
            let label = || format!("({}, {})", e.u, e.v);
            if e.u == e.v {
                return Err(Error::SelfLoopEdge(e.u.to_string()));
            }
            if !(e.resistance > 0.0) || !e.resistance.is_finite() {
                return Err(Error::NonPositiveResistance {
                    edge: label(),
                    resistance: e.resistance,
                });
            }
            let (a, b) = (index[&e.u], index[&e.v]);
            let key = (a.min(b), a.max(b));
            if seen.insert(key, e.resistance).is_some() {
                return Err(Error::DuplicateEdge(label()));
            }
        }

        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ids.len()];
        let mut edge_list = Vec::with_capacity(seen.len());
        for (&(a, b), &r) in &seen {
            adj[a].push((b, r));
            adj[b].push((a, r));
            edge_list.push((a, b, r));
        }
        for list in &mut adj {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(WeightedGraph { ids, index, mu: Vec::new(), adj, edges: edge_list })
    }

    /// Recomputes all vertex weights under another scheme, in place.
    pub fn weights_under(&self, scheme: &VertexWeightScheme) -> Result<Vec<f64>> {
        let mut mu = Vec::with_capacity(self.ids.len());
        for (i, id) in self.ids.iter().enumerate() {
            let incident: Vec<(VertexId, f64)> = self.adj[i]
                .iter()
                .map(|&(j, r)| (self.ids[j].clone(), r))
                .collect();
            mu.push(scheme.weight(id, &incident)?);
        }
        Ok(mu)
    }

    /// Same graph with weights re-derived from `scheme`.
    pub fn reweighted(&self, scheme: &VertexWeightScheme) -> Result<Self> {
        let mut g = self.clone();
        g.mu = g.weights_under(scheme)?;
        Ok(g)
    }

    pub(crate) fn from_parts(
        edges: Vec<EdgeRecord>,
        mu: BTreeMap<VertexId, f64>,
    ) -> Result<Self> {
        let mut g = Self::assemble(&edges)?;
        g.mu = g.weights_under(&VertexWeightScheme::Explicit(mu))?;
        Ok(g)
    }

    /// Host with one vertex and no edges; only truncations at depth zero
    /// produce these.
    pub(crate) fn single_vertex(id: VertexId, mu: &BTreeMap<VertexId, f64>) -> Result<Self> {
        let w = *mu
            .get(&id)
            .ok_or_else(|| Error::BadSpec(format!("no weight for single vertex {id}")))?;
        Ok(WeightedGraph {
            index: BTreeMap::from([(id.clone(), 0)]),
            ids: vec![id],
            mu: vec![w],
            adj: vec![Vec::new()],
            edges: Vec::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex ids in ascending order; index `i` everywhere refers to this.
    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.ids[i]
    }

    pub fn index_of(&self, v: &VertexId) -> Result<usize> {
        self.index.get(v).copied().ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    /// Looks a vertex up by its display name.
    pub fn vertex_named(&self, name: &str) -> Option<&VertexId> {
        self.ids.iter().find(|id| id.to_string() == name)
    }

    pub fn mu_at(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn mu_of(&self, v: &VertexId) -> Result<f64> {
        Ok(self.mu[self.index_of(v)?])
    }

    /// Total vertex weight of the graph.
    pub fn mu_total(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Sum of all edge resistances.
    pub fn volume(&self) -> f64 {
        self.edges.iter().map(|&(_, _, r)| r).sum()
    }

    pub(crate) fn adj(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Index triples `(u, v, r)` with `u < v`, ascending.
    pub(crate) fn edge_triples(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_records(&self) -> Vec<EdgeRecord> {
        self.edges
            .iter()
            .map(|&(a, b, r)| EdgeRecord::new(self.ids[a].clone(), self.ids[b].clone(), r))
            .collect()
    }

    /// Neighbors of `v` with edge resistances, ascending by neighbor id.
    pub fn neighbors_of(&self, v: &VertexId) -> Result<Vec<(VertexId, f64)>> {
        let i = self.index_of(v)?;
        Ok(self.adj[i].iter().map(|&(j, r)| (self.ids[j].clone(), r)).collect())
    }

    pub fn resistance_between(&self, u: &VertexId, v: &VertexId) -> Result<f64> {
        let (i, j) = (self.index_of(u)?, self.index_of(v)?);
        self.adj[i]
            .iter()
            .find(|&&(k, _)| k == j)
            .map(|&(_, r)| r)
            .ok_or_else(|| Error::EdgeNotInGraph(format!("({u}, {v})")))
    }

    /// Serializes to the interchange format (vertices with weights, edges).
    pub fn to_json(&self) -> GraphFile {
        GraphFile {
            vertices: self
                .ids
                .iter()
                .zip(&self.mu)
                .map(|(id, &mu)| VertexEntry { id: id.to_string(), mu: Some(mu) })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b, r)| EdgeFileEntry {
                    u: self.ids[a].to_string(),
                    v: self.ids[b].to_string(),
                    r,
                })
                .collect(),
        }
    }

    /// Loads from the interchange format.
    ///
    /// Vertex weights must be given for every vertex or for none; in the
    /// latter case they are derived from `scheme`.  Every declared vertex must
    /// carry at least one edge.
    pub fn from_json(file: &GraphFile, scheme: &VertexWeightScheme) -> Result<Self> {
        let edges: Vec<EdgeRecord> = file
            .edges
            .iter()
            .map(|e| EdgeRecord::new(e.u.as_str(), e.v.as_str(), e.r))
            .collect();
        let mut g = Self::assemble(&edges)?;

        let mut declared = BTreeMap::new();
        for v in &file.vertices {
            let id = VertexId::Named(v.id.clone());
            if declared.insert(id.clone(), v.mu).is_some() {
                return Err(Error::BadSpec(format!("vertex {} declared twice", v.id)));
            }
            if !g.contains(&id) {
                return Err(Error::IsolatedVertexSpecMismatch(v.id.clone()));
            }
        }
        let given: Vec<f64> = declared.values().filter_map(|m| *m).collect();
        if !given.is_empty() && given.len() != declared.len() {
            return Err(Error::BadSpec(
                "vertex weights must be given for every vertex or for none".into(),
            ));
        }
        g.mu = if declared.is_empty() || given.is_empty() {
            g.weights_under(scheme)?
        } else {
            let table: BTreeMap<VertexId, f64> =
                declared.into_iter().map(|(id, m)| (id, m.unwrap())).collect();
            g.weights_under(&VertexWeightScheme::Explicit(table))?
        };
        Ok(g)
    }
}

/// Interchange representation: `{"vertices": [{"id", "mu"?}], "edges": [{"u","v","r"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeFileEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFileEntry {
    pub u: String,
    pub v: String,
    pub r: f64,
}

/// Largest chain index for which the full pendant family is materialized;
/// beyond this a single neighborhood would hold more than 2^20 vertices.
pub const FULL_PENDANT_CAP: u32 = 20;

/// Lazy graph source: answers root and neighborhood queries without ever
/// materializing the (possibly infinite) vertex set.
///
/// All generators are deterministic: repeated queries return identical
/// neighbor lists in identical order.
#[derive(Debug, Clone)]
pub enum GraphSource {
    /// Chain `v0, v1, ...` with `R(vn, vn+1) = 2^-(n+1)`; chain vertex `n`
    /// carries `2^n` unit-resistance pendants.  The chain is a Cauchy ray of
    /// finite length while the pendant volume grows without bound, which is
    /// exactly the configuration obstructing boundary value continuity at the
    /// chain's limit point.
    PendantChain {
        /// Replace the `2^n` pendants of chain vertex `n` by one pendant of
        /// resistance `2^-n`.  Electrically equivalent for constant pendant
        /// data, and the only practical representation at large depth.
        lumped: bool,
    },
    /// Rooted `branching`-ary tree; an edge into depth `d` has resistance
    /// `ratio^d`.  For `ratio < 1` every ray has finite length and the
    /// completion attaches a Cantor set of leaves at infinity.
    GeometricTree { branching: u32, ratio: f64 },
    /// Single chain with `R(vn, vn+1) = first * ratio^n`, `ratio < 1`.
    Ray { first: f64, ratio: f64 },
    /// Geometric tree plus one cross edge of resistance `cross_ratio^n`
    /// between the two extremal depth-`n` vertices, for every `n >= 1`.
    SiblingTree { branching: u32, ratio: f64, cross_ratio: f64 },
    /// A finite graph used as a source.
    Finite(WeightedGraph),
}

impl GraphSource {
    pub fn pendant_chain() -> Self {
        GraphSource::PendantChain { lumped: false }
    }

    pub fn pendant_chain_lumped() -> Self {
        GraphSource::PendantChain { lumped: true }
    }

    pub fn geometric_tree(branching: u32, ratio: f64) -> Result<Self> {
        if branching < 2 {
            return Err(Error::BadSpec(format!("tree branching {branching} < 2")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::BadSpec(format!(
                "tree edge ratio {ratio} outside (0, 1): rays would not be Cauchy"
            )));
        }
        Ok(GraphSource::GeometricTree { branching, ratio })
    }

    pub fn ray(first: f64, ratio: f64) -> Result<Self> {
        if !(first > 0.0) || !first.is_finite() {
            return Err(Error::BadSpec(format!("ray first length {first} not positive")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::BadSpec(format!(
                "ray length ratio {ratio} outside (0, 1): lengths are non-summable, \
                 the completion adds no limit point"
            )));
        }
        Ok(GraphSource::Ray { first, ratio })
    }

    pub fn sibling_tree(branching: u32, ratio: f64, cross_ratio: f64) -> Result<Self> {
        Self::geometric_tree(branching, ratio)?;
        if !(cross_ratio > 0.0 && cross_ratio < 1.0) {
            return Err(Error::BadSpec(format!(
                "cross-edge ratio {cross_ratio} outside (0, 1): cross lengths must shrink to 0"
            )));
        }
        Ok(GraphSource::SiblingTree { branching, ratio, cross_ratio })
    }

    pub fn finite(graph: WeightedGraph) -> Result<Self> {
        if graph.vertex_count() == 0 {
            return Err(Error::BadSpec("finite source has no vertices".into()));
        }
        Ok(GraphSource::Finite(graph))
    }

    /// Truncation root: queries start here.
    pub fn root(&self) -> VertexId {
        match self {
            GraphSource::PendantChain { .. } | GraphSource::Ray { .. } => VertexId::Spine(0),
            GraphSource::GeometricTree { .. } | GraphSource::SiblingTree { .. } => {
                VertexId::Path(Vec::new())
            }
            GraphSource::Finite(g) => g.vertex(0).clone(),
        }
    }

    /// Full incident edge list of `v`: `(neighbor, resistance)` pairs in a
    /// fixed deterministic order.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<(VertexId, f64)>> {
        match self {
            GraphSource::PendantChain { lumped } => pendant_chain_neighbors(v, *lumped),
            GraphSource::GeometricTree { branching, ratio } => {
                tree_neighbors(v, *branching, *ratio)
            }
            GraphSource::Ray { first, ratio } => ray_neighbors(v, *first, *ratio),
            GraphSource::SiblingTree { branching, ratio, cross_ratio } => {
                let mut out = tree_neighbors(v, *branching, *ratio)?;
                if let VertexId::Path(w) = v {
                    let n = w.len();
                    if n >= 1 {
                        if w.iter().all(|&c| c == 0) {
                            out.push((
                                VertexId::Path(vec![*branching - 1; n]),
                                cross_ratio.powi(n as i32),
                            ));
                        } else if w.iter().all(|&c| c == *branching - 1) {
                            out.push((VertexId::Path(vec![0; n]), cross_ratio.powi(n as i32)));
                        }
                    }
                }
                Ok(out)
            }
            GraphSource::Finite(g) => g.neighbors_of(v),
        }
    }

    /// True when no edges outside a depth-`d` truncation can ever connect two
    /// of its vertices, for any `d`: the source is a tree beyond every finite
    /// ball, so finite cut checks are exact.
    pub fn acyclic_beyond_truncation(&self) -> bool {
        matches!(
            self,
            GraphSource::PendantChain { .. }
                | GraphSource::GeometricTree { .. }
                | GraphSource::Ray { .. }
        )
    }
}

fn pendant_chain_neighbors(v: &VertexId, lumped: bool) -> Result<Vec<(VertexId, f64)>> {
    // R(vn, vn+1) = 2^-(n+1); chain vertex n carries 2^n pendants of unit
    // resistance, or one lumped pendant of resistance 2^-n.
    match v {
        VertexId::Spine(n) => {
            let n = *n;
            let mut out = Vec::new();
            if n > 0 {
                out.push((VertexId::Spine(n - 1), 0.5_f64.powi(n as i32)));
            }
            out.push((VertexId::Spine(n + 1), 0.5_f64.powi(n as i32 + 1)));
            if lumped {
                out.push((VertexId::Pendant(n, 0), 0.5_f64.powi(n as i32)));
            } else {
                if n > FULL_PENDANT_CAP {
                    return Err(Error::HostTooLarge {
                        size: 1usize << n.min(63),
                        cap: 1usize << FULL_PENDANT_CAP,
                    });
                }
                for k in 0..(1u64 << n) {
                    out.push((VertexId::Pendant(n, k as u32), 1.0));
                }
            }
            Ok(out)
        }
        VertexId::Pendant(n, k) => {
            let valid = if lumped { *k == 0 } else { u64::from(*k) < (1u64 << (*n).min(63)) };
            if !valid {
                return Err(Error::UnknownVertex(v.to_string()));
            }
            let r = if lumped { 0.5_f64.powi(*n as i32) } else { 1.0 };
            Ok(vec![(VertexId::Spine(*n), r)])
        }
        other => Err(Error::UnknownVertex(other.to_string())),
    }
}

fn tree_neighbors(v: &VertexId, branching: u32, ratio: f64) -> Result<Vec<(VertexId, f64)>> {
    let w = match v {
        VertexId::Path(w) => w,
        other => return Err(Error::UnknownVertex(other.to_string())),
    };
    if w.iter().any(|&c| c >= branching) {
        return Err(Error::UnknownVertex(v.to_string()));
    }
    let d = w.len() as i32;
    let mut out = Vec::new();
    if !w.is_empty() {
        out.push((VertexId::Path(w[..w.len() - 1].to_vec()), ratio.powi(d)));
    }
    for c in 0..branching {
        let mut child = w.clone();
        child.push(c);
        out.push((VertexId::Path(child), ratio.powi(d + 1)));
    }
    Ok(out)
}

fn ray_neighbors(v: &VertexId, first: f64, ratio: f64) -> Result<Vec<(VertexId, f64)>> {
    match v {
        VertexId::Spine(n) => {
            let mut out = Vec::new();
            if *n > 0 {
                out.push((VertexId::Spine(n - 1), first * ratio.powi(*n as i32 - 1)));
            }
            out.push((VertexId::Spine(n + 1), first * ratio.powi(*n as i32)));
            Ok(out)
        }
        other => Err(Error::UnknownVertex(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_path() -> Vec<EdgeRecord> {
        vec![EdgeRecord::new("a", "b", 0.5), EdgeRecord::new("b", "c", 0.25)]
    }

    #[test]
    fn half_edge_weights_sum_to_volume() {
        let g =
            WeightedGraph::build_finite(&unit_path(), &VertexWeightScheme::HalfEdgeLength).unwrap();
        assert_eq!(g.mu_of(&"b".into()).unwrap(), 0.375);
        assert_eq!(g.mu_of(&"a".into()).unwrap(), 0.25);
        assert_eq!(g.volume(), 0.75);
        assert_eq!(g.mu_total(), g.volume());
    }

    #[test]
    fn conductance_sum_weights() {
        let g =
            WeightedGraph::build_finite(&unit_path(), &VertexWeightScheme::ConductanceSum).unwrap();
        assert_eq!(g.mu_of(&"b".into()).unwrap(), 6.0);
    }

    #[test]
    fn zero_resistance_rejected() {
        let edges = vec![EdgeRecord::new("a", "b", 0.0)];
        let err = WeightedGraph::build_finite(&edges, &VertexWeightScheme::HalfEdgeLength);
        assert!(matches!(err, Err(Error::NonPositiveResistance { .. })));
    }

    #[test]
    fn duplicate_and_self_loop_rejected() {
        let dup = vec![EdgeRecord::new("a", "b", 1.0), EdgeRecord::new("b", "a", 2.0)];
        assert!(matches!(
            WeightedGraph::build_finite(&dup, &VertexWeightScheme::HalfEdgeLength),
            Err(Error::DuplicateEdge(_))
        ));
        let loops = vec![EdgeRecord::new("a", "a", 1.0)];
        assert!(matches!(
            WeightedGraph::build_finite(&loops, &VertexWeightScheme::HalfEdgeLength),
            Err(Error::SelfLoopEdge(_))
        ));
    }

    #[test]
    fn empty_graph_has_zero_volume() {
        let g = WeightedGraph::build_finite(&[], &VertexWeightScheme::HalfEdgeLength).unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.volume(), 0.0);
    }

    #[test]
    fn pendant_chain_neighborhoods() {
        let src = GraphSource::pendant_chain();
        let n0 = src.neighbors(&VertexId::Spine(0)).unwrap();
        assert_eq!(n0, vec![(VertexId::Spine(1), 0.5), (VertexId::Pendant(0, 0), 1.0)]);
        let n3 = src.neighbors(&VertexId::Pendant(3, 5)).unwrap();
        assert_eq!(n3, vec![(VertexId::Spine(3), 1.0)]);
        let s3 = src.neighbors(&VertexId::Spine(3)).unwrap();
        assert_eq!(s3.len(), 2 + 8);
        assert_eq!(s3[0], (VertexId::Spine(2), 0.125));
        assert_eq!(s3[1], (VertexId::Spine(4), 0.0625));
        assert!(src.neighbors(&VertexId::Pendant(3, 8)).is_err());
    }

    #[test]
    fn lumped_chain_matches_parallel_conductance() {
        let src = GraphSource::pendant_chain_lumped();
        let s3 = src.neighbors(&VertexId::Spine(3)).unwrap();
        // one bank of resistance 2^-3 replaces 8 unit pendants
        assert_eq!(s3.last().unwrap(), &(VertexId::Pendant(3, 0), 0.125));
    }

    #[test]
    fn tree_neighborhoods() {
        let src = GraphSource::geometric_tree(2, 1.0 / 3.0).unwrap();
        let root = src.neighbors(&VertexId::Path(vec![])).unwrap();
        assert_eq!(
            root,
            vec![
                (VertexId::Path(vec![0]), 1.0 / 3.0),
                (VertexId::Path(vec![1]), 1.0 / 3.0),
            ]
        );
        let inner = src.neighbors(&VertexId::Path(vec![1, 0])).unwrap();
        assert_eq!(inner[0], (VertexId::Path(vec![1]), (1.0f64 / 3.0).powi(2)));
        assert_eq!(inner.len(), 3);
        assert!(src.neighbors(&VertexId::Path(vec![2])).is_err());
    }

    #[test]
    fn sibling_tree_cross_edges() {
        let src = GraphSource::sibling_tree(2, 1.0 / 3.0, 0.25).unwrap();
        let left = src.neighbors(&VertexId::Path(vec![0, 0])).unwrap();
        assert!(left.contains(&(VertexId::Path(vec![1, 1]), 0.0625)));
        let right = src.neighbors(&VertexId::Path(vec![1, 1])).unwrap();
        assert!(right.contains(&(VertexId::Path(vec![0, 0]), 0.0625)));
        // non-extremal vertices carry no cross edge
        let mid = src.neighbors(&VertexId::Path(vec![0, 1])).unwrap();
        assert_eq!(mid.len(), 3);
    }

    #[test]
    fn bad_generator_specs() {
        assert!(GraphSource::geometric_tree(1, 0.5).is_err());
        assert!(GraphSource::geometric_tree(2, 1.0).is_err());
        assert!(GraphSource::ray(1.0, 1.5).is_err());
        assert!(GraphSource::sibling_tree(2, 0.5, 1.0).is_err());
    }

    #[test]
    fn generator_symmetry_spot_checks() {
        let srcs = [
            GraphSource::pendant_chain(),
            GraphSource::geometric_tree(3, 0.5).unwrap(),
            GraphSource::sibling_tree(2, 0.5, 0.25).unwrap(),
            GraphSource::ray(1.0, 0.5).unwrap(),
        ];
        for src in &srcs {
            let mut stack = vec![src.root()];
            let mut visited = std::collections::BTreeSet::new();
            while let Some(v) = stack.pop() {
                if !visited.insert(v.clone()) || visited.len() > 50 {
                    continue;
                }
                for (u, r) in src.neighbors(&v).unwrap() {
                    let back = src.neighbors(&u).unwrap();
                    assert!(
                        back.iter().any(|(w, s)| *w == v && *s == r),
                        "asymmetric edge {v} - {u}"
                    );
                    stack.push(u);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g =
            WeightedGraph::build_finite(&unit_path(), &VertexWeightScheme::HalfEdgeLength).unwrap();
        let file = g.to_json();
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed: GraphFile = serde_json::from_str(&text).unwrap();
        let g2 = WeightedGraph::from_json(&parsed, &VertexWeightScheme::HalfEdgeLength).unwrap();
        assert_eq!(g2.vertex_count(), 3);
        assert_eq!(g2.mu_of(&"b".into()).unwrap(), 0.375);
        assert_eq!(g2.volume(), 0.75);
    }

    #[test]
    fn isolated_declared_vertex_rejected() {
        let file = GraphFile {
            vertices: vec![
                VertexEntry { id: "a".into(), mu: None },
                VertexEntry { id: "b".into(), mu: None },
                VertexEntry { id: "z".into(), mu: None },
            ],
            edges: vec![EdgeFileEntry { u: "a".into(), v: "b".into(), r: 1.0 }],
        };
        assert!(matches!(
            WeightedGraph::from_json(&file, &VertexWeightScheme::HalfEdgeLength),
            Err(Error::IsolatedVertexSpecMismatch(_))
        ));
    }
}

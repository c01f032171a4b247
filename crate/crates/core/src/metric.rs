//! The resistance path metric and the cut structure of network completions.
//!
//! `d(u, v)` is the infimum over paths of the summed edge resistances.  On an
//! infinite network the metric completion may attach limit points (ends of
//! Cauchy rays); we reach them through truncations: finite host graphs whose
//! frontier vertices are tagged with the boundary class of the canonical ray
//! through them.  Two completion points are weakly separated when a finite
//! edge set meets every path between them; such cut witnesses, the components
//! they induce, and the 0/1 functions flat outside a finite witness set are
//! the combinatorial handles on the completion used by the rest of the crate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeRecord, GraphSource, VertexId, VertexWeightScheme, WeightedGraph};
use crate::{Error, Result};

/// Path-metric value; infinite distance is an explicit sentinel and is
/// serialized as `null`, never as a numeric infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Finite(f64),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        Ok(match Option::<f64>::deserialize(de)? {
            Some(d) => Distance::Finite(d),
            None => Distance::Unreachable,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // min-heap: smaller distance first, ties broken by vertex order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .expect("path lengths are never NaN")
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest resistance distances from vertex index `src` to every vertex.
pub(crate) fn distances_from_index(g: &WeightedGraph, src: usize) -> Vec<f64> {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapEntry { dist: 0.0, vertex: src });
    while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, r) in g.adj(v) {
            let nd = d + r;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(HeapEntry { dist: nd, vertex: u });
            }
        }
    }
    dist
}

/// Distances from `src` to every vertex, in vertex order.
pub fn distances_from(g: &WeightedGraph, src: &VertexId) -> Result<Vec<Distance>> {
    let s = g.index_of(src)?;
    Ok(distances_from_index(g, s)
        .into_iter()
        .map(|d| if d.is_finite() { Distance::Finite(d) } else { Distance::Unreachable })
        .collect())
}

/// Length of the shortest resistance path between two vertices.
pub fn distance(g: &WeightedGraph, u: &VertexId, v: &VertexId) -> Result<Distance> {
    let all = distances_from(g, u)?;
    Ok(all[g.index_of(v)?])
}

/// Largest pairwise distance; errors if the graph is disconnected or empty.
pub fn diameter(g: &WeightedGraph) -> Result<f64> {
    if g.vertex_count() == 0 {
        return Err(Error::Disconnected);
    }
    let mut best = 0.0f64;
    for i in 0..g.vertex_count() {
        for d in distances_from_index(g, i) {
            if !d.is_finite() {
                return Err(Error::Disconnected);
            }
            best = best.max(d);
        }
    }
    Ok(best)
}

/// A point of the metric completion, described by the ray converging to it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BoundaryPoint {
    /// Display name, stable across truncation depths.
    pub name: String,
    pub class: BoundaryClass,
}

/// Address of a canonical Cauchy ray.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BoundaryClass {
    /// Tree ray: follow `prefix` from the root, then repeat one child index
    /// forever.  The prefix never ends in the repeated index.
    TreeRay { prefix: Vec<u32>, repeat: u32 },
    /// Limit of the single chain of a ray or pendant-chain source.
    ChainLimit,
    /// Synthetic class for a frontier vertex of a finite source: the part of
    /// the graph cut off behind that vertex.
    CutBehind { at: VertexId },
}

impl BoundaryClass {
    fn name(&self, source: &GraphSource) -> String {
        match self {
            BoundaryClass::TreeRay { prefix, repeat } => {
                let mut s = String::new();
                for c in prefix {
                    s.push_str(&c.to_string());
                    s.push('.');
                }
                s.push_str(&format!("({repeat})*"));
                s
            }
            BoundaryClass::ChainLimit => match source {
                GraphSource::Ray { .. } => "end".to_string(),
                _ => "spine".to_string(),
            },
            BoundaryClass::CutBehind { at } => format!("cut@{at}"),
        }
    }
}

fn tree_ray_through(path: &[u32]) -> BoundaryClass {
    // canonical ray: keep descending through child 0; normalize so the
    // prefix does not end in the repeated index
    let mut prefix = path.to_vec();
    while prefix.last() == Some(&0) {
        prefix.pop();
    }
    BoundaryClass::TreeRay { prefix, repeat: 0 }
}

/// The boundary class of the canonical ray through `v`, or `None` for finite
/// sources, which have no completion points.
pub fn boundary_class_through(source: &GraphSource, v: &VertexId) -> Option<BoundaryClass> {
    match (source, v) {
        (GraphSource::PendantChain { .. }, _) | (GraphSource::Ray { .. }, _) => {
            Some(BoundaryClass::ChainLimit)
        }
        (GraphSource::GeometricTree { .. }, VertexId::Path(w))
        | (GraphSource::SiblingTree { .. }, VertexId::Path(w)) => Some(tree_ray_through(w)),
        _ => None,
    }
}

/// Finite host approximating a graph source out to a hop depth.
///
/// Every vertex within `depth` hops of the root is in the host, together with
/// all source edges between host vertices.  Host vertices with unexplored
/// source neighbors form the frontier; each carries the boundary class of the
/// canonical ray through it and the resistance of that ray's next edge.
#[derive(Debug, Clone)]
pub struct Truncation {
    host: WeightedGraph,
    depth: usize,
    frontier: BTreeMap<VertexId, BoundaryPoint>,
    ray_edge: BTreeMap<VertexId, f64>,
}

impl Truncation {
    pub fn host(&self) -> &WeightedGraph {
        &self.host
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn frontier(&self) -> &BTreeMap<VertexId, BoundaryPoint> {
        &self.frontier
    }

    pub fn is_frontier(&self, v: &VertexId) -> bool {
        self.frontier.contains_key(v)
    }

    /// Resistance of the truncated canonical-ray edge at a frontier vertex.
    pub fn ray_resistance(&self, v: &VertexId) -> Option<f64> {
        self.ray_edge.get(v).copied()
    }

    /// Distinct frontier classes by display name.
    pub fn classes(&self) -> BTreeMap<String, BoundaryPoint> {
        self.frontier.values().map(|p| (p.name.clone(), p.clone())).collect()
    }

    /// Boundary vertices: the frontier plus every non-frontier vertex of host
    /// degree one.
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for i in 0..self.host.vertex_count() {
            let id = self.host.vertex(i);
            if self.is_frontier(id) || self.host.degree(i) <= 1 {
                out.push(id.clone());
            }
        }
        out
    }

    /// Interior vertices: host degree at least two and not on the frontier.
    pub fn interior_vertices(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for i in 0..self.host.vertex_count() {
            let id = self.host.vertex(i);
            if !self.is_frontier(id) && self.host.degree(i) >= 2 {
                out.push(id.clone());
            }
        }
        out
    }

    pub fn is_boundary(&self, v: &VertexId) -> Result<bool> {
        let i = self.host.index_of(v)?;
        Ok(self.is_frontier(v) || self.host.degree(i) <= 1)
    }

    /// Wraps a whole finite graph as its own truncation (empty frontier),
    /// keeping the graph's vertex weights.
    pub fn covering(graph: WeightedGraph) -> Result<Truncation> {
        let depth = graph.vertex_count().max(1);
        let mu: BTreeMap<VertexId, f64> = (0..graph.vertex_count())
            .map(|i| (graph.vertex(i).clone(), graph.mu_at(i)))
            .collect();
        truncate(&GraphSource::finite(graph)?, depth, &VertexWeightScheme::Explicit(mu))
    }
}

/// Explores `source` out to `depth` hops from the root.
///
/// Vertex weights are computed by `scheme` over the full source neighborhood
/// of each host vertex (not just the host edges), so they agree with the
/// weights of the infinite graph.  Explicit schemes must cover the host.
pub fn truncate(
    source: &GraphSource,
    depth: usize,
    scheme: &VertexWeightScheme,
) -> Result<Truncation> {
    let root = source.root();
    let mut hop: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    hop.insert(root.clone(), 0);
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let h = hop[&v];
        if h == depth {
            continue;
        }
        for (u, _) in source.neighbors(&v)? {
            if !hop.contains_key(&u) {
                hop.insert(u.clone(), h + 1);
                queue.push_back(u);
            }
        }
    }

    let mut edges = Vec::new();
    let mut mu = BTreeMap::new();
    let mut frontier = BTreeMap::new();
    let mut ray_edge = BTreeMap::new();
    for (v, &h) in &hop {
        let incident = source.neighbors(v)?;
        mu.insert(v.clone(), scheme.weight(v, &incident)?);
        let mut outside: Vec<(VertexId, f64)> = Vec::new();
        for (u, r) in incident {
            if hop.contains_key(&u) {
                if *v < u {
                    edges.push(EdgeRecord::new(v.clone(), u.clone(), r));
                }
            } else {
                debug_assert_eq!(h, depth, "interior hop {h} saw an unexplored neighbor");
                outside.push((u, r));
            }
        }
        if !outside.is_empty() {
            let class = boundary_class_through(source, v)
                .unwrap_or(BoundaryClass::CutBehind { at: v.clone() });
            let name = class.name(source);
            // canonical continuation: the unexplored neighbor the canonical
            // ray passes through, or the smallest one for finite sources
            let cont = match &class {
                BoundaryClass::TreeRay { .. } => {
                    let mut child = match v {
                        VertexId::Path(w) => w.clone(),
                        _ => unreachable!("tree ray through a non-path vertex"),
                    };
                    child.push(0);
                    let child = VertexId::Path(child);
                    outside.iter().find(|(u, _)| *u == child).map(|(_, r)| *r)
                }
                BoundaryClass::ChainLimit => match v {
                    VertexId::Spine(n) => {
                        let next = VertexId::Spine(n + 1);
                        outside.iter().find(|(u, _)| *u == next).map(|(_, r)| *r)
                    }
                    _ => None,
                },
                BoundaryClass::CutBehind { .. } => None,
            };
            let cont = cont.unwrap_or_else(|| {
                outside.iter().min_by(|a, b| a.0.cmp(&b.0)).map(|(_, r)| *r).unwrap()
            });
            frontier.insert(v.clone(), BoundaryPoint { name, class });
            ray_edge.insert(v.clone(), cont);
        }
    }

    let vertices: Vec<VertexId> = hop.keys().cloned().collect();
    let host = host_graph(vertices, edges, mu)?;
    Ok(Truncation { host, depth, frontier, ray_edge })
}

fn host_graph(
    vertices: Vec<VertexId>,
    edges: Vec<EdgeRecord>,
    mu: BTreeMap<VertexId, f64>,
) -> Result<WeightedGraph> {
    if edges.is_empty() && vertices.len() == 1 {
        // single-vertex host: keep the root even without host edges
        return WeightedGraph::single_vertex(vertices.into_iter().next().unwrap(), &mu);
    }
    WeightedGraph::from_parts(edges, mu)
}

/// Deepest host vertex on the canonical ray of `class`.
pub fn ray_tail(trunc: &Truncation, class: &BoundaryClass) -> Result<VertexId> {
    let v = match class {
        BoundaryClass::TreeRay { prefix, repeat } => {
            let word: Vec<u32> = (0..trunc.depth)
                .map(|i| if i < prefix.len() { prefix[i] } else { *repeat })
                .collect();
            VertexId::Path(word)
        }
        BoundaryClass::ChainLimit => VertexId::Spine(trunc.depth as u32),
        BoundaryClass::CutBehind { at } => at.clone(),
    };
    if !trunc.host.contains(&v) {
        return Err(Error::UnknownVertex(format!("ray tail {v} is not in the host")));
    }
    Ok(v)
}

/// Component structure of a host after deleting a finite edge set.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentLabeling {
    /// Number of components.
    pub count: usize,
    /// Component index per vertex; components are numbered in ascending order
    /// of their smallest vertex.
    pub labels: BTreeMap<VertexId, usize>,
}

impl ComponentLabeling {
    pub fn label_of(&self, v: &VertexId) -> Option<usize> {
        self.labels.get(v).copied()
    }

    pub fn members(&self, component: usize) -> Vec<VertexId> {
        self.labels
            .iter()
            .filter(|&(_, &c)| c == component)
            .map(|(v, _)| v.clone())
            .collect()
    }
}

fn edge_index_set(g: &WeightedGraph, edges: &[(VertexId, VertexId)]) -> Result<BTreeSet<(usize, usize)>> {
    let mut cut = BTreeSet::new();
    for (u, v) in edges {
        let (a, b) = (g.index_of(u)?, g.index_of(v)?);
        if !g.adj(a).iter().any(|&(j, _)| j == b) {
            return Err(Error::EdgeNotInGraph(format!("({u}, {v})")));
        }
        cut.insert((a.min(b), a.max(b)));
    }
    Ok(cut)
}

/// Deletes the listed edges and labels the remaining components.
pub fn components_after_cut(
    g: &WeightedGraph,
    cut: &[(VertexId, VertexId)],
) -> Result<ComponentLabeling> {
    let cut = edge_index_set(g, cut)?;
    let n = g.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        label[start] = count;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in g.adj(v) {
                let key = (v.min(u), v.max(u));
                if cut.contains(&key) || label[u] != usize::MAX {
                    continue;
                }
                label[u] = count;
                queue.push_back(u);
            }
        }
        count += 1;
    }
    let labels = (0..n).map(|i| (g.vertex(i).clone(), label[i])).collect();
    Ok(ComponentLabeling { count, labels })
}

/// A finite edge set proposed as a separator between two completion points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutWitness {
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side_b: Option<String>,
}

impl CutWitness {
    pub fn new(edges: Vec<(VertexId, VertexId)>) -> Self {
        CutWitness { edges, side_a: None, side_b: None }
    }
}

/// Outcome of a finite-depth separation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CutVerdict {
    /// Every path between the two points crosses the witness.
    Separated,
    /// An explicit witness-avoiding path between the ray tails.
    NotSeparated { path: Vec<VertexId> },
    /// The truncation is inconclusive: the source may reconnect the sides
    /// beyond this depth.
    UnknownAtDepth,
}

/// Checks whether `witness` separates boundary points `x` and `y` in the
/// depth-`max_depth` truncation.
///
/// `Separated` is exact when the source is acyclic beyond every truncation
/// (tree-like generators); otherwise a separated host yields
/// `UnknownAtDepth`.  `NotSeparated` is always exact: the returned path
/// extends to a witness-avoiding connection in the full source.
pub fn verify_cut_witness(
    source: &GraphSource,
    witness: &CutWitness,
    x: &BoundaryPoint,
    y: &BoundaryPoint,
    max_depth: usize,
) -> Result<CutVerdict> {
    if x.class == y.class {
        return Err(Error::BadSpec("cannot separate a boundary point from itself".into()));
    }
    let trunc = truncate(source, max_depth, &VertexWeightScheme::Constant(1.0))?;
    let g = trunc.host();
    let cut = edge_index_set(g, &witness.edges)
        .map_err(|e| match e {
            Error::EdgeNotInGraph(s) | Error::UnknownVertex(s) => Error::WitnessOutsideTruncation(s),
            other => other,
        })?;
    let tx = g.index_of(&ray_tail(&trunc, &x.class)?)?;
    let ty = g.index_of(&ray_tail(&trunc, &y.class)?)?;

    // BFS avoiding the witness, tracking parents for the explicit path
    let mut parent = vec![usize::MAX; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([tx]);
    seen[tx] = true;
    while let Some(v) = queue.pop_front() {
        if v == ty {
            let mut path = vec![ty];
            let mut cur = ty;
            while cur != tx {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            let path = path.into_iter().map(|i| g.vertex(i).clone()).collect();
            return Ok(CutVerdict::NotSeparated { path });
        }
        for &(u, _) in g.adj(v) {
            if seen[u] || cut.contains(&(v.min(u), v.max(u))) {
                continue;
            }
            seen[u] = true;
            parent[u] = v;
            queue.push_back(u);
        }
    }
    if source.acyclic_beyond_truncation() {
        Ok(CutVerdict::Separated)
    } else {
        Ok(CutVerdict::UnknownAtDepth)
    }
}

/// A 0/1 vertex function changing value only across a finite edge witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatFunction {
    pub values: BTreeMap<VertexId, f64>,
    pub witness: Vec<(VertexId, VertexId)>,
}

impl FlatFunction {
    /// Checks the defining invariants: 1 on `a`, 0 on `b`, values in {0, 1},
    /// and equal endpoint values across every non-witness edge.
    pub fn validate(
        &self,
        g: &WeightedGraph,
        a: &BTreeSet<VertexId>,
        b: &BTreeSet<VertexId>,
    ) -> Result<()> {
        let fail = |msg: String| Err(Error::CheckFailed(msg));
        for i in 0..g.vertex_count() {
            let id = g.vertex(i);
            match self.values.get(id) {
                Some(&x) if x == 0.0 || x == 1.0 => {}
                Some(&x) => return fail(format!("value {x} at {id} is not 0 or 1")),
                None => return Err(Error::DomainMismatch(format!("no value at {id}"))),
            }
        }
        for v in a {
            if self.values.get(v) != Some(&1.0) {
                return fail(format!("expected 1 at {v}"));
            }
        }
        for v in b {
            if self.values.get(v) != Some(&0.0) {
                return fail(format!("expected 0 at {v}"));
            }
        }
        let witness = edge_index_set(g, &self.witness)?;
        for &(i, j, _) in g.edge_triples() {
            if witness.contains(&(i, j)) {
                continue;
            }
            let (u, v) = (g.vertex(i), g.vertex(j));
            if self.values[u] != self.values[v] {
                return fail(format!("values differ across non-witness edge ({u}, {v})"));
            }
        }
        Ok(())
    }
}

/// Builds a flat indicator separating `a` from `b` in a finite host.
///
/// The function is the indicator of the union of components on the `a` side
/// of the cut formed by the edges leaving the set of vertices strictly closer
/// (in hops) to `a` than to `b`; the witness is exactly the set of edges
/// across which the indicator changes.
pub fn separate_compact_sets(
    g: &WeightedGraph,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
) -> Result<FlatFunction> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::NotSeparable("one of the sets is empty".into()));
    }
    if let Some(shared) = a.intersection(b).next() {
        return Err(Error::NotSeparable(format!("sets share the vertex {shared}")));
    }
    let hops_to = |set: &BTreeSet<VertexId>| -> Result<Vec<usize>> {
        let mut d = vec![usize::MAX; g.vertex_count()];
        let mut queue = VecDeque::new();
        for v in set {
            let i = g.index_of(v)?;
            d[i] = 0;
            queue.push_back(i);
        }
        while let Some(v) = queue.pop_front() {
            for &(u, _) in g.adj(v) {
                if d[u] == usize::MAX {
                    d[u] = d[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        Ok(d)
    };
    let da = hops_to(a)?;
    let db = hops_to(b)?;
    let in_u = |i: usize| da[i] < db[i];

    let mut values = BTreeMap::new();
    for i in 0..g.vertex_count() {
        values.insert(g.vertex(i).clone(), if in_u(i) { 1.0 } else { 0.0 });
    }
    let mut witness = Vec::new();
    for &(i, j, _) in g.edge_triples() {
        if in_u(i) != in_u(j) {
            witness.push((g.vertex(i).clone(), g.vertex(j).clone()));
        }
    }
    Ok(FlatFunction { values, witness })
}

/// One compared pair in a dominance report.
#[derive(Debug, Clone, Serialize)]
pub struct DominancePair {
    pub u: VertexId,
    pub v: VertexId,
    pub d0: Distance,
    pub d1: Distance,
}

/// Result of comparing the metrics of two resistance assignments.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub pairs: Vec<DominancePair>,
    /// Smallest shrunken resistance over each supplied witness.
    pub witness_min_r1: Vec<f64>,
}

/// Confirms that shrinking resistances shrinks the metric.
///
/// `g0` and `g1` must share vertex and edge sets with `R1(e) <= R0(e)`; the
/// check computes both metrics on the sampled pairs and fails with the
/// offending pair if `d1 > d0` ever occurs.  For each supplied cut witness it
/// records the minimum of `R1` over the witness, which stays positive, so
/// cuts witnessed in the shrunken metric remain genuine cuts.
pub fn metric_dominance_check(
    g0: &WeightedGraph,
    g1: &WeightedGraph,
    pairs: &[(VertexId, VertexId)],
    witnesses: &[CutWitness],
) -> Result<DominanceReport> {
    if g0.vertex_ids() != g1.vertex_ids() {
        return Err(Error::DomainMismatch("vertex sets differ".into()));
    }
    let e0 = g0.edge_triples();
    let e1 = g1.edge_triples();
    if e0.len() != e1.len() {
        return Err(Error::DomainMismatch("edge sets differ".into()));
    }
    for (&(a0, b0, r0), &(a1, b1, r1)) in e0.iter().zip(e1) {
        if (a0, b0) != (a1, b1) {
            return Err(Error::DomainMismatch("edge sets differ".into()));
        }
        if r1 > r0 {
            return Err(Error::BadSpec(format!(
                "edge ({}, {}) grew: R1 = {r1} > R0 = {r0}",
                g0.vertex(a0),
                g0.vertex(b0)
            )));
        }
    }

    let mut rows = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let d0 = distance(g0, u, v)?;
        let d1 = distance(g1, u, v)?;
        if let (Distance::Finite(a), Distance::Finite(b)) = (d0, d1) {
            if b > a * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::DominanceViolated {
                    u: u.to_string(),
                    v: v.to_string(),
                    d0: a,
                    d1: b,
                });
            }
        }
        rows.push(DominancePair { u: u.clone(), v: v.clone(), d0, d1 });
    }
    let mut witness_min_r1 = Vec::with_capacity(witnesses.len());
    for w in witnesses {
        let mut min_r = f64::INFINITY;
        for (u, v) in &w.edges {
            min_r = min_r.min(g1.resistance_between(u, v)?);
        }
        witness_min_r1.push(min_r);
    }
    Ok(DominanceReport { pairs: rows, witness_min_r1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    fn graph(edges: &[(&str, &str, f64)]) -> WeightedGraph {
        let recs: Vec<EdgeRecord> =
            edges.iter().map(|&(u, v, r)| EdgeRecord::new(u, v, r)).collect();
        WeightedGraph::build_finite(&recs, &VertexWeightScheme::Constant(1.0)).unwrap()
    }

    #[test]
    fn path_distance_adds_resistances() {
        let g = graph(&[("a", "b", 0.5), ("b", "c", 0.25)]);
        assert_eq!(distance(&g, &"a".into(), &"c".into()).unwrap(), Distance::Finite(0.75));
    }

    #[test]
    fn shortcut_beats_direct_edge() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 3.0)]);
        assert_eq!(distance(&g, &"a".into(), &"c".into()).unwrap(), Distance::Finite(2.0));
    }

    #[test]
    fn chain_partial_sums() {
        // d(v0, vN) = 1 - 2^-N on the pendant chain
        let src = GraphSource::pendant_chain();
        let t = truncate(&src, 6, &VertexWeightScheme::Constant(1.0)).unwrap();
        let d = distance(t.host(), &VertexId::Spine(0), &VertexId::Spine(6)).unwrap();
        assert!((d.finite().unwrap() - (1.0 - 0.5f64.powi(6))).abs() < 1e-15);
    }

    #[test]
    fn unreachable_is_a_sentinel() {
        let g = graph(&[("a", "b", 1.0), ("c", "d", 1.0)]);
        let d = distance(&g, &"a".into(), &"d".into()).unwrap();
        assert_eq!(d, Distance::Unreachable);
        assert_eq!(serde_json::to_string(&d).unwrap(), "null");
        assert!(diameter(&g).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(diameter(&graph(&[("a", "b", 2.0)])).unwrap(), 2.0);
        assert_eq!(diameter(&graph(&[("a", "b", 0.5), ("b", "c", 0.25)])).unwrap(), 0.75);
        let star = graph(&[("c", "x", 1.0), ("c", "y", 1.0), ("c", "z", 1.0)]);
        assert_eq!(diameter(&star).unwrap(), 2.0);
    }

    #[test]
    fn tree_truncation_shape() {
        let src = GraphSource::geometric_tree(2, 1.0 / 3.0).unwrap();
        let t = truncate(&src, 3, &VertexWeightScheme::HalfEdgeLength).unwrap();
        assert_eq!(t.host().vertex_count(), 15);
        assert_eq!(t.frontier().len(), 8);
        assert_eq!(t.interior_vertices().len(), 7);
        // depth-6 truncation volume: sum over levels of 2^n 3^-n
        let t6 = truncate(&src, 6, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let expect = 2.0 * (1.0 - (2.0f64 / 3.0).powi(6));
        assert!((t6.host().volume() - expect).abs() < 1e-12);
    }

    #[test]
    fn pendant_chain_truncation_shape() {
        let src = GraphSource::pendant_chain();
        let t = truncate(&src, 3, &VertexWeightScheme::HalfEdgeLength).unwrap();
        // spine v0..v3 plus pendants of v0..v2
        assert_eq!(t.host().vertex_count(), 4 + 7);
        let frontier: Vec<_> = t.frontier().keys().cloned().collect();
        assert_eq!(frontier, vec![VertexId::Spine(3)]);
        assert_eq!(t.frontier()[&VertexId::Spine(3)].name, "spine");
        assert_eq!(t.ray_resistance(&VertexId::Spine(3)).unwrap(), 0.5f64.powi(4));
        // pendants are boundary but not frontier
        assert!(t.is_boundary(&VertexId::Pendant(2, 3)).unwrap());
        assert!(!t.is_frontier(&VertexId::Pendant(2, 3)));
    }

    #[test]
    fn ray_truncation_shape() {
        let src = GraphSource::ray(0.5, 0.5).unwrap();
        let t = truncate(&src, 5, &VertexWeightScheme::HalfEdgeLength).unwrap();
        assert_eq!(t.host().vertex_count(), 6);
        assert_eq!(t.frontier().len(), 1);
        assert!(t.is_frontier(&VertexId::Spine(5)));
        assert_eq!(t.frontier()[&VertexId::Spine(5)].name, "end");
    }

    #[test]
    fn truncations_nest() {
        let src = GraphSource::sibling_tree(2, 0.5, 0.25).unwrap();
        let small = truncate(&src, 3, &VertexWeightScheme::Constant(1.0)).unwrap();
        let large = truncate(&src, 4, &VertexWeightScheme::Constant(1.0)).unwrap();
        for v in small.host().vertex_ids() {
            assert!(large.host().contains(v));
        }
        for e in small.host().edge_records() {
            assert_eq!(large.host().resistance_between(&e.u, &e.v).unwrap(), e.resistance);
        }
        // induced: large edges between small vertices appear in small
        for e in large.host().edge_records() {
            if small.host().contains(&e.u) && small.host().contains(&e.v) {
                assert!(small.host().resistance_between(&e.u, &e.v).is_ok());
            }
        }
    }

    #[test]
    fn cut_components() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 1.0)]);
        let c = components_after_cut(&g, &[("a".into(), "b".into())]).unwrap();
        assert_eq!(c.count, 2);
        assert_eq!(c.label_of(&"a".into()), Some(0));
        assert_eq!(c.label_of(&"b".into()), Some(1));
        assert_eq!(c.label_of(&"c".into()), Some(1));
        assert!(components_after_cut(&g, &[("a".into(), "c".into())]).is_err());
    }

    #[test]
    fn witness_separates_tree_halves() {
        let src = GraphSource::geometric_tree(2, 1.0 / 3.0).unwrap();
        let left = BoundaryPoint {
            name: "(0)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 0 },
        };
        let right = BoundaryPoint {
            name: "(1)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 1 },
        };
        let root_left = CutWitness::new(vec![(VertexId::Path(vec![]), VertexId::Path(vec![0]))]);
        let v = verify_cut_witness(&src, &root_left, &left, &right, 5).unwrap();
        assert_eq!(v, CutVerdict::Separated);

        let empty = CutWitness::new(vec![]);
        match verify_cut_witness(&src, &empty, &left, &right, 4).unwrap() {
            CutVerdict::NotSeparated { path } => {
                assert_eq!(path.first().unwrap(), &VertexId::Path(vec![0, 0, 0, 0]));
                assert_eq!(path.last().unwrap(), &VertexId::Path(vec![1, 1, 1, 1]));
            }
            other => panic!("expected a connecting path, got {other:?}"),
        }
    }

    #[test]
    fn sibling_cross_edges_defeat_root_cut() {
        let src = GraphSource::sibling_tree(2, 1.0 / 3.0, 0.25).unwrap();
        let left = BoundaryPoint {
            name: "(0)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 0 },
        };
        let right = BoundaryPoint {
            name: "(1)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 1 },
        };
        let root = VertexId::Path(vec![]);
        let w = CutWitness::new(vec![
            (root.clone(), VertexId::Path(vec![0])),
            (root.clone(), VertexId::Path(vec![1])),
        ]);
        match verify_cut_witness(&src, &w, &left, &right, 4).unwrap() {
            CutVerdict::NotSeparated { path } => {
                // the path must hop through a cross edge
                assert!(path.len() >= 2);
            }
            other => panic!("expected cross-edge reconnection, got {other:?}"),
        }
    }

    #[test]
    fn witness_outside_truncation_detected() {
        let src = GraphSource::geometric_tree(2, 0.5).unwrap();
        let left = BoundaryPoint {
            name: "(0)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 0 },
        };
        let right = BoundaryPoint {
            name: "(1)*".into(),
            class: BoundaryClass::TreeRay { prefix: vec![], repeat: 1 },
        };
        let deep = CutWitness::new(vec![(
            VertexId::Path(vec![0, 0, 0, 0]),
            VertexId::Path(vec![0, 0, 0, 0, 0]),
        )]);
        assert!(matches!(
            verify_cut_witness(&src, &deep, &left, &right, 3),
            Err(Error::WitnessOutsideTruncation(_))
        ));
    }

    #[test]
    fn flat_separator_on_path() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 1.0)]);
        let a = BTreeSet::from([VertexId::from("a")]);
        let b = BTreeSet::from([VertexId::from("c")]);
        let f = separate_compact_sets(&g, &a, &b).unwrap();
        f.validate(&g, &a, &b).unwrap();
        assert_eq!(f.values[&"a".into()], 1.0);
        assert_eq!(f.values[&"b".into()], 0.0);

        assert!(matches!(separate_compact_sets(&g, &a, &a), Err(Error::NotSeparable(_))));
    }

    #[test]
    fn flat_separator_splits_tree_leaves() {
        let src = GraphSource::geometric_tree(2, 0.5).unwrap();
        let t = truncate(&src, 3, &VertexWeightScheme::Constant(1.0)).unwrap();
        let leaves = |first: u32| -> BTreeSet<VertexId> {
            (0..4u32)
                .map(|k| VertexId::Path(vec![first, (k >> 1) & 1, k & 1]))
                .collect()
        };
        let a = leaves(0);
        let b = leaves(1);
        let f = separate_compact_sets(t.host(), &a, &b).unwrap();
        f.validate(t.host(), &a, &b).unwrap();
        // the indicator covers exactly the left root component
        assert_eq!(f.values[&VertexId::Path(vec![0])], 1.0);
        assert_eq!(f.values[&VertexId::Path(vec![])], 0.0);
        assert_eq!(f.values[&VertexId::Path(vec![1])], 0.0);
        assert_eq!(f.witness, vec![(VertexId::Path(vec![]), VertexId::Path(vec![0]))]);
    }

    #[test]
    fn dominance_under_halving() {
        let g0 = graph(&[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 3.0)]);
        let halved: Vec<EdgeRecord> = g0
            .edge_records()
            .into_iter()
            .map(|e| EdgeRecord::new(e.u, e.v, e.resistance / 2.0))
            .collect();
        let g1 = WeightedGraph::build_finite(&halved, &VertexWeightScheme::Constant(1.0)).unwrap();
        let pairs = vec![("a".into(), "c".into()), ("a".into(), "b".into())];
        let w = CutWitness::new(vec![("a".into(), "b".into()), ("a".into(), "c".into())]);
        let rep = metric_dominance_check(&g0, &g1, &pairs, &[w]).unwrap();
        assert_eq!(rep.pairs[0].d1, Distance::Finite(1.0));
        assert_eq!(rep.witness_min_r1, vec![0.5]);

        // growing an edge violates the precondition
        assert!(metric_dominance_check(&g1, &g0, &pairs, &[]).is_err());
    }
}

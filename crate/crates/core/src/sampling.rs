//! Seeded generators for random hosts, functions, densities, and normal
//! contractions.  Every generator is deterministic in its seed; the stream
//! cipher RNG keeps the sequences identical across platforms.
//!
//! Sampled contractions use only clamping, absolute value, and zeroing.
//! Those maps take vertex values to exactly representable results, so the
//! contraction inequalities they are meant to exercise hold without any
//! rounding slack.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::VertexFunction;
use crate::graph::{EdgeRecord, VertexId, VertexWeightScheme, WeightedGraph};
use crate::semigroup::Density;
use crate::{Error, Result};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_bounds(n: usize, r_lo: f64, r_hi: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::BadSpec("empty vertex set".into()));
    }
    if !(r_lo > 0.0) || !(r_hi >= r_lo) || !r_hi.is_finite() {
        return Err(Error::BadSpec(format!(
            "resistance range [{r_lo}, {r_hi}] must be positive and ordered"
        )));
    }
    Ok(())
}

/// Uniform attachment tree on `n` vertices with resistances drawn uniformly
/// from `[r_lo, r_hi]`.  Vertex `i` joins a uniformly chosen earlier vertex,
/// so every size is reachable and the shape varies from path-like to
/// star-like.
pub fn random_tree(
    seed: u64,
    n: usize,
    r_lo: f64,
    r_hi: f64,
    scheme: &VertexWeightScheme,
) -> Result<WeightedGraph> {
    check_bounds(n, r_lo, r_hi)?;
    let mut rng = rng_for(seed);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n as u64 {
        let parent = rng.gen_range(0..i);
        let r = rng.gen_range(r_lo..=r_hi);
        edges.push(EdgeRecord {
            u: VertexId::Index(parent),
            v: VertexId::Index(i),
            resistance: r,
        });
    }
    if edges.is_empty() {
        let w = match scheme {
            VertexWeightScheme::Constant(c) => *c,
            _ => 1.0,
        };
        let mu = std::collections::BTreeMap::from([(VertexId::Index(0), w)]);
        return WeightedGraph::single_vertex(VertexId::Index(0), &mu);
    }
    WeightedGraph::build_finite(&edges, scheme)
}

/// Random connected graph: a [`random_tree`] skeleton plus up to
/// `extra_edges` distinct chords.
pub fn random_connected_graph(
    seed: u64,
    n: usize,
    extra_edges: usize,
    r_lo: f64,
    r_hi: f64,
    scheme: &VertexWeightScheme,
) -> Result<WeightedGraph> {
    check_bounds(n, r_lo, r_hi)?;
    let tree = random_tree(seed, n, r_lo, r_hi, scheme)?;
    if n < 3 || extra_edges == 0 {
        return Ok(tree);
    }
    let mut rng = rng_for(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges = tree.edge_records();
    let mut present: std::collections::BTreeSet<(u64, u64)> = edges
        .iter()
        .map(|e| ordered_pair(&e.u, &e.v))
        .collect();
    let mut added = 0;
    for _ in 0..extra_edges * 4 {
        if added == extra_edges {
            break;
        }
        let a = rng.gen_range(0..n as u64);
        let b = rng.gen_range(0..n as u64);
        if a == b || present.contains(&(a.min(b), a.max(b))) {
            continue;
        }
        present.insert((a.min(b), a.max(b)));
        edges.push(EdgeRecord {
            u: VertexId::Index(a),
            v: VertexId::Index(b),
            resistance: rng.gen_range(r_lo..=r_hi),
        });
        added += 1;
    }
    WeightedGraph::build_finite(&edges, scheme)
}

fn ordered_pair(u: &VertexId, v: &VertexId) -> (u64, u64) {
    let a = match u {
        VertexId::Index(i) => *i,
        _ => unreachable!("sampled graphs use indexed vertices"),
    };
    let b = match v {
        VertexId::Index(i) => *i,
        _ => unreachable!("sampled graphs use indexed vertices"),
    };
    (a.min(b), a.max(b))
}

/// Vertex values drawn uniformly from `[-amplitude, amplitude]`.
pub fn random_vertex_function(seed: u64, g: &WeightedGraph, amplitude: f64) -> VertexFunction {
    let mut rng = rng_for(seed);
    VertexFunction::from_fn(g, |_| rng.gen_range(-amplitude..=amplitude))
}

/// Random strictly positive density: uniform raw weights normalized to unit
/// mu-mass.
pub fn random_density(seed: u64, g: &WeightedGraph) -> Result<Density> {
    let mut rng = rng_for(seed);
    let raw: Vec<f64> = (0..g.vertex_count()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let mass: f64 = raw.iter().zip(0..g.vertex_count()).map(|(x, i)| x * g.mu_at(i)).sum();
    let vals: Vec<f64> = raw.iter().map(|x| x / mass).collect();
    Density::new(g, VertexFunction::from_vec(g, &vals))
}

/// A normal contraction of `f`: clamping to a random symmetric band,
/// absolute value, clamped absolute value, or zero.  All four act exactly on
/// floating-point values, so `|g| <= |f|` pointwise and increments never
/// grow, with no rounding caveats.
pub fn random_contraction(seed: u64, f: &VertexFunction) -> VertexFunction {
    let mut rng = rng_for(seed);
    let sup = f.iter().fold(0.0f64, |a, (_, &x)| a.max(x.abs()));
    let mode = rng.gen_range(0..4u8);
    let level = rng.gen_range(0.0..=1.0) * sup;
    VertexFunction::new(
        f.iter()
            .map(|(v, &x)| {
                let y = match mode {
                    0 => x.clamp(-level, level),
                    1 => x.abs(),
                    2 => x.abs().min(level),
                    _ => 0.0,
                };
                (v.clone(), y)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trees_are_deterministic_in_the_seed() {
        let scheme = VertexWeightScheme::HalfEdgeLength;
        let a = random_tree(7, 40, 0.1, 2.0, &scheme).unwrap();
        let b = random_tree(7, 40, 0.1, 2.0, &scheme).unwrap();
        assert_eq!(a.edge_records(), b.edge_records());
        let c = random_tree(8, 40, 0.1, 2.0, &scheme).unwrap();
        assert_ne!(a.edge_records(), c.edge_records());
    }

    #[test]
    fn trees_have_right_size_and_bounds() {
        let g = random_tree(3, 25, 0.5, 1.5, &VertexWeightScheme::Constant(1.0)).unwrap();
        assert_eq!(g.vertex_count(), 25);
        let edges = g.edge_records();
        assert_eq!(edges.len(), 24);
        assert!(edges.iter().all(|e| (0.5..=1.5).contains(&e.resistance)));
        assert!(g.resistance_between(&VertexId::Index(0), &VertexId::Index(24)).is_ok());
    }

    #[test]
    fn single_vertex_tree_is_allowed() {
        let g = random_tree(1, 1, 1.0, 1.0, &VertexWeightScheme::Constant(2.0)).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.mu_at(0), 2.0);
    }

    #[test]
    fn connected_graph_adds_chords_without_duplicates() {
        let g = random_connected_graph(11, 30, 10, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength)
            .unwrap();
        let edges = g.edge_records();
        assert!(edges.len() > 29);
        assert!(edges.len() <= 39);
        let mut seen = std::collections::BTreeSet::new();
        for e in &edges {
            assert!(seen.insert(ordered_pair(&e.u, &e.v)), "duplicate {e:?}");
        }
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(random_tree(0, 0, 0.1, 1.0, &VertexWeightScheme::Constant(1.0)).is_err());
        assert!(random_tree(0, 5, -1.0, 1.0, &VertexWeightScheme::Constant(1.0)).is_err());
        assert!(random_tree(0, 5, 2.0, 1.0, &VertexWeightScheme::Constant(1.0)).is_err());
    }

    #[test]
    fn densities_are_valid_and_positive() {
        let g = random_tree(5, 12, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let d = random_density(5, &g).unwrap();
        assert!(d.values().iter().all(|(_, &x)| x > 0.0));
    }

    #[test]
    fn contractions_shrink_values_and_increments() {
        let g = random_tree(9, 20, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let f = random_vertex_function(9, &g, 3.0);
        for k in 0..8 {
            let c = random_contraction(100 + k, &f);
            for (v, &x) in f.iter() {
                assert!(c.get(v).unwrap().abs() <= x.abs());
            }
            for e in g.edge_records() {
                let df = (f.get(&e.u).unwrap() - f.get(&e.v).unwrap()).abs();
                let dc = (c.get(&e.u).unwrap() - c.get(&e.v).unwrap()).abs();
                assert!(dc <= df, "increment grew on {:?}", e);
            }
        }
    }
}

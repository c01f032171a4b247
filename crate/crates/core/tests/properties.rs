//! Randomized invariants, each checked against an oracle computed by
//! different means than the library under test: Floyd-Warshall for the
//! metric, plain breadth-first reachability for cut components, and direct
//! summation for the form identities.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ohmnet::dirichlet::{solve_dirichlet, BoundarySpec, DirichletProblem, SolverConfig};
use ohmnet::forms::{
    assemble_qmatrix, bilinear_form, laplacian_apply, mu_inner, VertexFunction,
};
use ohmnet::graph::{
    EdgeRecord, GraphSource, VertexId, VertexWeightScheme, WeightedGraph,
};
use ohmnet::metric::{
    components_after_cut, distance, separate_compact_sets, truncate, verify_cut_witness,
    CutVerdict, CutWitness, Distance,
};
use ohmnet::sampling::{
    random_connected_graph, random_density, random_tree, random_vertex_function,
};
use ohmnet::semigroup::{
    assemble_generator, evolve, BoundaryCondition, Density, EvolveMethod,
};
use ohmnet::metric::Truncation;

/// All-pairs distances by Floyd-Warshall, an algorithm the library never
/// uses.
fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
    }
    for e in g.edge_records() {
        let i = g.index_of(&e.u).unwrap();
        let j = g.index_of(&e.v).unwrap();
        d[i][j] = e.resistance;
        d[j][i] = e.resistance;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn lib_distance(g: &WeightedGraph, i: usize, j: usize) -> f64 {
    match distance(g, g.vertex(i), g.vertex(j)).unwrap() {
        Distance::Finite(x) => x,
        Distance::Unreachable => f64::INFINITY,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_matches_floyd_warshall(seed in any::<u64>(), n in 2usize..=22, chords in 0usize..=5) {
        let g = random_connected_graph(seed, n, chords, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let oracle = floyd_warshall(&g);
        for i in 0..n {
            for j in 0..n {
                let d = lib_distance(&g, i, j);
                prop_assert!(close(d, oracle[i][j], 1e-11), "d({i},{j}) = {d} vs {}", oracle[i][j]);
            }
        }
        // metric axioms on the library values
        for i in 0..n {
            prop_assert_eq!(lib_distance(&g, i, i), 0.0);
            for j in 0..n {
                prop_assert!(close(lib_distance(&g, i, j), lib_distance(&g, j, i), 1e-12));
                if i != j {
                    prop_assert!(lib_distance(&g, i, j) > 0.0);
                }
                for k in 0..n {
                    prop_assert!(
                        lib_distance(&g, i, j)
                            <= lib_distance(&g, i, k) + lib_distance(&g, k, j) + 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn shrinking_resistances_shrinks_the_metric(seed in any::<u64>(), n in 2usize..=20) {
        let g0 = random_tree(seed, n, 0.5, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let shrunk: Vec<EdgeRecord> = g0
            .edge_records()
            .into_iter()
            .enumerate()
            .map(|(k, mut e)| {
                // deterministic per-edge factor in (0, 1]
                let f = 0.3 + 0.7 * (((seed ^ k as u64) % 97) as f64) / 96.0;
                e.resistance *= f;
                e
            })
            .collect();
        let g1 = WeightedGraph::build_finite(&shrunk, &VertexWeightScheme::Constant(1.0)).unwrap();
        let d0 = floyd_warshall(&g0);
        let d1 = floyd_warshall(&g1);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(d1[i][j] <= d0[i][j] + 1e-12);
                prop_assert!(close(lib_distance(&g1, i, j), d1[i][j], 1e-11));
            }
        }
    }

    #[test]
    fn mu0_total_is_the_graph_volume(seed in any::<u64>(), n in 2usize..=40, chords in 0usize..=6) {
        let g = random_connected_graph(seed, n, chords, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        prop_assert!(close(g.mu_total(), g.volume(), 1e-12));
    }

    #[test]
    fn flat_functions_separate_sampled_leaf_sets(seed in any::<u64>(), n in 4usize..=40) {
        let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let a = BTreeSet::from([g.vertex(0).clone()]);
        let b = BTreeSet::from([g.vertex(n - 1).clone(), g.vertex(n / 2).clone()]);
        if a.intersection(&b).next().is_some() {
            return Ok(());
        }
        let flat = separate_compact_sets(&g, &a, &b).unwrap();
        flat.validate(&g, &a, &b).unwrap();
        prop_assert!(!flat.witness.is_empty());
    }

    #[test]
    fn cut_components_match_avoiding_reachability(
        seed in any::<u64>(),
        n in 3usize..=25,
        chords in 0usize..=4,
        k in 1usize..=4,
    ) {
        let g = random_connected_graph(seed, n, chords, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let edges = g.edge_records();
        let cut: Vec<(VertexId, VertexId)> = (0..k)
            .map(|t| {
                let e = &edges[(seed as usize).wrapping_add(t * 31) % edges.len()];
                (e.u.clone(), e.v.clone())
            })
            .collect();
        let labeling = components_after_cut(&g, &cut).unwrap();

        // oracle: breadth-first reachability that refuses the cut edges
        let banned: BTreeSet<(usize, usize)> = cut
            .iter()
            .map(|(u, v)| {
                let a = g.index_of(u).unwrap();
                let b = g.index_of(v).unwrap();
                (a.min(b), a.max(b))
            })
            .collect();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(v) = stack.pop() {
                for (u, _) in g.neighbors_of(g.vertex(v)).unwrap() {
                    let ui = g.index_of(&u).unwrap();
                    if label[ui] == usize::MAX && !banned.contains(&(v.min(ui), v.max(ui))) {
                        label[ui] = next;
                        stack.push(ui);
                    }
                }
            }
            next += 1;
        }
        prop_assert_eq!(labeling.count, next);
        for i in 0..n {
            for j in 0..n {
                let same_lib = labeling.label_of(g.vertex(i)) == labeling.label_of(g.vertex(j));
                prop_assert_eq!(same_lib, label[i] == label[j], "vertices {} and {}", i, j);
            }
        }
    }

    #[test]
    fn adjointness_and_detailed_balance(seed in any::<u64>(), n in 2usize..=35, chords in 0usize..=5) {
        let g = random_connected_graph(seed, n, chords, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let f = random_vertex_function(seed ^ 1, &g, 2.0);
        let h = random_vertex_function(seed ^ 2, &g, 2.0);
        let b = bilinear_form(&g, &f, &h).unwrap();
        let lf = laplacian_apply(&g, &f).unwrap();
        let lh = laplacian_apply(&g, &h).unwrap();
        let lhs = mu_inner(&g, &lf, &h).unwrap();
        let rhs = mu_inner(&g, &f, &lh).unwrap();
        let scale = b.abs().max(1.0);
        prop_assert!((lhs - b).abs() <= 1e-12 * scale, "{lhs} vs {b}");
        prop_assert!((rhs - b).abs() <= 1e-12 * scale, "{rhs} vs {b}");

        let q = assemble_qmatrix(&g);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(q.scaled_entry(i, j), q.scaled_entry(j, i));
            }
        }
        for s in q.row_sums() {
            prop_assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn form_is_nonnegative_and_mu_free(seed in any::<u64>(), n in 2usize..=30) {
        let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let f = random_vertex_function(seed, &g, 3.0);
        let b = bilinear_form(&g, &f, &f).unwrap();
        prop_assert!(b >= 0.0);
        let c = bilinear_form(&g, &VertexFunction::constant(&g, 4.0), &VertexFunction::constant(&g, 4.0)).unwrap();
        prop_assert_eq!(c, 0.0);
        // the form never reads mu, so reweighting cannot move it at all
        let g2 = g.reweighted(&VertexWeightScheme::Constant(7.0)).unwrap();
        prop_assert_eq!(bilinear_form(&g2, &f, &f).unwrap(), b);
    }

    #[test]
    fn maximum_principle_and_monotone_data(seed in any::<u64>(), n in 3usize..=35) {
        let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let trunc = Truncation::covering(g).unwrap();
        let leaves: Vec<VertexId> = trunc.boundary_vertices();
        prop_assume!(!leaves.is_empty());
        let mut spec = BoundarySpec::default();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, v) in leaves.iter().enumerate() {
            let x = (((seed >> (k % 32)) & 0xff) as f64) / 255.0;
            lo = lo.min(x);
            hi = hi.max(x);
            spec = spec.with_vertex(v.clone(), x);
        }
        let sol = solve_dirichlet(&DirichletProblem::new(&trunc, spec.clone())).unwrap();
        for (_, &x) in sol.values.iter() {
            prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9, "{x} outside [{lo}, {hi}]");
        }

        let raised = spec.with_vertex(leaves[0].clone(), hi + 0.5);
        let sol2 = solve_dirichlet(&DirichletProblem::new(&trunc, raised)).unwrap();
        for (v, &x) in sol.values.iter() {
            prop_assert!(sol2.values.get(v).unwrap() >= x - 1e-9);
        }
    }

    #[test]
    fn solutions_ignore_the_vertex_weights(seed in any::<u64>(), n in 3usize..=30) {
        let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let schemes = [
            VertexWeightScheme::Constant(1.0),
            VertexWeightScheme::Constant(2.5),
            VertexWeightScheme::HalfEdgeLength,
        ];
        let mut base: Option<VertexFunction> = None;
        for scheme in &schemes {
            let trunc = Truncation::covering(g.reweighted(scheme).unwrap()).unwrap();
            let mut spec = BoundarySpec::default();
            for (k, v) in trunc.boundary_vertices().iter().enumerate() {
                spec = spec.with_vertex(v.clone(), (k % 3) as f64);
            }
            let sol = solve_dirichlet(&DirichletProblem::new(&trunc, spec)).unwrap();
            match &base {
                None => base = Some(sol.values),
                Some(b) => {
                    for (v, &x) in b.iter() {
                        prop_assert!((sol.values.get(v).unwrap() - x).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn generators_assemble_deterministically(seed in any::<u64>(), n in 2usize..=30) {
        let build = || {
            let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
            let trunc = Truncation::covering(g).unwrap();
            assemble_generator(&trunc, &BoundaryCondition::reflecting()).unwrap()
        };
        let a = build();
        let b = build();
        prop_assert_eq!(a.ids(), b.ids());
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                prop_assert_eq!(a.entry(i, j), b.entry(i, j));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn crank_nicolson_agrees_with_eigensolve(seed in any::<u64>(), n in 2usize..=16) {
        let g = random_tree(seed, n, 0.5, 2.0, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let trunc = Truncation::covering(g).unwrap();
        let l = assemble_generator(&trunc, &BoundaryCondition::reflecting()).unwrap();
        let p0 = random_density(seed, trunc.host()).unwrap();
        let times = [0.3, 0.9];
        let a = evolve(&l, &p0, &times, EvolveMethod::Eigen).unwrap();
        let b = evolve(&l, &p0, &times, EvolveMethod::CrankNicolson).unwrap();
        for (pa, pb) in a.densities.iter().zip(&b.densities) {
            for (v, &x) in pa.iter() {
                prop_assert!((x - pb.get(v).unwrap()).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn cg_and_dense_solve_the_same_problem(seed in any::<u64>(), n in 3usize..=60) {
        let g = random_tree(seed, n, 0.1, 2.0, &VertexWeightScheme::Constant(1.0)).unwrap();
        let trunc = Truncation::covering(g).unwrap();
        let mut spec = BoundarySpec::default();
        for (k, v) in trunc.boundary_vertices().iter().enumerate() {
            spec = spec.with_vertex(v.clone(), ((k * 17 % 11) as f64) / 10.0);
        }
        let cg = solve_dirichlet(
            &DirichletProblem::new(&trunc, spec.clone())
                .with_config(SolverConfig { method: ohmnet::dirichlet::SolveMethod::ConjugateGradient, ..Default::default() }),
        )
        .unwrap();
        let dense = solve_dirichlet(
            &DirichletProblem::new(&trunc, spec).with_config(SolverConfig::dense()),
        )
        .unwrap();
        for (v, &x) in cg.values.iter() {
            prop_assert!((dense.values.get(v).unwrap() - x).abs() <= 1e-9);
        }
    }
}

/// Generator sources answer symmetrically and deterministically, and nested
/// truncations agree on shared structure.
#[test]
fn sources_are_symmetric_and_truncations_nest() {
    let sources = [
        GraphSource::pendant_chain(),
        GraphSource::pendant_chain_lumped(),
        GraphSource::geometric_tree(2, 0.5).unwrap(),
        GraphSource::geometric_tree(3, 0.4).unwrap(),
        GraphSource::ray(1.0, 0.5).unwrap(),
        GraphSource::sibling_tree(2, 0.5, 0.5).unwrap(),
    ];
    let scheme = VertexWeightScheme::HalfEdgeLength;
    for source in &sources {
        for depth in 0..=4usize {
            let t0 = truncate(source, depth, &scheme).unwrap();
            let t1 = truncate(source, depth + 1, &scheme).unwrap();
            for v in t0.host().vertex_ids() {
                assert!(t1.host().contains(v), "{v} lost at depth {}", depth + 1);
                // source answers must be finite, nonempty, and symmetric
                let nb = source.neighbors(v).unwrap();
                assert!(!nb.is_empty());
                for (u, r) in &nb {
                    let back = source.neighbors(u).unwrap();
                    let found = back.iter().find(|(w, _)| w == v).expect("missing reverse edge");
                    assert_eq!(found.1, *r, "asymmetric resistance on ({v}, {u})");
                }
            }
            for e in t0.host().edge_records() {
                assert_eq!(
                    t1.host().resistance_between(&e.u, &e.v).unwrap(),
                    e.resistance,
                    "resistance changed on ({}, {}) between depths",
                    e.u,
                    e.v
                );
            }
        }
    }
}

/// Once a witness separates two rays of a tree-like source, deeper
/// truncations keep the verdict.
#[test]
fn separation_verdicts_are_monotone_in_depth() {
    let source = GraphSource::geometric_tree(2, 0.5).unwrap();
    let scheme = VertexWeightScheme::Constant(1.0);
    let trunc = truncate(&source, 3, &scheme).unwrap();
    let classes = trunc.classes();
    let left = classes.values().find(|p| p.name == "(0)*").unwrap().clone();
    let right = classes.values().find(|p| p.name == "1.(0)*").unwrap().clone();
    let witness = CutWitness::new(vec![(VertexId::Path(vec![]), VertexId::Path(vec![0]))]);
    for depth in 2..=6 {
        let verdict = verify_cut_witness(&source, &witness, &left, &right, depth).unwrap();
        assert_eq!(verdict, CutVerdict::Separated, "at depth {depth}");
    }
    // removing the witness exposes a concrete connecting path
    let open = CutWitness::new(vec![]);
    assert!(matches!(
        verify_cut_witness(&source, &open, &left, &right, 3).unwrap(),
        CutVerdict::NotSeparated { .. }
    ));
}

/// Scaling every resistance at a star center by a power of two scales the
/// weighted Laplacian there by exactly the inverse square.
#[test]
fn star_laplacian_scales_quadratically() {
    for arms in 2u64..=6 {
        let base: Vec<EdgeRecord> = (1..=arms)
            .map(|k| EdgeRecord::new(VertexId::Index(0), VertexId::Index(k), 0.3 + 0.2 * k as f64))
            .collect();
        let g0 = WeightedGraph::build_finite(&base, &VertexWeightScheme::HalfEdgeLength).unwrap();
        let f = VertexFunction::from_fn(&g0, |v| match v {
            VertexId::Index(0) => 1.0,
            VertexId::Index(k) => (*k as f64) * 0.25 - 0.5,
            _ => 0.0,
        });
        let base_val = laplacian_apply(&g0, &f).unwrap().get(&VertexId::Index(0)).unwrap();
        for rho in [2.0, 4.0, 8.0] {
            let scaled: Vec<EdgeRecord> = base
                .iter()
                .map(|e| EdgeRecord::new(e.u.clone(), e.v.clone(), e.resistance * rho))
                .collect();
            let g1 =
                WeightedGraph::build_finite(&scaled, &VertexWeightScheme::HalfEdgeLength).unwrap();
            let scaled_val =
                laplacian_apply(&g1, &f).unwrap().get(&VertexId::Index(0)).unwrap();
            assert_eq!(scaled_val, base_val / (rho * rho), "rho = {rho}, arms = {arms}");
        }
    }
}

/// Uniform densities evolved under all-reflecting conditions stay uniform:
/// the constant vector is an exact kernel vector.
#[test]
fn reflecting_evolution_fixes_the_uniform_density() {
    let trunc = truncate(
        &GraphSource::geometric_tree(2, 0.5).unwrap(),
        4,
        &VertexWeightScheme::HalfEdgeLength,
    )
    .unwrap();
    let l = assemble_generator(&trunc, &BoundaryCondition::reflecting()).unwrap();
    let p0 = Density::uniform(trunc.host());
    let run = evolve(&l, &p0, &[0.5, 5.0], EvolveMethod::Eigen).unwrap();
    let c = p0.values().iter().next().map(|(_, &x)| x).unwrap();
    for p in &run.densities {
        for (_, &x) in p.iter() {
            assert!((x - c).abs() <= 1e-12 * c.max(1.0));
        }
    }
}

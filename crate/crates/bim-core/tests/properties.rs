//! Cross-module invariants, checked on randomized instances against
//! independent brute-force oracles.

mod common;

use proptest::prelude::*;
use rand::Rng as _;

use bim_core::*;
use common::*;

// ---------------------------------------------------------------------
// proptest strategies
// ---------------------------------------------------------------------

fn arb_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = InfluenceGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| (0..n as u32).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let cap = max_m.min(pairs.len());
        proptest::sample::subsequence(pairs, 0..=cap).prop_flat_map(move |chosen| {
            proptest::collection::vec(0.05f64..0.95, chosen.len()).prop_map(move |probs| {
                let edges = chosen.iter().zip(&probs).map(|(&(u, v), &p)| (u, v, p));
                InfluenceGraph::from_edges(n, edges).unwrap()
            })
        })
    })
}

// ---------------------------------------------------------------------
// graph round trip
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_round_trip(g in arb_graph(8, 14), seed in any::<u64>()) {
        let g = g.assign_costs(&CostModel::Uniform { lo: 1.0, hi: 3.0 }, seed).unwrap();
        let mut edges = Vec::new();
        g.write_edge_list(&mut edges).unwrap();
        let mut costs = Vec::new();
        g.write_costs(&mut costs).unwrap();
        let g2 = InfluenceGraph::read_edge_list(std::io::Cursor::new(&edges), None)
            .unwrap()
            .read_costs(std::io::Cursor::new(&costs))
            .unwrap();
        prop_assert_eq!(g.node_count(), g2.node_count());
        prop_assert_eq!(g.edges(), g2.edges());
        prop_assert_eq!(g.costs(), g2.costs());
    }
}

// ---------------------------------------------------------------------
// influence regions
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A member's tree path realizes the maximum probability over all
    /// simple paths, membership is exactly the theta cut, and rank is the
    /// negative log of the path probability.
    #[test]
    fn mioa_matches_exhaustive_best_paths(g in arb_graph(7, 12), root in 0u32..7, theta_i in 1usize..5) {
        let root = NodeId(root % g.node_count() as u32);
        let theta = [0.5, 0.2, 0.05, 0.01][theta_i - 1];
        let tree = build_mioa(&g, root, theta).unwrap();
        for v in g.nodes() {
            let best = best_simple_path_prob(&g, root, v);
            match tree.member(v) {
                Some(m) => {
                    prop_assert!((m.path_prob - best).abs() < 1e-9,
                        "member {} path_prob {} vs best {}", v, m.path_prob, best);
                    prop_assert!((m.rank + m.path_prob.log10()).abs() < 1e-9);
                    prop_assert!(m.path_prob >= theta * (1.0 - 1e-9));
                    let path = tree.path_to(v).unwrap();
                    let p = path_prob(&g, &path).unwrap();
                    prop_assert!((p - m.path_prob).abs() < 1e-12);
                }
                None => prop_assert!(best < theta * (1.0 + 1e-9),
                    "{} excluded but best path {} >= {}", v, best, theta),
            }
        }
    }

    /// Sub-paths of maximum-influence paths are maximum-influence paths:
    /// the tree path to any ancestor is that ancestor's own tree path.
    #[test]
    fn mip_subpath_property(g in arb_graph(7, 12), root in 0u32..7) {
        let root = NodeId(root % g.node_count() as u32);
        let tree = build_mioa(&g, root, 0.01).unwrap();
        for m in tree.members() {
            let path = tree.path_to(m.node).unwrap();
            for (i, &anc) in path.iter().enumerate() {
                let anc_path = tree.path_to(anc).unwrap();
                prop_assert_eq!(&path[..=i], &anc_path[..]);
            }
        }
    }

    /// The peer index equals pairwise member-set intersection.
    #[test]
    fn peer_seeds_match_bruteforce_intersection(g in arb_graph(8, 14)) {
        let theta = 0.02;
        let cache = build_mioa_cache(&g, theta).unwrap();
        let ps = build_peer_seeds_from_cache(&cache).unwrap();
        for u in g.nodes() {
            for v in g.nodes() {
                let overlap = cache
                    .tree(u)
                    .members()
                    .iter()
                    .any(|m| cache.tree(v).contains(m.node));
                prop_assert_eq!(ps.are_peers(u, v), overlap);
            }
        }
    }
}

// ---------------------------------------------------------------------
// DAG construction
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Node sets agree, the second builder's edges are a subset of the
    /// first's, both are acyclic by an independent check, and every edge
    /// keeps its original probability.
    #[test]
    fn dag_builders_agree_and_are_acyclic(
        g in arb_graph(8, 16),
        seeds_raw in proptest::collection::btree_set(0u32..8, 1..=3),
        theta_i in 0usize..3,
    ) {
        let n = g.node_count() as u32;
        let seeds: Vec<NodeId> = seeds_raw.iter().map(|&s| NodeId(s % n)).collect();
        let mut seeds = seeds;
        seeds.dedup();
        let theta = [0.3, 0.05, 0.005][theta_i];
        let cache = build_mioa_cache(&g, theta).unwrap();
        let d1 = build_dag1(&g, &seeds, theta).unwrap();
        let d2 = build_dag2(&g, &seeds, &cache, theta).unwrap();

        let n1: std::collections::HashSet<u32> = d1.nodes().iter().map(|v| v.0).collect();
        let n2: std::collections::HashSet<u32> = d2.nodes().iter().map(|v| v.0).collect();
        prop_assert_eq!(&n1, &n2);

        let e1: std::collections::HashSet<(u32, u32)> =
            d1.edges().iter().map(|&(u, v, _)| (u.0, v.0)).collect();
        let e2: std::collections::HashSet<(u32, u32)> =
            d2.edges().iter().map(|&(u, v, _)| (u.0, v.0)).collect();
        prop_assert!(e2.is_subset(&e1));

        prop_assert!(is_acyclic(d1.nodes(), d1.edges()));
        prop_assert!(is_acyclic(d2.nodes(), d2.edges()));

        for d in [&d1, &d2] {
            for &(u, v, p) in d.edges() {
                prop_assert_eq!(g.edge_prob(u, v), Some(p));
            }
            for s in &seeds {
                prop_assert_eq!(d.rank_of(*s), Some(0.0));
            }
        }
    }

    /// With a single seed the pruned union is exactly that seed's tree.
    #[test]
    fn single_seed_dag2_is_the_mioa(g in arb_graph(8, 14), root in 0u32..8) {
        let root = NodeId(root % g.node_count() as u32);
        let theta = 0.02;
        let cache = build_mioa_cache(&g, theta).unwrap();
        let d2 = build_dag2(&g, &[root], &cache, theta).unwrap();
        let tree = cache.tree(root);
        prop_assert_eq!(d2.node_count(), tree.len());
        prop_assert_eq!(d2.edge_count(), tree.len() - 1);
    }
}

// ---------------------------------------------------------------------
// oracles and estimators
// ---------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The library's exact oracle against an independently written
    /// brute-force enumeration.
    #[test]
    fn exact_spread_matches_bruteforce(g in arb_graph(6, 10)) {
        let mut r = rng(7);
        let seeds = random_seeds(&mut r, g.node_count(), 2);
        let mine = exact_spread(&g, &seeds).unwrap();
        let (probs, sigma) = brute_force_activation(&g, &seeds);
        prop_assert!((mine.sigma - sigma).abs() < 1e-9);
        for (got, want) in mine.probs.iter().zip(&probs) {
            prop_assert!((got - want).abs() < 1e-9);
        }
    }

    /// Monotonicity: sigma(S) <= sigma(T) for S within T, exactly on the
    /// exact oracle.
    #[test]
    fn exact_sigma_is_monotone(g in arb_graph(6, 10), extra in 0u32..6) {
        let mut r = rng(11);
        let s = random_seeds(&mut r, g.node_count(), 2);
        let extra = NodeId(extra % g.node_count() as u32);
        let mut t = s.clone();
        if !t.contains(&extra) {
            t.push(extra);
        }
        let sig_s = exact_spread(&g, &s).unwrap().sigma;
        let sig_t = exact_spread(&g, &t).unwrap().sigma;
        prop_assert!(sig_s <= sig_t + 1e-12);
    }

    /// Submodularity of the exact spread: the marginal gain of any node
    /// shrinks when the base set grows.
    #[test]
    fn exact_sigma_is_submodular(g in arb_graph(5, 9)) {
        let n = g.node_count();
        let sigma_of = |mask: u32| {
            let seeds: Vec<NodeId> =
                (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| NodeId(v as u32)).collect();
            exact_spread(&g, &seeds).map(|e| e.sigma).unwrap()
        };
        // exhaustive over nested pairs on up to 5 nodes
        for s in 0u32..(1 << n) {
            for t in 0u32..(1 << n) {
                if s & t != s || t == s {
                    continue;
                }
                for v in 0..n {
                    if t >> v & 1 == 1 {
                        continue;
                    }
                    let bit = 1u32 << v;
                    let gain_s = sigma_of(s | bit) - sigma_of(s);
                    let gain_t = sigma_of(t | bit) - sigma_of(t);
                    prop_assert!(gain_s >= gain_t - 1e-9);
                }
            }
        }
    }

    /// The Bayesian-network marginalization agrees with the live-edge
    /// oracle restricted to the DAG's edges.
    #[test]
    fn bn_marginals_equal_live_edge_on_dag(g in arb_graph(7, 12), root in 0u32..7) {
        let root = NodeId(root % g.node_count() as u32);
        let dag = build_dag1(&g, &[root], 1e-6).unwrap();
        let g_dag = InfluenceGraph::from_edges(
            g.node_count(),
            dag.edges().iter().map(|&(u, v, p)| (u.0, v.0, p)),
        )
        .unwrap();
        let bn = exact_dag_marginals(&dag).unwrap();
        let le = exact_spread(&g_dag, &[root]).unwrap();
        for v in 0..g.node_count() {
            prop_assert!((bn.probs[v] - le.probs[v]).abs() < 1e-10);
        }
    }

    /// SPBP reports probabilities in range, spread bounded by the node
    /// count, touches each edge once, and never undershoots the exact
    /// marginals (parent activations are positively associated).
    #[test]
    fn spbp_bounds_and_single_pass(
        g in arb_graph(8, 14),
        seeds_raw in proptest::collection::btree_set(0u32..8, 1..=2),
    ) {
        let n = g.node_count() as u32;
        let mut seeds: Vec<NodeId> = seeds_raw.iter().map(|&s| NodeId(s % n)).collect();
        seeds.dedup();
        let dag = build_dag1(&g, &seeds, 0.005).unwrap();
        let (est, touched) = spbp_instrumented(&dag);
        prop_assert_eq!(touched, dag.edge_count() as u64);
        prop_assert!(est.probs.iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
        prop_assert!(est.sigma >= seeds.len() as f64 - 1e-9);
        prop_assert!(est.sigma <= dag.node_count() as f64 + 1e-9);

        let exact = exact_dag_marginals(&dag).unwrap();
        for v in 0..g.node_count() {
            prop_assert!(est.probs[v] >= exact.probs[v] - 1e-9,
                "spbp under exact at {}: {} < {}", v, est.probs[v], exact.probs[v]);
        }
    }
}

// needs the instrumented variant re-exported for the test above
use bim_core::estimate::spbp_instrumented;

// ---------------------------------------------------------------------
// statistical properties (fixed RNG, not proptest)
// ---------------------------------------------------------------------

/// The spread-gain/cost ratio against brute-force live-edge differences.
#[test]
fn delta_matches_bruteforce_differences() {
    let mut r = rng(21);
    for case in 0..8u64 {
        let g = random_graph(&mut r, 5, 9, 0.1, 0.9)
            .assign_costs(&CostModel::Uniform { lo: 1.0, hi: 3.0 }, case)
            .unwrap();
        let seeds = random_seeds(&mut r, 5, 2);
        let cfg = SelectionConfig {
            budget: BudgetSpec::Cost(10.0),
            theta: 0.01,
            estimator: EstimatorKind::Exact,
            dag_model: DagModel::Dag2,
            lazy: false,
            rng_seed: 0,
        };
        let mut oracle = SpreadOracle::from_config(&g, &cfg).unwrap();
        for v in g.nodes() {
            if seeds.contains(&v) {
                continue;
            }
            let got = delta(&mut oracle, &seeds, v).unwrap();
            let (_, base) = brute_force_activation(&g, &seeds);
            let mut with_v = seeds.clone();
            with_v.push(v);
            let (_, grown) = brute_force_activation(&g, &with_v);
            let want = (grown - base) / g.cost(v);
            assert!(
                (got - want).abs() < 1e-9,
                "case {case} node {v}: {got} vs {want}"
            );
        }
    }
}

/// Monte-Carlo spread respects monotonicity within joint error bars.
#[test]
fn mc_sigma_statistically_monotone() {
    let mut r = rng(23);
    for case in 0..6u64 {
        let g = random_graph(&mut r, 6, 10, 0.2, 0.8);
        let s = random_seeds(&mut r, 6, 2);
        let mut t = s.clone();
        for v in g.nodes() {
            if !t.contains(&v) {
                t.push(v);
                break;
            }
        }
        let a = mc_spread(&g, &s, 100_000, 7000 + case).unwrap();
        let b = mc_spread(&g, &t, 100_000, 8000 + case).unwrap();
        assert!(
            a.sigma_hat <= b.sigma_hat + 3.0 * (a.stderr + b.stderr) + 1e-9,
            "case {case}: {} > {}",
            a.sigma_hat,
            b.sigma_hat
        );
    }
}

/// Mean signed SPBP error stays nonnegative over randomized DAGs; any
/// per-instance violation would be counted here.
#[test]
fn spbp_mean_signed_error_is_nonnegative() {
    let mut r = rng(99);
    let mut total_err = 0.0;
    let mut violations = 0;
    for _ in 0..60 {
        let g = random_graph(&mut r, 7, 12, 0.1, 0.9);
        let seeds = random_seeds(&mut r, 7, 2);
        let dag = build_dag1(&g, &seeds, 0.001).unwrap();
        let fast = spbp(&dag).sigma;
        let exact = exact_dag_marginals(&dag).unwrap().sigma;
        total_err += fast - exact;
        if fast < exact - 1e-9 {
            violations += 1;
        }
    }
    assert!(total_err >= 0.0, "mean signed error {total_err}");
    assert_eq!(
        violations, 0,
        "{violations} instances undershot the exact spread"
    );
}

/// MC activation frequencies agree with the exact oracle within binomial
/// error bars on a handful of small graphs.
#[test]
fn mc_activation_probs_track_exact() {
    let mut r = rng(5);
    for case in 0..4 {
        let g = random_graph(&mut r, 4, 8, 0.2, 0.8);
        let seeds = random_seeds(&mut r, 4, 1);
        let rounds = 1_000_000usize;
        let mc = mc_activation_probs(&g, &seeds, rounds, 1000 + case).unwrap();
        let exact = exact_spread(&g, &seeds).unwrap();
        for (v, (&got, &want)) in mc.probs.iter().zip(&exact.probs).enumerate() {
            let p = want.clamp(0.0, 1.0);
            let se = ((p * (1.0 - p)).max(0.0) / rounds as f64).sqrt();
            assert!(
                (got - p).abs() <= 3.0 * se + 1e-9,
                "case {case} node {v}: mc {got} exact {p} se {se}"
            );
        }
    }
}

/// Lazy skipping in the optimized selector never changes the selected
/// sequence when the estimator is exact (stale gains are true upper
/// bounds under submodularity).
#[test]
fn optimized_lazy_matches_eager_on_random_instances() {
    let mut r = rng(31);
    for case in 0..12 {
        let g = random_graph(&mut r, 7, 12, 0.1, 0.9)
            .assign_costs(&CostModel::Uniform { lo: 1.0, hi: 3.0 }, 77 + case)
            .unwrap();
        let budget = r.gen_range(2.0..8.0);
        let base = SelectionConfig {
            budget: BudgetSpec::Cost(budget),
            theta: 0.01,
            estimator: EstimatorKind::Exact,
            dag_model: DagModel::Dag2,
            lazy: false,
            rng_seed: 0,
        };
        let cache = build_mioa_cache(&g, base.theta).unwrap();
        let peers = build_peer_seeds_from_cache(&cache).unwrap();
        let eager = optimized_select(&g, &base, &cache, &peers).unwrap();
        let lazy_cfg = SelectionConfig { lazy: true, ..base };
        let lazy = optimized_select(&g, &lazy_cfg, &cache, &peers).unwrap();
        assert_eq!(eager.seeds, lazy.seeds, "case {case} diverged");
    }
}

/// Budget feasibility across selectors and random budgets.
#[test]
fn selectors_never_exceed_the_budget() {
    let mut r = rng(13);
    for case in 0..10 {
        let g = random_graph(&mut r, 6, 10, 0.2, 0.9)
            .assign_costs(&CostModel::Uniform { lo: 1.0, hi: 3.0 }, case)
            .unwrap();
        let budget = r.gen_range(1.0..7.0);
        let cfg = SelectionConfig {
            budget: BudgetSpec::Cost(budget),
            theta: 0.01,
            estimator: EstimatorKind::Exact,
            dag_model: DagModel::Dag2,
            lazy: true,
            rng_seed: case,
        };
        for result in [
            naive_greedy(&g, &cfg).unwrap(),
            improved_greedy(&g, &cfg).unwrap(),
            celf_greedy(&g, &cfg).unwrap(),
            weighted_degree(&g, &cfg).unwrap(),
            optimized_select_auto(&g, &cfg).unwrap(),
        ] {
            assert!(
                result.total_cost <= budget,
                "case {case}: cost {} over budget {budget}",
                result.total_cost
            );
            assert_eq!(result.trace.len(), result.seeds.len());
            let unique: std::collections::HashSet<_> = result.seeds.iter().collect();
            assert_eq!(unique.len(), result.seeds.len());
        }
    }
}

use bim_core::select::optimized_select_auto;

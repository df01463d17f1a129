//! Shared helpers for the integration and acceptance suites: small random
//! instances and independent brute-force oracles. Everything here is
//! deliberately naive and separate from the library's own code paths.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use bim_core::{InfluenceGraph, NodeId};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random simple digraph with `n` nodes and up to `max_m` edges, with
/// probabilities in `[p_lo, p_hi]`.
pub fn random_graph(
    rng: &mut ChaCha12Rng,
    n: usize,
    max_m: usize,
    p_lo: f64,
    p_hi: f64,
) -> InfluenceGraph {
    let mut pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| (0..n as u32).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(rng);
    let m = rng.gen_range(0..=max_m.min(pairs.len()));
    let edges: Vec<(u32, u32, f64)> = pairs[..m]
        .iter()
        .map(|&(u, v)| (u, v, rng.gen_range(p_lo..=p_hi)))
        .collect();
    InfluenceGraph::from_edges(n, edges).unwrap()
}

/// Random non-empty seed set of at most `max_k` nodes.
pub fn random_seeds(rng: &mut ChaCha12Rng, n: usize, max_k: usize) -> Vec<NodeId> {
    let k = rng.gen_range(1..=max_k.min(n));
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(rng);
    let mut seeds: Vec<NodeId> = ids[..k].iter().map(|&v| NodeId(v)).collect();
    seeds.sort();
    seeds
}

/// A uniformly random arborescence (every non-root has exactly one parent
/// among earlier nodes) rooted at node 0.
pub fn random_tree(rng: &mut ChaCha12Rng, n: usize, p_lo: f64, p_hi: f64) -> InfluenceGraph {
    let edges: Vec<(u32, u32, f64)> = (1..n as u32)
        .map(|v| {
            let parent = rng.gen_range(0..v);
            (parent, v, rng.gen_range(p_lo..=p_hi))
        })
        .collect();
    InfluenceGraph::from_edges(n, edges).unwrap()
}

/// Textbook live-edge enumeration, written independently of the library's
/// oracle: every edge (including certain ones) is a coin, reachability via
/// a fresh BFS per outcome. Exponential in the edge count.
pub fn brute_force_activation(g: &InfluenceGraph, seeds: &[NodeId]) -> (Vec<f64>, f64) {
    let n = g.node_count();
    let edges = g.edges();
    let m = edges.len();
    assert!(m <= 16, "brute-force oracle is for tiny graphs");
    let mut probs = vec![0.0f64; n];
    for mask in 0u32..(1u32 << m) {
        let mut weight = 1.0;
        for (i, e) in edges.iter().enumerate() {
            weight *= if mask >> i & 1 == 1 {
                e.prob
            } else {
                1.0 - e.prob
            };
        }
        let mut active = vec![false; n];
        let mut queue: Vec<usize> = Vec::new();
        for s in seeds {
            if !active[s.index()] {
                active[s.index()] = true;
                queue.push(s.index());
            }
        }
        while let Some(u) = queue.pop() {
            for (i, e) in edges.iter().enumerate() {
                if e.src.index() == u && mask >> i & 1 == 1 && !active[e.dst.index()] {
                    active[e.dst.index()] = true;
                    queue.push(e.dst.index());
                }
            }
        }
        for (v, &a) in active.iter().enumerate() {
            if a {
                probs[v] += weight;
            }
        }
    }
    let sigma = probs.iter().sum();
    (probs, sigma)
}

/// Maximum propagation probability over all simple paths from `s` to `t`,
/// by exhaustive DFS. Returns 0 when `t` is unreachable, 1 when `s == t`.
pub fn best_simple_path_prob(g: &InfluenceGraph, s: NodeId, t: NodeId) -> f64 {
    fn dfs(
        g: &InfluenceGraph,
        u: NodeId,
        t: NodeId,
        acc: f64,
        visited: &mut Vec<bool>,
        best: &mut f64,
    ) {
        if u == t {
            *best = best.max(acc);
            return;
        }
        for nb in g.out_neighbors(u) {
            if !visited[nb.node.index()] {
                visited[nb.node.index()] = true;
                dfs(g, nb.node, t, acc * nb.prob, visited, best);
                visited[nb.node.index()] = false;
            }
        }
    }
    let mut best = 0.0;
    let mut visited = vec![false; g.node_count()];
    visited[s.index()] = true;
    dfs(g, s, t, 1.0, &mut visited, &mut best);
    best
}

/// Kahn's algorithm over an explicit edge list; true iff acyclic.
pub fn is_acyclic(n_nodes: &[NodeId], edges: &[(NodeId, NodeId, f64)]) -> bool {
    use std::collections::HashMap;
    let index: HashMap<u32, usize> = n_nodes.iter().enumerate().map(|(i, v)| (v.0, i)).collect();
    let mut indeg = vec![0usize; n_nodes.len()];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes.len()];
    for (u, v, _) in edges {
        adj[index[&u.0]].push(index[&v.0]);
        indeg[index[&v.0]] += 1;
    }
    let mut queue: Vec<usize> = indeg
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| i)
        .collect();
    let mut seen = 0;
    while let Some(u) = queue.pop() {
        seen += 1;
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    seen == n_nodes.len()
}

/// Exact optimum of the budgeted problem by enumerating every feasible
/// subset, with the spread computed per live-edge outcome via per-node
/// reachability bitmasks. Independent of the library's selectors.
pub fn exhaustive_opt(g: &InfluenceGraph, budget: f64) -> f64 {
    let n = g.node_count();
    assert!(n <= 10, "subset enumeration oracle is for tiny graphs");
    let edges = g.edges();
    let m = edges.len();
    assert!(m <= 16);

    let full: u32 = 1 << n;
    let mut sigma = vec![0.0f64; full as usize];
    for mask in 0u32..(1u32 << m) {
        let mut weight = 1.0;
        for (i, e) in edges.iter().enumerate() {
            weight *= if mask >> i & 1 == 1 {
                e.prob
            } else {
                1.0 - e.prob
            };
        }
        // reach[v] = bitmask of nodes reachable from v over live edges
        let mut reach: Vec<u32> = (0..n).map(|v| 1u32 << v).collect();
        // iterate to a fixed point (n is tiny)
        loop {
            let mut changed = false;
            for (i, e) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let merged = reach[e.src.index()] | reach[e.dst.index()];
                    if merged != reach[e.src.index()] {
                        reach[e.src.index()] = merged;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // union reachability over every subset via lowest-bit DP
        let mut subset_reach = vec![0u32; full as usize];
        for s in 1u32..full {
            let low = s.trailing_zeros() as usize;
            subset_reach[s as usize] = subset_reach[(s & (s - 1)) as usize] | reach[low];
        }
        for s in 1u32..full {
            sigma[s as usize] += weight * subset_reach[s as usize].count_ones() as f64;
        }
    }

    let mut best = 0.0f64;
    for s in 0u32..full {
        let cost: f64 = (0..n)
            .filter(|&v| s >> v & 1 == 1)
            .map(|v| g.cost(NodeId(v as u32)))
            .sum();
        if cost <= budget {
            best = best.max(sigma[s as usize]);
        }
    }
    best
}

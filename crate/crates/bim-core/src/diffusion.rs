//! Ground-truth influence spread.
//!
//! Two oracles: round-based Monte-Carlo simulation of the independent
//! cascade, and exact enumeration of live-edge outcomes for small graphs.
//! Both serve as product features and as the reference the approximate
//! estimators are tested against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{ActivationEstimate, EstimateMethod};
use crate::graph::{InfluenceGraph, NodeId};

/// Hard cap on the number of *uncertain* edges (probability < 1) the exact
/// oracle will enumerate; edges with probability exactly 1 are always live
/// and do not contribute outcomes.
pub const EXACT_SPREAD_MAX_EDGES: usize = 24;

// Rounds per rayon work item. Streams are per round, so the batch size
// changes scheduling but never the result.
const MC_BATCH: usize = 64;

/// Monte-Carlo spread estimate.
#[derive(Debug, Clone)]
pub struct SpreadSample {
    /// Mean activated count over all rounds.
    pub sigma_hat: f64,
    /// Standard error of `sigma_hat`.
    pub stderr: f64,
    pub rounds: usize,
    /// Fraction of rounds in which each node was active; seeds are exactly 1.
    pub activation_freq: Vec<f64>,
    /// Set when the seed set was empty (sigma is 0 rather than an error).
    pub empty_seed_set: bool,
}

/// Runs `rounds` independent cascades from `seeds` and averages.
///
/// Each round draws from its own ChaCha stream indexed by the round number,
/// so results are identical whether rounds run serially or in parallel.
pub fn mc_spread(
    g: &InfluenceGraph,
    seeds: &[NodeId],
    rounds: usize,
    rng_seed: u64,
) -> Result<SpreadSample> {
    if rounds == 0 {
        return Err(Error::invalid("mc_spread needs rounds >= 1"));
    }
    let seed_ids = g.check_node_set(seeds)?;
    let n = g.node_count();
    if seed_ids.is_empty() {
        return Ok(SpreadSample {
            sigma_hat: 0.0,
            stderr: 0.0,
            rounds,
            activation_freq: vec![0.0; n],
            empty_seed_set: true,
        });
    }

    let base = ChaCha8Rng::seed_from_u64(rng_seed);
    let batches = rounds.div_ceil(MC_BATCH);
    let (counts, sum, sumsq) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BATCH;
            let hi = ((b + 1) * MC_BATCH).min(rounds);
            let mut counts = vec![0u64; n];
            let mut sum = 0u64;
            let mut sumsq = 0u128;
            let mut active = vec![false; n];
            let mut frontier = Vec::new();
            let mut touched = Vec::new();
            for round in lo..hi {
                let mut rng = base.clone();
                rng.set_stream(round as u64);
                let k = run_cascade(
                    g,
                    &seed_ids,
                    &mut rng,
                    &mut active,
                    &mut frontier,
                    &mut touched,
                );
                for &v in touched.iter() {
                    counts[v as usize] += 1;
                    active[v as usize] = false;
                }
                sum += k as u64;
                sumsq += (k as u128) * (k as u128);
            }
            (counts, sum, sumsq)
        })
        .reduce(
            || (vec![0u64; n], 0u64, 0u128),
            |(mut ca, sa, qa), (cb, sb, qb)| {
                for (x, y) in ca.iter_mut().zip(cb) {
                    *x += y;
                }
                (ca, sa + sb, qa + qb)
            },
        );

    let r = rounds as f64;
    let mean = sum as f64 / r;
    let stderr = if rounds > 1 {
        let var = (sumsq as f64 - r * mean * mean) / (r - 1.0);
        (var.max(0.0) / r).sqrt()
    } else {
        0.0
    };
    Ok(SpreadSample {
        sigma_hat: mean,
        stderr,
        rounds,
        activation_freq: counts.iter().map(|&c| c as f64 / r).collect(),
        empty_seed_set: false,
    })
}

/// One cascade; returns the number of activated nodes and records them in
/// `touched`. `active` must be all-false on entry and is left dirty (the
/// caller resets via `touched`).
fn run_cascade(
    g: &InfluenceGraph,
    seed_ids: &[u32],
    rng: &mut impl Rng,
    active: &mut [bool],
    frontier: &mut Vec<u32>,
    touched: &mut Vec<u32>,
) -> usize {
    frontier.clear();
    touched.clear();
    for &s in seed_ids {
        active[s as usize] = true;
        frontier.push(s);
        touched.push(s);
    }
    let mut next = Vec::new();
    while !frontier.is_empty() {
        next.clear();
        for &u in frontier.iter() {
            for nb in g.out_neighbors(NodeId(u)) {
                let v = nb.node.0;
                if !active[v as usize] && rng.gen::<f64>() < nb.prob {
                    active[v as usize] = true;
                    next.push(v);
                    touched.push(v);
                }
            }
        }
        std::mem::swap(frontier, &mut next);
    }
    touched.len()
}

/// As [`mc_spread`], returning per-node activation frequencies as an
/// [`ActivationEstimate`].
pub fn mc_activation_probs(
    g: &InfluenceGraph,
    seeds: &[NodeId],
    rounds: usize,
    rng_seed: u64,
) -> Result<ActivationEstimate> {
    let s = mc_spread(g, seeds, rounds, rng_seed)?;
    Ok(ActivationEstimate {
        sigma: s.sigma_hat,
        probs: s.activation_freq,
        method: EstimateMethod::Mc,
        converged: None,
        iterations: None,
    })
}

/// Exact spread and per-node activation probabilities by enumerating all
/// live-edge outcomes, weighted by their probability. A node is active iff
/// it is reachable from the seeds via live edges.
///
/// Edges with probability exactly 1 are treated as always live; only the
/// remaining edges are enumerated, capped at
/// [`EXACT_SPREAD_MAX_EDGES`].
pub fn exact_spread(g: &InfluenceGraph, seeds: &[NodeId]) -> Result<ActivationEstimate> {
    let seed_ids = g.check_node_set(seeds)?;
    let n = g.node_count();
    let mut probs = vec![0.0; n];
    if seed_ids.is_empty() {
        return Ok(ActivationEstimate {
            probs,
            sigma: 0.0,
            method: EstimateMethod::Exact,
            converged: None,
            iterations: None,
        });
    }

    // Split adjacency into always-live edges and uncertain ones.
    let mut certain: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut uncertain: Vec<(u32, u32, f64)> = Vec::new();
    for e in g.edges() {
        if e.prob >= 1.0 {
            certain[e.src.index()].push(e.dst.0);
        } else {
            uncertain.push((e.src.0, e.dst.0, e.prob));
        }
    }
    let k = uncertain.len();
    if k > EXACT_SPREAD_MAX_EDGES {
        return Err(Error::LimitExceeded(format!(
            "{k} uncertain edges exceed the cap of {EXACT_SPREAD_MAX_EDGES}"
        )));
    }

    let mut live_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut reached = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let mut weight = 1.0f64;
        for (i, &(_, _, p)) in uncertain.iter().enumerate() {
            weight *= if mask >> i & 1 == 1 { p } else { 1.0 - p };
        }
        if weight == 0.0 {
            continue;
        }
        for (u, adj) in live_adj.iter_mut().enumerate() {
            adj.clear();
            adj.extend_from_slice(&certain[u]);
        }
        for (i, &(u, v, _)) in uncertain.iter().enumerate() {
            if mask >> i & 1 == 1 {
                live_adj[u as usize].push(v);
            }
        }
        reached.iter_mut().for_each(|r| *r = false);
        stack.clear();
        for &s in &seed_ids {
            if !reached[s as usize] {
                reached[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            probs[u as usize] += weight;
            for &v in &live_adj[u as usize] {
                if !reached[v as usize] {
                    reached[v as usize] = true;
                    stack.push(v);
                }
            }
        }
    }

    let sigma = probs.iter().sum();
    Ok(ActivationEstimate {
        probs,
        sigma,
        method: EstimateMethod::Exact,
        converged: None,
        iterations: None,
    })
}

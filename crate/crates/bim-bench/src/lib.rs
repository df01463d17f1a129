//! Shared fixtures for the pipeline benchmarks.

use bim_core::{generate, InfluenceGraph, ProbModel, SynthConfig};

/// A mid-sized scale-free graph with uniform-random probabilities.
pub fn bench_graph(n: usize, m: usize) -> InfluenceGraph {
    generate(&SynthConfig {
        n,
        m_target: m,
        beta: 1.0,
        rng_seed: 1,
    })
    .expect("valid config")
    .assign_probabilities(&ProbModel::random_default(), 2)
    .expect("valid model")
}

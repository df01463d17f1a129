//! Budgeted influence maximization (BIM) under the independent cascade
//! model.
//!
//! The crate covers the full pipeline:
//!
//! * [`graph`] — directed influence graphs, edge-list ingestion, the
//!   WC/TV/RA/PL probability models and node-cost assignment;
//! * [`synth`] — scale-free graph generation with a controllable
//!   out-degree power-law exponent;
//! * [`diffusion`] — ground-truth spread: Monte-Carlo cascade simulation
//!   and an exact live-edge enumeration oracle;
//! * [`region`] — maximum-influence paths, per-node out-arborescences
//!   (Dijkstra over `-log p` weights) and the peer-seeds overlap index;
//! * [`dag`] — the two rank-oriented DAG reductions of a seed set's
//!   influence region;
//! * [`estimate`] — activation-probability inference on a DAG: exact
//!   marginalization, single-pass belief propagation, and loopy belief
//!   propagation on the induced noisy-OR Bayesian network;
//! * [`select`] — the seed selectors: naive and improved greedy, lazy
//!   (CELF) greedy, weighted degree, and the peer-seeds-localized
//!   optimized selector;
//! * [`metrics`] — evaluation metrics.

pub mod dag;
pub mod diffusion;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod metrics;
pub mod region;
pub mod select;
pub mod synth;

mod util;

pub use dag::{build_dag1, build_dag2, node_ranks, InfluenceDag, NodeRanks};
pub use diffusion::{exact_spread, mc_activation_probs, mc_spread, SpreadSample};
pub use error::{Error, Result};
pub use estimate::{exact_dag_marginals, lbp, spbp, ActivationEstimate, EstimateMethod, LbpConfig};
pub use graph::{CostModel, Edge, InfluenceGraph, Neighbor, NodeId, ProbModel};
pub use metrics::rmse;
pub use region::{
    build_mioa, build_mioa_cache, build_peer_seeds, build_peer_seeds_from_cache, path_prob,
    MioaCache, MioaMember, MioaTree, PeerSeedsIndex,
};
pub use select::{
    celf_greedy, delta, improved_greedy, naive_greedy, optimized_select, weighted_degree,
    BudgetSpec, ChosenBranch, DagModel, EstimatorKind, SelectionConfig, SelectionResult,
    SpreadOracle, TraceRow,
};
pub use synth::{fit_power_law_slope, generate, out_degrees, SynthConfig};

/// Influence threshold used when none is configured (the PMIA convention).
pub const DEFAULT_THETA: f64 = 1.0 / 160.0;

/// Monte-Carlo rounds used for reported spreads when not overridden.
pub const DEFAULT_MC_ROUNDS: usize = 10_000;

//! Seed-set selection under a node-cost budget.
//!
//! Selectors, in increasing sophistication:
//!
//! * [`naive_greedy`] — repeatedly take the best spread-gain/cost ratio
//!   that fits the budget; unbounded approximation gap on its own;
//! * [`improved_greedy`] — the better of naive greedy and the single
//!   highest-spread affordable node; `(1 - 1/sqrt(e))`-approximate for
//!   monotone submodular spreads;
//! * [`celf_greedy`] — naive greedy with lazy re-evaluation driven by a
//!   priority queue of stale gains;
//! * [`weighted_degree`] — rank by total outgoing probability mass;
//! * [`optimized_select`] — improved greedy where spreads come from a DAG
//!   estimator over cached influence regions and, after each pick, only
//!   candidates whose regions overlap the new seed are re-evaluated.
//!
//! Cardinality mode (`BudgetSpec::Cardinality`) forces every cost to 1 and
//! sets the budget to `k`, which reduces budgeted selection to classical
//! influence maximization.

use std::io::{self, Write};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::dag::{build_dag1, build_dag2};
use crate::diffusion::{exact_spread, mc_spread};
use crate::error::{Error, Result};
use crate::estimate::{lbp, spbp, LbpConfig};
use crate::graph::{InfluenceGraph, NodeId};
use crate::region::{build_mioa_cache, build_peer_seeds_from_cache, MioaCache, PeerSeedsIndex};
use crate::util::derive_seed;
use crate::DEFAULT_THETA;

/// Budget: either a cost cap over real node costs, or a seed-count cap
/// with all costs treated as 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSpec {
    Cost(f64),
    Cardinality(usize),
}

/// Which DAG reduction the DAG-based estimators run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DagModel {
    Dag1,
    Dag2,
}

/// Spread estimator a selector queries.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    /// Exact live-edge enumeration on the full graph (tiny instances only).
    Exact,
    /// Monte-Carlo on the full graph; the RNG stream is derived from the
    /// queried seed set, so repeated queries of the same set agree.
    Mc { rounds: usize },
    /// Single-pass belief propagation on the configured DAG model.
    Spbp,
    /// Loopy belief propagation on the configured DAG model.
    Lbp(LbpConfig),
}

impl EstimatorKind {
    fn needs_dag(&self) -> bool {
        matches!(self, EstimatorKind::Spbp | EstimatorKind::Lbp(_))
    }
}

/// Full configuration of one selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub budget: BudgetSpec,
    pub theta: f64,
    pub estimator: EstimatorKind,
    pub dag_model: DagModel,
    /// Lazy (CELF-style) skipping inside the optimized selector's
    /// re-evaluation loop.
    pub lazy: bool,
    pub rng_seed: u64,
}

impl SelectionConfig {
    pub fn budgeted(b: f64) -> Self {
        SelectionConfig {
            budget: BudgetSpec::Cost(b),
            theta: DEFAULT_THETA,
            estimator: EstimatorKind::Spbp,
            dag_model: DagModel::Dag2,
            lazy: true,
            rng_seed: 0,
        }
    }

    pub fn unit_cost(k: usize) -> Self {
        SelectionConfig {
            budget: BudgetSpec::Cardinality(k),
            ..Self::budgeted(0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.budget {
            BudgetSpec::Cost(b) if b.is_nan() || b <= 0.0 => {
                return Err(Error::invalid(format!("budget must be > 0, got {b}")))
            }
            BudgetSpec::Cardinality(0) => return Err(Error::invalid("seed count k must be >= 1")),
            _ => {}
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::invalid(format!(
                "influence threshold must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if let EstimatorKind::Mc { rounds } = self.estimator {
            if rounds == 0 {
                return Err(Error::invalid("mc estimator needs rounds >= 1"));
            }
        }
        Ok(())
    }

    /// Effective budget and per-node costs (cardinality mode forces unit
    /// costs).
    fn effective(&self, g: &InfluenceGraph) -> (f64, Vec<f64>) {
        match self.budget {
            BudgetSpec::Cost(b) => (b, g.costs().to_vec()),
            BudgetSpec::Cardinality(k) => (k as f64, vec![1.0; g.node_count()]),
        }
    }
}

/// Spread-estimation front end shared by all selectors. Counts every
/// evaluation it performs.
pub struct SpreadOracle<'g> {
    g: &'g InfluenceGraph,
    kind: EstimatorKind,
    dag_model: DagModel,
    theta: f64,
    rng_seed: u64,
    borrowed_cache: Option<&'g MioaCache>,
    owned_cache: Option<MioaCache>,
    evals: usize,
}

impl<'g> SpreadOracle<'g> {
    pub fn from_config(g: &'g InfluenceGraph, cfg: &SelectionConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SpreadOracle {
            g,
            kind: cfg.estimator.clone(),
            dag_model: cfg.dag_model,
            theta: cfg.theta,
            rng_seed: cfg.rng_seed,
            borrowed_cache: None,
            owned_cache: None,
            evals: 0,
        })
    }

    /// Attaches a prebuilt MIOA cache (it must match `theta`).
    pub fn with_mioa_cache(mut self, cache: &'g MioaCache) -> Result<Self> {
        if cache.theta() != self.theta {
            return Err(Error::invalid(format!(
                "MIOA cache theta {} does not match configured theta {}",
                cache.theta(),
                self.theta
            )));
        }
        self.borrowed_cache = Some(cache);
        Ok(self)
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    /// Builds the owned MIOA cache on first use when the configuration
    /// needs one (DAG-2 estimation without an attached cache).
    fn ensure_cache(&mut self) -> Result<()> {
        if self.kind.needs_dag()
            && self.dag_model == DagModel::Dag2
            && self.borrowed_cache.is_none()
            && self.owned_cache.is_none()
        {
            self.owned_cache = Some(build_mioa_cache(self.g, self.theta)?);
        }
        Ok(())
    }

    fn cache_ref(&self) -> Option<&MioaCache> {
        self.borrowed_cache.or(self.owned_cache.as_ref())
    }

    /// Estimated spread of `seeds`.
    pub fn sigma(&mut self, seeds: &[NodeId]) -> Result<f64> {
        self.evals += 1;
        self.ensure_cache()?;
        sigma_for(
            self.g,
            &self.kind,
            self.dag_model,
            self.theta,
            self.rng_seed,
            self.cache_ref(),
            seeds,
        )
    }
}

/// Stateless spread evaluation (the oracle wraps this with caching and an
/// eval counter; the optimized selector calls it in parallel during
/// initialization).
fn sigma_for(
    g: &InfluenceGraph,
    kind: &EstimatorKind,
    dag_model: DagModel,
    theta: f64,
    rng_seed: u64,
    cache: Option<&MioaCache>,
    seeds: &[NodeId],
) -> Result<f64> {
    if seeds.is_empty() {
        return Ok(0.0);
    }
    match kind {
        EstimatorKind::Exact => Ok(exact_spread(g, seeds)?.sigma),
        EstimatorKind::Mc { rounds } => {
            let ids: Vec<u32> = seeds.iter().map(|s| s.0).collect();
            let seed = derive_seed(rng_seed, 0x51_67_4d_43, &ids);
            Ok(mc_spread(g, seeds, *rounds, seed)?.sigma_hat)
        }
        EstimatorKind::Spbp | EstimatorKind::Lbp(_) => {
            let dag = match dag_model {
                DagModel::Dag1 => build_dag1(g, seeds, theta)?,
                DagModel::Dag2 => {
                    let cache = cache
                        .ok_or_else(|| Error::invalid("dag2 estimation needs a MIOA cache"))?;
                    build_dag2(g, seeds, cache, theta)?
                }
            };
            match kind {
                EstimatorKind::Spbp => Ok(spbp(&dag).sigma),
                EstimatorKind::Lbp(cfg) => Ok(lbp(&dag, cfg)?.sigma),
                _ => unreachable!(),
            }
        }
    }
}

/// Incremental spread-cost ratio of adding `v` to `seeds`:
/// `(sigma(S + v) - sigma(S)) / c(v)` under the oracle's estimator and the
/// graph's real costs.
pub fn delta(oracle: &mut SpreadOracle<'_>, seeds: &[NodeId], v: NodeId) -> Result<f64> {
    if seeds.contains(&v) {
        return Err(Error::invalid(format!("{v} is already a seed")));
    }
    let base = oracle.sigma(seeds)?;
    let mut with_v = seeds.to_vec();
    with_v.push(v);
    let grown = oracle.sigma(&with_v)?;
    Ok((grown - base) / oracle.g.cost(v))
}

/// Which branch of the improved-greedy comparison won.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChosenBranch {
    /// The greedily grown set.
    GreedySet,
    /// The single node with the largest spread.
    BestSingle,
}

/// One accepted seed in a selection trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub node: NodeId,
    /// Effective cost of the node at selection time.
    pub cost: f64,
    /// Spread-cost ratio that won the round.
    pub delta: f64,
    /// Estimator evaluations spent updating candidates this round.
    pub reevals: usize,
}

/// Outcome of a selection run.
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Seeds in acceptance order.
    pub seeds: Vec<NodeId>,
    /// Sum of effective costs of `seeds`; never exceeds the budget.
    pub total_cost: f64,
    /// Spread of `seeds` under the selection estimator. `None` for
    /// selectors that do not estimate spread (weighted degree).
    pub sigma_est: Option<f64>,
    pub chosen_branch: ChosenBranch,
    pub trace: Vec<TraceRow>,
    /// Total estimator evaluations across the run.
    pub estimator_evals: usize,
}

impl SelectionResult {
    /// Monte-Carlo re-evaluation of the selected set on the original
    /// graph; use this for reporting so runs with different estimators
    /// stay comparable.
    pub fn mc_sigma(&self, g: &InfluenceGraph, rounds: usize, rng_seed: u64) -> Result<f64> {
        if self.seeds.is_empty() {
            return Ok(0.0);
        }
        Ok(mc_spread(g, &self.seeds, rounds, rng_seed)?.sigma_hat)
    }

    /// Writes the per-round trace as CSV:
    /// `round,node,cost,cumulative_cost,delta,reevals`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# bim selection trace v1")?;
        writeln!(w, "round,node,cost,cumulative_cost,delta,reevals")?;
        let mut cum = 0.0;
        for (i, row) in self.trace.iter().enumerate() {
            cum += row.cost;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                i + 1,
                row.node,
                row.cost,
                cum,
                row.delta,
                row.reevals
            )?;
        }
        Ok(())
    }
}

/// State shared by the greedy selectors.
struct GreedyState {
    budget: f64,
    costs: Vec<f64>,
    seeds: Vec<NodeId>,
    total_cost: f64,
    sigma: f64,
    trace: Vec<TraceRow>,
}

impl GreedyState {
    fn new(budget: f64, costs: Vec<f64>) -> Self {
        GreedyState {
            budget,
            costs,
            seeds: Vec::new(),
            total_cost: 0.0,
            sigma: 0.0,
            trace: Vec::new(),
        }
    }

    fn fits(&self, v: NodeId) -> bool {
        self.total_cost + self.costs[v.index()] <= self.budget
    }

    fn accept(&mut self, v: NodeId, sigma_with_v: f64, delta: f64, reevals: usize) {
        self.total_cost += self.costs[v.index()];
        self.seeds.push(v);
        self.sigma = sigma_with_v;
        self.trace.push(TraceRow {
            node: v,
            cost: self.costs[v.index()],
            delta,
            reevals,
        });
    }

    fn into_result(self, evals: usize) -> SelectionResult {
        SelectionResult {
            seeds: self.seeds,
            total_cost: self.total_cost,
            sigma_est: Some(self.sigma),
            chosen_branch: ChosenBranch::GreedySet,
            trace: self.trace,
            estimator_evals: evals,
        }
    }
}

/// Candidates that can ever be part of a feasible solution.
fn feasible_candidates(n: usize, costs: &[f64], budget: f64) -> Vec<NodeId> {
    (0..n as u32)
        .map(NodeId)
        .filter(|v| costs[v.index()] <= budget)
        .collect()
}

/// Core of Naive Greedy: each round evaluates every remaining candidate,
/// takes the best ratio if it fits, and removes it either way. Also
/// returns the first round's single-node spreads (improved greedy reuses
/// them for its best-single branch).
fn run_naive(
    g: &InfluenceGraph,
    cfg: &SelectionConfig,
    oracle: &mut SpreadOracle<'_>,
) -> Result<(GreedyState, Vec<(NodeId, f64)>)> {
    let (budget, costs) = cfg.effective(g);
    let mut candidates = feasible_candidates(g.node_count(), &costs, budget);
    let mut state = GreedyState::new(budget, costs);
    let mut singles = Vec::with_capacity(candidates.len());

    let mut first_round = true;
    while !candidates.is_empty() {
        let mut best: Option<(f64, NodeId, f64)> = None; // (delta, node, sigma_with)
        let reevals = candidates.len();
        for &v in &candidates {
            let mut with_v = state.seeds.clone();
            with_v.push(v);
            let sigma_with = oracle.sigma(&with_v)?;
            if first_round {
                singles.push((v, sigma_with));
            }
            let d = (sigma_with - state.sigma) / state.costs[v.index()];
            let better = match &best {
                None => true,
                Some((bd, bv, _)) => d > *bd || (d == *bd && v < *bv),
            };
            if better {
                best = Some((d, v, sigma_with));
            }
        }
        first_round = false;
        let (d, u, sigma_with) = best.expect("candidates nonempty");
        if state.fits(u) {
            state.accept(u, sigma_with, d, reevals);
        }
        candidates.retain(|&v| v != u);
    }
    Ok((state, singles))
}

/// Naive Greedy: maximize the spread-gain/cost ratio each round, skipping
/// nodes that no longer fit. No approximation guarantee by itself.
pub fn naive_greedy(g: &InfluenceGraph, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let mut oracle = SpreadOracle::from_config(g, cfg)?;
    let (state, _) = run_naive(g, cfg, &mut oracle)?;
    let evals = oracle.evals();
    Ok(state.into_result(evals))
}

/// Picks the higher-spread of the greedy set and the best affordable
/// single node.
fn pick_branch(
    greedy: GreedyState,
    best_single: Option<(NodeId, f64)>,
    evals: usize,
) -> SelectionResult {
    match best_single {
        Some((v, sigma_v)) if sigma_v > greedy.sigma => SelectionResult {
            seeds: vec![v],
            total_cost: greedy.costs[v.index()],
            sigma_est: Some(sigma_v),
            chosen_branch: ChosenBranch::BestSingle,
            trace: vec![TraceRow {
                node: v,
                cost: greedy.costs[v.index()],
                delta: sigma_v / greedy.costs[v.index()],
                reevals: 0,
            }],
            estimator_evals: evals,
        },
        _ => greedy.into_result(evals),
    }
}

/// Improved Greedy: the better of Naive Greedy and the single affordable
/// node with the largest spread. For a monotone submodular spread this is
/// a `(1 - 1/sqrt(e))`-approximation of the optimum.
pub fn improved_greedy(g: &InfluenceGraph, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let mut oracle = SpreadOracle::from_config(g, cfg)?;
    let (state, singles) = run_naive(g, cfg, &mut oracle)?;
    let best_single = singles
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0 .0.cmp(&a.0 .0)));
    let evals = oracle.evals();
    Ok(pick_branch(state, best_single, evals))
}

/// Heap entry for CELF: gains sort descending, ties broken by smaller id.
#[derive(Debug, Clone, Copy)]
struct CelfEntry {
    delta: f64,
    node: NodeId,
    sigma_with: f64,
    round: usize,
}

impl PartialEq for CelfEntry {
    fn eq(&self, other: &Self) -> bool {
        self.delta == other.delta && self.node == other.node
    }
}
impl Eq for CelfEntry {}
impl PartialOrd for CelfEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CelfEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Naive Greedy with lazy forward evaluation: stale gains are upper bounds
/// under submodularity, so a candidate is only re-evaluated when it tops
/// the queue with a stale value.
pub fn celf_greedy(g: &InfluenceGraph, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let mut oracle = SpreadOracle::from_config(g, cfg)?;
    let (budget, costs) = cfg.effective(g);
    let candidates = feasible_candidates(g.node_count(), &costs, budget);
    let mut state = GreedyState::new(budget, costs);

    // First pass: sigma({v}) for every candidate, in parallel for the
    // heavyweight estimators.
    let initial = parallel_singles(g, cfg, &mut oracle, &candidates)?;
    let mut heap = std::collections::BinaryHeap::with_capacity(candidates.len());
    for (v, sigma_v) in initial {
        heap.push(CelfEntry {
            delta: sigma_v / state.costs[v.index()],
            node: v,
            sigma_with: sigma_v,
            round: 0,
        });
    }

    let mut round = 0usize;
    let mut reevals = 0usize;
    while let Some(top) = heap.pop() {
        if top.round == round {
            // fresh value: accept or discard for good
            if state.fits(top.node) {
                state.accept(top.node, top.sigma_with, top.delta, reevals);
                round += 1;
                reevals = 0;
            }
        } else {
            let mut with_v = state.seeds.clone();
            with_v.push(top.node);
            let sigma_with = oracle.sigma(&with_v)?;
            reevals += 1;
            heap.push(CelfEntry {
                delta: (sigma_with - state.sigma) / state.costs[top.node.index()],
                node: top.node,
                sigma_with,
                round,
            });
        }
    }
    let evals = oracle.evals();
    Ok(state.into_result(evals))
}

/// Ranks nodes by total outgoing probability mass: top-k in cardinality
/// mode, greedy packing by weight/cost under a cost budget. No spread
/// estimation involved.
pub fn weighted_degree(g: &InfluenceGraph, cfg: &SelectionConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    let (budget, costs) = cfg.effective(g);
    let weight = |v: NodeId| -> f64 { g.out_neighbors(v).iter().map(|nb| nb.prob).sum() };
    let mut order: Vec<NodeId> = feasible_candidates(g.node_count(), &costs, budget);
    // key: weight/cost ratio (equals weight in cardinality mode)
    order.sort_by(|&a, &b| {
        let ka = weight(a) / costs[a.index()];
        let kb = weight(b) / costs[b.index()];
        kb.total_cmp(&ka).then(a.cmp(&b))
    });

    let mut state = GreedyState::new(budget, costs);
    for v in order {
        match cfg.budget {
            BudgetSpec::Cardinality(k) if state.seeds.len() >= k => break,
            _ => {}
        }
        if state.fits(v) {
            let key = weight(v) / state.costs[v.index()];
            state.accept(v, 0.0, key, 0);
        }
    }
    let mut result = state.into_result(0);
    result.sigma_est = None;
    Ok(result)
}

/// sigma({v}) for many candidates at once, in parallel: single-candidate
/// evaluations are independent, and Monte-Carlo streams are derived from
/// the queried set, so the results do not depend on scheduling.
fn parallel_singles(
    g: &InfluenceGraph,
    cfg: &SelectionConfig,
    oracle: &mut SpreadOracle<'_>,
    candidates: &[NodeId],
) -> Result<Vec<(NodeId, f64)>> {
    if matches!(cfg.estimator, EstimatorKind::Exact) {
        return candidates
            .iter()
            .map(|&v| Ok((v, oracle.sigma(&[v])?)))
            .collect();
    }
    oracle.ensure_cache()?;
    let cache = oracle.cache_ref();
    let out: Result<Vec<(NodeId, f64)>> = candidates
        .par_iter()
        .map(|&v| {
            let s = sigma_for(
                g,
                &cfg.estimator,
                cfg.dag_model,
                cfg.theta,
                cfg.rng_seed,
                cache,
                &[v],
            )?;
            Ok((v, s))
        })
        .collect();
    oracle.evals += candidates.len();
    out
}

/// The full optimized selector: single-node spreads are estimated on each
/// node's own influence region, and after a seed `u` is accepted only the
/// candidates sharing region nodes with `u` (its peer seeds) have their
/// gains recomputed — in descending stale-gain order with CELF skipping
/// when `lazy` is set. Finally the greedy set is compared against the best
/// single node.
pub fn optimized_select(
    g: &InfluenceGraph,
    cfg: &SelectionConfig,
    cache: &MioaCache,
    peers: &PeerSeedsIndex,
) -> Result<SelectionResult> {
    cfg.validate()?;
    if cache.theta() != cfg.theta || peers.theta() != cfg.theta {
        return Err(Error::invalid(format!(
            "theta mismatch: cache {}, peer index {}, config {}",
            cache.theta(),
            peers.theta(),
            cfg.theta
        )));
    }
    if cache.trees().len() != g.node_count() {
        return Err(Error::invalid("MIOA cache does not match the graph"));
    }
    let mut oracle = SpreadOracle::from_config(g, cfg)?.with_mioa_cache(cache)?;
    let (budget, costs) = cfg.effective(g);
    let candidates = feasible_candidates(g.node_count(), &costs, budget);
    let mut state = GreedyState::new(budget, costs);

    let n = g.node_count();
    let mut live = FixedBitSet::with_capacity(n);
    for &v in &candidates {
        live.insert(v.index());
    }
    let mut live_count = candidates.len();

    // initialization: sigma({v}) and delta(v) for every candidate
    let singles = parallel_singles(g, cfg, &mut oracle, &candidates)?;
    let mut deltas = vec![f64::NEG_INFINITY; n];
    for &(v, sigma_v) in &singles {
        deltas[v.index()] = sigma_v / state.costs[v.index()];
    }
    let best_single = singles
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0 .0.cmp(&a.0 .0)));

    // Lazy bookkeeping: a candidate whose round-r update was skipped holds
    // a stale gain that is only an upper bound. `pending[v]` remembers the
    // round whose update it still owes; the update is replayed against that
    // round's seed prefix before v may win an argmax, which reproduces the
    // exact value the eager loop would have stored.
    let mut pending: Vec<Option<usize>> = vec![None; n];
    let mut sigma0_by_round: Vec<f64> = Vec::new();
    let mut replays = 0usize;

    let min_live_cost = |state: &GreedyState, live: &FixedBitSet| {
        live.ones()
            .map(|i| state.costs[i])
            .fold(f64::INFINITY, f64::min)
    };

    while live_count > 0 {
        // argmax over live candidates (ties to the smaller id), replaying
        // any deferred update the winner still owes
        let u = loop {
            let mut best: Option<(f64, usize)> = None;
            for i in live.ones() {
                let better = match best {
                    None => true,
                    Some((bd, _)) => deltas[i] > bd,
                };
                if better {
                    best = Some((deltas[i], i));
                }
            }
            let (_, i) = best.expect("live candidates remain");
            if let Some(round) = pending[i].take() {
                let mut with_v = state.seeds[..round + 1].to_vec();
                with_v.push(NodeId(i as u32));
                let sigma_with = oracle.sigma(&with_v)?;
                replays += 1;
                deltas[i] = (sigma_with - sigma0_by_round[round]) / state.costs[i];
                continue;
            }
            break NodeId(i as u32);
        };

        if state.fits(u) {
            let delta_u = deltas[u.index()];
            let round = state.seeds.len();
            let mut s1 = state.seeds.clone();
            s1.push(u);
            let sigma0 = oracle.sigma(&s1)?;
            sigma0_by_round.push(sigma0);
            // snapshot of stale gains over the affected candidates
            let mut affected: Vec<(f64, u32)> = peers
                .peers_of(u)
                .filter(|v| live.contains(v.index()) && *v != u)
                .map(|v| (deltas[v.index()], v.0))
                .collect();
            affected.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

            let mut reevals = 0usize;
            let mut delta_max = 0.0f64;
            let mut cut = affected.len();
            for (pos, &(stale, v)) in affected.iter().enumerate() {
                if cfg.lazy && stale <= delta_max {
                    cut = pos; // descending order: the whole tail is skippable
                    break;
                }
                let mut with_v = s1.clone();
                with_v.push(NodeId(v));
                let sigma_with = oracle.sigma(&with_v)?;
                reevals += 1;
                let d = (sigma_with - sigma0) / state.costs[v as usize];
                deltas[v as usize] = d;
                pending[v as usize] = None;
                if d > delta_max {
                    delta_max = d;
                }
            }
            for &(_, v) in &affected[cut..] {
                pending[v as usize] = Some(round);
            }
            state.accept(u, sigma0, delta_u, reevals + std::mem::take(&mut replays));
        }
        live.set(u.index(), false);
        live_count -= 1;

        if state.budget - state.total_cost < min_live_cost(&state, &live) {
            break; // nothing left can fit; no further pick is possible
        }
    }

    let evals = oracle.evals();
    Ok(pick_branch(state, best_single, evals))
}

/// Builds the MIOA cache and peer index for `cfg.theta`, then runs
/// [`optimized_select`].
pub fn optimized_select_auto(g: &InfluenceGraph, cfg: &SelectionConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    let cache = build_mioa_cache(g, cfg.theta)?;
    let peers = build_peer_seeds_from_cache(&cache)?;
    optimized_select(g, cfg, &cache, &peers)
}

//! Activation-probability inference on an influence DAG.
//!
//! The DAG induces a Bayesian network: each node is a binary variable that
//! is active with probability `1 - prod over active parents of (1 - p(u,v))`
//! (a noisy-OR), seeds clamped active, parentless non-seeds clamped
//! inactive. Three estimators are provided:
//!
//! * [`exact_dag_marginals`] sums the joint over all configurations
//!   (exponential, hard-capped) — the reference the others are tested
//!   against;
//! * [`spbp`] makes a single topological pass treating parents as
//!   independent — exact on singly-connected DAGs, an upper bound
//!   otherwise;
//! * [`lbp`] runs damped sum-product message passing on the factor graph.
//!   The noisy-OR factors admit closed-form messages, so a sweep costs
//!   time linear in the edge count rather than exponential in the
//!   in-degree.

use crate::dag::InfluenceDag;
use crate::error::{Error, Result};

/// Which estimator produced an [`ActivationEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Exact,
    Spbp,
    Lbp,
    Mc,
}

/// Per-node activation probabilities plus their sum (the spread).
/// `probs` is indexed by global node id; nodes outside the estimated DAG
/// have probability 0.
#[derive(Debug, Clone)]
pub struct ActivationEstimate {
    pub probs: Vec<f64>,
    pub sigma: f64,
    pub method: EstimateMethod,
    /// Loopy BP only: whether message passing met its tolerance.
    pub converged: Option<bool>,
    /// Loopy BP only: sweeps executed.
    pub iterations: Option<u32>,
}

/// Exact marginalization enumerates `2^(non-seed nodes)` configurations;
/// instances above this cap are rejected.
pub const EXACT_DAG_MAX_FREE_NODES: usize = 20;

/// Exact activation probabilities by summing the joint distribution over
/// all configurations of the non-seed nodes.
pub fn exact_dag_marginals(dag: &InfluenceDag) -> Result<ActivationEstimate> {
    let n_local = dag.node_count();
    let free: Vec<usize> = (0..n_local).filter(|&i| !dag.seed_flag(i)).collect();
    if free.len() > EXACT_DAG_MAX_FREE_NODES {
        return Err(Error::LimitExceeded(format!(
            "{} non-seed nodes exceed the cap of {EXACT_DAG_MAX_FREE_NODES}",
            free.len()
        )));
    }
    let free_slot: Vec<Option<usize>> = {
        let mut slots = vec![None; n_local];
        for (bit, &i) in free.iter().enumerate() {
            slots[i] = Some(bit);
        }
        slots
    };

    let mut marginal = vec![0.0f64; n_local];
    for mask in 0u64..(1u64 << free.len()) {
        let state = |local: usize| -> bool {
            match free_slot[local] {
                Some(bit) => mask >> bit & 1 == 1,
                None => true, // seed
            }
        };
        let mut joint = 1.0f64;
        for &i in &free {
            // P(x_i = 1 | parents) = 1 - prod over active parents (1 - p)
            let mut q = 1.0f64;
            for &(par, p) in dag.parents_of(i) {
                if state(par as usize) {
                    q *= 1.0 - p;
                }
            }
            joint *= if state(i) { 1.0 - q } else { q };
            if joint == 0.0 {
                break;
            }
        }
        if joint == 0.0 {
            continue;
        }
        for (i, m) in marginal.iter_mut().enumerate() {
            if state(i) {
                *m += joint;
            }
        }
    }

    Ok(collect(dag, marginal, EstimateMethod::Exact, None, None))
}

/// Single-pass belief propagation: one sweep in topological order applying
/// `p(v) = 1 - prod over parents (1 - p(u) p(u,v))`.
pub fn spbp(dag: &InfluenceDag) -> ActivationEstimate {
    spbp_instrumented(dag).0
}

/// As [`spbp`], also reporting how many edges the pass touched (exactly
/// the DAG's edge count — the pass is single).
pub fn spbp_instrumented(dag: &InfluenceDag) -> (ActivationEstimate, u64) {
    let n_local = dag.node_count();
    let mut probs = vec![0.0f64; n_local];
    let mut touched = 0u64;
    for i in 0..n_local {
        probs[i] = if dag.seed_flag(i) {
            1.0
        } else {
            let mut q = 1.0f64;
            for &(par, p) in dag.parents_of(i) {
                q *= 1.0 - probs[par as usize] * p;
                touched += 1;
            }
            1.0 - q
        };
    }
    (
        collect(dag, probs, EstimateMethod::Spbp, None, None),
        touched,
    )
}

/// Loopy belief propagation configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpConfig {
    pub max_iters: u32,
    /// Convergence threshold on the max absolute message change.
    pub tol: f64,
    /// Fraction of the old message retained per update, in `[0, 1)`.
    pub damping: f64,
    /// Nodes keep only this many highest-probability incoming edges.
    pub indegree_cap: usize,
}

impl Default for LbpConfig {
    fn default() -> Self {
        LbpConfig {
            max_iters: 100,
            tol: 1e-6,
            damping: 0.5,
            indegree_cap: 10,
        }
    }
}

impl LbpConfig {
    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("lbp tol must be > 0"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::invalid("lbp damping must be in [0, 1)"));
        }
        if self.max_iters == 0 || self.indegree_cap == 0 {
            return Err(Error::invalid(
                "lbp max_iters and indegree_cap must be >= 1",
            ));
        }
        Ok(())
    }
}

/// A normalized binary message.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Msg(f64, f64);

impl Msg {
    const UNIFORM: Msg = Msg(0.5, 0.5);

    fn normalized(a: f64, b: f64) -> Msg {
        let s = a + b;
        if s > 0.0 && s.is_finite() {
            Msg(a / s, b / s)
        } else {
            // contradictory evidence (possible with probability-1 edges):
            // fall back to uniform rather than propagating NaN
            Msg::UNIFORM
        }
    }

    fn delta(self, other: Msg) -> f64 {
        (self.0 - other.0).abs().max((self.1 - other.1).abs())
    }

    fn damped(self, old: Msg, damping: f64) -> Msg {
        Msg(
            damping * old.0 + (1.0 - damping) * self.0,
            damping * old.1 + (1.0 - damping) * self.1,
        )
    }
}

/// One noisy-OR factor: child variable, free (non-seed) parents with edge
/// probabilities, and the leak from always-active seed parents.
struct Factor {
    child: usize,
    parents: Vec<(usize, f64)>,
    /// prod over seed parents of (1 - p): probability that none of the
    /// clamped parents activates the child.
    leak: f64,
}

/// Sum-product message passing on the factor graph of the DAG's noisy-OR
/// Bayesian network. Synchronous (flooding) schedule with damping; seeds
/// are clamped active. Non-convergence is reported in the result, not an
/// error.
pub fn lbp(dag: &InfluenceDag, cfg: &LbpConfig) -> Result<ActivationEstimate> {
    cfg.validate()?;
    let n_local = dag.node_count();

    // Variables are the non-seed nodes.
    let var_of: Vec<Option<usize>> = {
        let mut v = vec![None; n_local];
        let mut next = 0usize;
        for (i, slot) in v.iter_mut().enumerate() {
            if !dag.seed_flag(i) {
                *slot = Some(next);
                next += 1;
            }
        }
        v
    };
    let n_vars = var_of.iter().flatten().count();

    // One factor per variable, with the in-degree cap applied to the full
    // parent list before seed parents fold into the leak.
    let mut factors: Vec<Factor> = Vec::with_capacity(n_vars);
    for i in 0..n_local {
        let Some(var) = var_of[i] else { continue };
        debug_assert_eq!(var, factors.len());
        let mut incoming: Vec<(u32, f64)> = dag.parents_of(i).to_vec();
        if incoming.len() > cfg.indegree_cap {
            incoming.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            incoming.truncate(cfg.indegree_cap);
        }
        let mut leak = 1.0f64;
        let mut parents = Vec::new();
        for (par, p) in incoming {
            match var_of[par as usize] {
                Some(pv) => parents.push((pv, p)),
                None => leak *= 1.0 - p,
            }
        }
        factors.push(Factor {
            child: var,
            parents,
            leak,
        });
    }

    // Message slots. For factor f with child c and parents u_1..u_d:
    //   to_child[f], to_parent[f][j]  (factor -> variable)
    // and the reverse directions keyed the same way.
    let mut to_child: Vec<Msg> = vec![Msg::UNIFORM; n_vars];
    let mut from_child: Vec<Msg> = vec![Msg::UNIFORM; n_vars];
    let mut to_parent: Vec<Vec<Msg>> = factors
        .iter()
        .map(|f| vec![Msg::UNIFORM; f.parents.len()])
        .collect();
    let mut from_parent: Vec<Vec<Msg>> = to_parent.clone();

    // child_factors[v] = list of (factor, parent slot) where v is a parent
    let mut child_factors: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vars];
    for (fi, f) in factors.iter().enumerate() {
        for (j, &(pv, _)) in f.parents.iter().enumerate() {
            child_factors[pv].push((fi, j));
        }
    }

    let mut iterations = 0u32;
    let mut converged = false;
    let mut new_to_child = to_child.clone();
    let mut new_to_parent = to_parent.clone();
    while iterations < cfg.max_iters {
        iterations += 1;

        // Variable -> factor messages: for each variable, the product of
        // all incoming factor -> variable messages except the recipient's.
        // Position 0 of `incoming` is the variable's own factor.
        let mut incoming: Vec<Msg> = Vec::new();
        let mut pre: Vec<Msg> = Vec::new();
        let mut suf: Vec<Msg> = Vec::new();
        for v in 0..n_vars {
            incoming.clear();
            incoming.push(to_child[v]);
            incoming.extend(child_factors[v].iter().map(|&(fi, j)| to_parent[fi][j]));
            let k = incoming.len();
            pre.clear();
            pre.resize(k + 1, Msg(1.0, 1.0));
            for (i, m) in incoming.iter().enumerate() {
                pre[i + 1] = Msg(pre[i].0 * m.0, pre[i].1 * m.1);
            }
            suf.clear();
            suf.resize(k + 1, Msg(1.0, 1.0));
            for i in (0..k).rev() {
                suf[i] = Msg(suf[i + 1].0 * incoming[i].0, suf[i + 1].1 * incoming[i].1);
            }
            let except =
                |i: usize| Msg::normalized(pre[i].0 * suf[i + 1].0, pre[i].1 * suf[i + 1].1);
            from_child[v] = except(0);
            for (slot, &(fi, j)) in child_factors[v].iter().enumerate() {
                from_parent[fi][j] = except(slot + 1);
            }
        }

        // factor -> variable messages
        let mut max_delta = 0.0f64;
        for (fi, f) in factors.iter().enumerate() {
            let d = f.parents.len();
            // q_j = sum over parent j's states of msg * (1-p_j)^x_j
            let q: Vec<f64> = (0..d)
                .map(|j| {
                    let m = from_parent[fi][j];
                    m.0 + m.1 * (1.0 - f.parents[j].1)
                })
                .collect();
            // prefix/suffix products of q excluding one position
            let mut prefix = vec![1.0f64; d + 1];
            for j in 0..d {
                prefix[j + 1] = prefix[j] * q[j];
            }
            let mut suffix = vec![1.0f64; d + 1];
            for j in (0..d).rev() {
                suffix[j] = suffix[j + 1] * q[j];
            }
            let q_all = prefix[d];

            // to the child: P(x_c = 0) marginalizes to leak * prod q
            let msg_c = Msg::normalized(f.leak * q_all, 1.0 - f.leak * q_all)
                .damped(to_child[f.child], cfg.damping);
            max_delta = max_delta.max(msg_c.delta(to_child[f.child]));
            new_to_child[f.child] = msg_c;

            // to each parent j
            let c = from_child[f.child];
            for j in 0..d {
                let q_except = prefix[j] * suffix[j + 1];
                let base = (c.0 - c.1) * f.leak * q_except;
                let m0 = c.1 + base;
                let m1 = c.1 + base * (1.0 - f.parents[j].1);
                let msg = Msg::normalized(m0, m1).damped(to_parent[fi][j], cfg.damping);
                max_delta = max_delta.max(msg.delta(to_parent[fi][j]));
                new_to_parent[fi][j] = msg;
            }
        }

        std::mem::swap(&mut to_child, &mut new_to_child);
        std::mem::swap(&mut to_parent, &mut new_to_parent);
        if max_delta < cfg.tol {
            converged = true;
            break;
        }
    }

    // Beliefs.
    let mut probs = vec![0.0f64; n_local];
    for i in 0..n_local {
        match var_of[i] {
            None => probs[i] = 1.0,
            Some(v) => {
                let mut a = to_child[v].0;
                let mut b = to_child[v].1;
                for &(fi, j) in &child_factors[v] {
                    a *= to_parent[fi][j].0;
                    b *= to_parent[fi][j].1;
                }
                let belief = Msg::normalized(a, b);
                probs[i] = belief.1;
            }
        }
    }

    Ok(collect(
        dag,
        probs,
        EstimateMethod::Lbp,
        Some(converged),
        Some(iterations),
    ))
}

/// Scatters local probabilities into a global vector and sums sigma.
fn collect(
    dag: &InfluenceDag,
    local: Vec<f64>,
    method: EstimateMethod,
    converged: Option<bool>,
    iterations: Option<u32>,
) -> ActivationEstimate {
    let mut probs = vec![0.0f64; dag.global_node_count()];
    let mut sigma = 0.0f64;
    for (i, v) in dag.nodes().iter().enumerate() {
        probs[v.index()] = local[i];
        sigma += local[i];
    }
    ActivationEstimate {
        probs,
        sigma,
        method,
        converged,
        iterations,
    }
}

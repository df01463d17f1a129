//! Directed influence graph: per-edge propagation probabilities, per-node
//! costs, file ingestion, and the four probability-generation models.
//!
//! The graph is immutable once constructed; `assign_*` methods consume the
//! graph and return a new one so shared references can never observe a
//! half-updated state.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Dense node index, stable for the lifetime of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId(id)
    }
}

/// A directed edge with its propagation probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub prob: f64,
}

/// Adjacency entry: the neighbor on the other end of an edge plus the edge
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub prob: f64,
}

/// Directed graph with propagation probabilities and node costs.
///
/// Invariants enforced at construction:
/// * every edge probability lies in `(0, 1]`,
/// * no self-loops, no duplicate directed edges,
/// * every node cost is strictly positive.
#[derive(Debug, Clone)]
pub struct InfluenceGraph {
    n: usize,
    edges: Vec<Edge>,
    costs: Vec<f64>,
    out: Vec<Vec<Neighbor>>,
    inn: Vec<Vec<Neighbor>>,
}

fn check_prob(p: f64) -> std::result::Result<(), String> {
    if !(p > 0.0 && p <= 1.0) {
        Err(format!("edge probability {p} outside (0, 1]"))
    } else {
        Ok(())
    }
}

impl InfluenceGraph {
    /// Builds a graph over nodes `0..n` from `(src, dst, prob)` triples.
    /// All costs start at 1.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut g = InfluenceGraph {
            n,
            edges: Vec::new(),
            costs: vec![1.0; n],
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
        };
        let mut seen = HashSet::new();
        for (src, dst, prob) in edges {
            g.push_edge(src, dst, prob, &mut seen)
                .map_err(Error::invalid)?;
        }
        g.sort_adjacency();
        Ok(g)
    }

    fn push_edge(
        &mut self,
        src: u32,
        dst: u32,
        prob: f64,
        seen: &mut HashSet<(u32, u32)>,
    ) -> std::result::Result<(), String> {
        if src as usize >= self.n || dst as usize >= self.n {
            return Err(format!(
                "edge ({src}, {dst}) references a node >= n = {}",
                self.n
            ));
        }
        if src == dst {
            return Err(format!("self-loop on node {src}"));
        }
        check_prob(prob)?;
        if !seen.insert((src, dst)) {
            return Err(format!("duplicate edge ({src}, {dst})"));
        }
        self.edges.push(Edge {
            src: NodeId(src),
            dst: NodeId(dst),
            prob,
        });
        self.out[src as usize].push(Neighbor {
            node: NodeId(dst),
            prob,
        });
        self.inn[dst as usize].push(Neighbor {
            node: NodeId(src),
            prob,
        });
        Ok(())
    }

    fn sort_adjacency(&mut self) {
        for adj in self.out.iter_mut().chain(self.inn.iter_mut()) {
            adj.sort_unstable_by_key(|nb| nb.node);
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in input order (load order is preserved through a dump/load
    /// round trip).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n as u32).map(NodeId)
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        v.index() < self.n
    }

    pub fn cost(&self, v: NodeId) -> f64 {
        self.costs[v.index()]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Out-neighbors of `u`, sorted by target id.
    pub fn out_neighbors(&self, u: NodeId) -> &[Neighbor] {
        &self.out[u.index()]
    }

    /// In-neighbors of `v`, sorted by source id.
    pub fn in_neighbors(&self, v: NodeId) -> &[Neighbor] {
        &self.inn[v.index()]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out[u.index()].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.inn[v.index()].len()
    }

    /// Probability of the directed edge `(u, v)`, if present.
    pub fn edge_prob(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let adj = &self.out[u.index()];
        adj.binary_search_by_key(&v, |nb| nb.node)
            .ok()
            .map(|i| adj[i].prob)
    }

    /// Validates a node-id slice against this graph and returns the ids
    /// sorted and deduplicated.
    pub(crate) fn check_node_set(&self, nodes: &[NodeId]) -> Result<Vec<u32>> {
        let mut ids = Vec::with_capacity(nodes.len());
        for &v in nodes {
            if !self.contains_node(v) {
                return Err(Error::invalid(format!(
                    "unknown node id {v} (graph has {} nodes)",
                    self.n
                )));
            }
            ids.push(v.0);
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    // ------------------------------------------------------------------
    // File ingestion and dumping
    // ------------------------------------------------------------------

    /// Loads a graph from an edge-list text file.
    ///
    /// Format: one edge per line, `u v p` with `p` optional (then
    /// `default_prob` must be given); `#` starts a comment; blank lines are
    /// skipped. Node count is `max id + 1`; ids absent from every edge are
    /// isolated nodes. Costs are initialized to 1.
    pub fn load_edge_list(path: impl AsRef<Path>, default_prob: Option<f64>) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_edge_list(BufReader::new(file), default_prob)
    }

    /// Same as [`load_edge_list`](Self::load_edge_list) but from any reader.
    pub fn read_edge_list<R: BufRead>(reader: R, default_prob: Option<f64>) -> Result<Self> {
        let mut raw: Vec<(usize, u32, u32, f64)> = Vec::new();
        let mut max_id: Option<u32> = None;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            // "# nodes N" records trailing isolated nodes that no edge
            // mentions; other comments are skipped.
            if let Some(rest) = line.trim().strip_prefix("# nodes ") {
                let n: u32 = rest
                    .trim()
                    .parse()
                    .map_err(|e| Error::parse(lineno, format!("bad node count '{rest}': {e}")))?;
                if n > 0 {
                    max_id = Some(max_id.map_or(n - 1, |m| m.max(n - 1)));
                }
                continue;
            }
            let content = match line.split('#').next() {
                Some(c) => c.trim(),
                None => "",
            };
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let u = parse_id(fields.next(), lineno, "source id")?;
            let v = parse_id(fields.next(), lineno, "target id")?;
            let p = match fields.next() {
                Some(tok) => tok
                    .parse::<f64>()
                    .map_err(|e| Error::parse(lineno, format!("bad probability '{tok}': {e}")))?,
                None => default_prob.ok_or_else(|| {
                    Error::parse(lineno, "missing probability and no default given")
                })?,
            };
            if let Some(extra) = fields.next() {
                return Err(Error::parse(lineno, format!("unexpected field '{extra}'")));
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            raw.push((lineno, u, v, p));
        }

        let n = max_id.map_or(0, |m| m as usize + 1);
        let mut g = InfluenceGraph {
            n,
            edges: Vec::new(),
            costs: vec![1.0; n],
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
        };
        let mut seen = HashSet::new();
        for &(lineno, u, v, p) in &raw {
            g.push_edge(u, v, p, &mut seen)
                .map_err(|msg| Error::parse(lineno, msg))?;
        }
        g.sort_adjacency();
        Ok(g)
    }

    /// Writes the graph in the edge-list format accepted by
    /// [`read_edge_list`](Self::read_edge_list). Probabilities use the
    /// shortest representation that round-trips exactly; the node-count
    /// header keeps isolated trailing nodes through a round trip.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# nodes {}", self.n)?;
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.src, e.dst, e.prob)?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_edge_list(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Loads node costs from a text file of `u c` lines (same comment rules
    /// as the edge list). Nodes absent from the file keep cost 1.
    pub fn load_costs(self, path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        self.read_costs(BufReader::new(file))
    }

    pub fn read_costs<R: BufRead>(mut self, reader: R) -> Result<Self> {
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let content = match line.split('#').next() {
                Some(c) => c.trim(),
                None => "",
            };
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let u = parse_id(fields.next(), lineno, "node id")?;
            let c = match fields.next() {
                Some(tok) => tok
                    .parse::<f64>()
                    .map_err(|e| Error::parse(lineno, format!("bad cost '{tok}': {e}")))?,
                None => return Err(Error::parse(lineno, "missing cost")),
            };
            if u as usize >= self.n {
                return Err(Error::parse(lineno, format!("node id {u} out of range")));
            }
            if c.is_nan() || c <= 0.0 {
                return Err(Error::parse(lineno, format!("cost {c} must be positive")));
            }
            self.costs[u as usize] = c;
        }
        Ok(self)
    }

    pub fn write_costs<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (i, c) in self.costs.iter().enumerate() {
            writeln!(w, "{i} {c}")?;
        }
        Ok(())
    }

    pub fn save_costs(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_costs(&mut w)?;
        w.flush()?;
        Ok(())
    }

    // ------------------------------------------------------------------
    // Probability and cost assignment
    // ------------------------------------------------------------------

    /// Replaces every edge probability according to `model`. Deterministic
    /// for a fixed `rng_seed`.
    pub fn assign_probabilities(mut self, model: &ProbModel, rng_seed: u64) -> Result<Self> {
        model.validate()?;
        if self.edges.is_empty() {
            return Err(Error::invalid(
                "cannot assign probabilities: graph has no edges",
            ));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
        let in_deg: Vec<usize> = (0..self.n).map(|v| self.inn[v].len()).collect();
        let mut probs = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let p = match model {
                ProbModel::WeightedCascade => 1.0 / in_deg[e.dst.index()] as f64,
                ProbModel::Trivalency { values } => values[rng.gen_range(0..values.len())],
                ProbModel::Random { lo, hi } => rng.gen_range(*lo..=*hi),
                ProbModel::PowerLaw { beta, lo, hi, .. } => {
                    sample_truncated_power_law(&mut rng, *beta, *lo, *hi)
                }
            };
            debug_assert!(p > 0.0 && p <= 1.0);
            probs.push(p);
        }
        for (e, p) in self.edges.iter_mut().zip(&probs) {
            e.prob = *p;
        }
        self.rebuild_adjacency();
        Ok(self)
    }

    /// Replaces every node cost according to `model`. Deterministic for a
    /// fixed `rng_seed`.
    pub fn assign_costs(mut self, model: &CostModel, rng_seed: u64) -> Result<Self> {
        model.validate()?;
        match model {
            CostModel::Unit => self.costs.iter_mut().for_each(|c| *c = 1.0),
            CostModel::Uniform { lo, hi } => {
                let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
                for c in self.costs.iter_mut() {
                    *c = rng.gen_range(*lo..=*hi);
                }
            }
        }
        Ok(self)
    }

    fn rebuild_adjacency(&mut self) {
        for adj in self.out.iter_mut().chain(self.inn.iter_mut()) {
            adj.clear();
        }
        for e in &self.edges {
            self.out[e.src.index()].push(Neighbor {
                node: e.dst,
                prob: e.prob,
            });
            self.inn[e.dst.index()].push(Neighbor {
                node: e.src,
                prob: e.prob,
            });
        }
        self.sort_adjacency();
    }
}

fn parse_id(tok: Option<&str>, lineno: usize, what: &str) -> Result<u32> {
    let tok = tok.ok_or_else(|| Error::parse(lineno, format!("missing {what}")))?;
    tok.parse::<u32>()
        .map_err(|e| Error::parse(lineno, format!("bad {what} '{tok}': {e}")))
}

/// Inverse-CDF draw from the density proportional to `x^-beta` truncated to
/// `[lo, hi]`. The scale parameter of the power law cancels under
/// normalization, so only `beta` shapes the distribution.
fn sample_truncated_power_law<R: Rng>(rng: &mut R, beta: f64, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    let x = if (beta - 1.0).abs() < 1e-12 {
        // density 1/x: F^-1(u) = lo * (hi/lo)^u
        lo * (hi / lo).powf(u)
    } else {
        let t = 1.0 - beta;
        (lo.powf(t) + u * (hi.powf(t) - lo.powf(t))).powf(1.0 / t)
    };
    x.clamp(lo, hi)
}

/// Edge-probability generation models.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbModel {
    /// `p(u,v) = 1 / in-degree(v)`.
    WeightedCascade,
    /// Each edge draws uniformly from a small fixed value set.
    Trivalency { values: Vec<f64> },
    /// Uniform in `[lo, hi]`.
    Random { lo: f64, hi: f64 },
    /// Truncated power-law density `~ alpha / x^beta` on `[lo, hi]`.
    /// `alpha` is retained for reporting but drops out of the normalized
    /// density.
    PowerLaw {
        alpha: f64,
        beta: f64,
        lo: f64,
        hi: f64,
    },
}

impl ProbModel {
    /// The conventional trivalency value set.
    pub fn trivalency_default() -> Self {
        ProbModel::Trivalency {
            values: vec![0.1, 0.01, 0.001],
        }
    }

    /// Uniform on `[0.001, 0.2]`.
    pub fn random_default() -> Self {
        ProbModel::Random { lo: 0.001, hi: 0.2 }
    }

    /// Power law with `alpha = 0.05`, `beta = 0.9` on `[0.001, 0.2]`.
    pub fn power_law_default() -> Self {
        ProbModel::PowerLaw {
            alpha: 0.05,
            beta: 0.9,
            lo: 0.001,
            hi: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProbModel::WeightedCascade => Ok(()),
            ProbModel::Trivalency { values } => {
                if values.is_empty() {
                    return Err(Error::invalid("trivalency value set is empty"));
                }
                for &v in values {
                    check_prob(v).map_err(Error::invalid)?;
                }
                Ok(())
            }
            ProbModel::Random { lo, hi } => {
                if !(0.0 < *lo && lo < hi && *hi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "random model requires 0 < lo < hi <= 1, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
            ProbModel::PowerLaw {
                alpha,
                beta,
                lo,
                hi,
            } => {
                if alpha.is_nan() || *alpha <= 0.0 {
                    return Err(Error::invalid("power-law alpha must be > 0"));
                }
                if beta.is_nan() || *beta < 0.0 {
                    return Err(Error::invalid("power-law beta must be >= 0"));
                }
                if !(0.0 < *lo && lo < hi && *hi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "power-law bounds require 0 < lo < hi <= 1, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Node-cost assignment models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// Every cost exactly 1; budgeted selection degenerates to cardinality
    /// selection.
    Unit,
    /// Cost uniform in `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            CostModel::Unit => Ok(()),
            CostModel::Uniform { lo, hi } => {
                if !(0.0 < *lo && lo <= hi) {
                    return Err(Error::invalid(format!(
                        "uniform cost bounds must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
        }
    }
}

//! Rank-oriented DAG reductions of the influence region of a seed set.
//!
//! Ranks come from a multi-source shortest-path run seeded at every seed
//! node (the virtual super-root is implicit: seeds start at rank 0). Both
//! builders keep an edge only when it goes from lower to higher rank under
//! a shared orientation predicate, so the second builder's edge set is a
//! subset of the first's for the same seeds and threshold.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::graph::{InfluenceGraph, NodeId};
use crate::region::{dijkstra_region, DijkstraRegion, MioaCache};

/// Ranks within `RANK_TIE_EPS` compare as tied; the tie falls back to
/// (hops, node id) so the orientation stays antisymmetric.
pub const RANK_TIE_EPS: f64 = 1e-12;

const NO_PARENT: u32 = u32::MAX;

/// Result of the multi-source rank computation: every node whose best path
/// probability from the seed set is at least theta, with its rank
/// (`-log10` of that probability), hop count, and shortest-path-tree
/// parent.
pub struct NodeRanks {
    seeds: Vec<u32>,
    seed_set: HashSet<u32>,
    region: DijkstraRegion,
}

impl NodeRanks {
    /// Members in finalization order (a topological order for both DAGs).
    pub fn members(&self) -> &[u32] {
        &self.region.order
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.region.in_set.contains(v.index())
    }

    pub fn rank(&self, v: NodeId) -> Option<f64> {
        self.contains(v).then(|| self.region.rank[v.index()])
    }

    pub fn hops(&self, v: NodeId) -> Option<u32> {
        self.contains(v).then(|| self.region.hops[v.index()])
    }

    pub fn is_seed(&self, v: NodeId) -> bool {
        self.seed_set.contains(&v.0)
    }

    /// Orientation predicate shared by both DAG builders: strict rank
    /// order with a `RANK_TIE_EPS` tolerance, falling back to hop count
    /// and then node id. Tree edges of the underlying shortest-path run
    /// always satisfy it.
    fn orient_less(&self, u: u32, v: u32) -> bool {
        let (ru, rv) = (self.region.rank[u as usize], self.region.rank[v as usize]);
        if (ru - rv).abs() <= RANK_TIE_EPS {
            let (hu, hv) = (self.region.hops[u as usize], self.region.hops[v as usize]);
            (hu, u) < (hv, v)
        } else {
            ru < rv
        }
    }

    /// True when the edge `(u, v)` should appear in a DAG: both endpoints
    /// present, not a seed-to-seed edge (seeds are clamped active, so such
    /// edges carry no information), and oriented low-to-high.
    fn keep_edge(&self, u: u32, v: u32) -> bool {
        if !(self.region.in_set.contains(u as usize) && self.region.in_set.contains(v as usize)) {
            return false;
        }
        if self.seed_set.contains(&u) && self.seed_set.contains(&v) {
            return false;
        }
        self.orient_less(u, v)
    }
}

/// Multi-source ranks from a seed set (every seed at rank 0), truncated at
/// `theta`.
pub fn node_ranks(g: &InfluenceGraph, seeds: &[NodeId], theta: f64) -> Result<NodeRanks> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!(
            "influence threshold must lie in (0, 1), got {theta}"
        )));
    }
    let seed_ids = g.check_node_set(seeds)?;
    if seed_ids.is_empty() {
        return Err(Error::invalid("seed set is empty"));
    }
    let region = dijkstra_region(g, &seed_ids, theta);
    Ok(NodeRanks {
        seed_set: seed_ids.iter().copied().collect(),
        seeds: seed_ids,
        region,
    })
}

/// Acyclic reduction of the influence region of a seed set. Nodes are held
/// in topological order; edges carry the original graph's probabilities.
#[derive(Debug, Clone)]
pub struct InfluenceDag {
    n_global: usize,
    /// Topological order (seeds first).
    nodes: Vec<NodeId>,
    index: HashMap<u32, u32>,
    ranks: Vec<f64>,
    seed_flags: Vec<bool>,
    seeds: Vec<NodeId>,
    /// Per node, its parents as (local index, edge probability).
    parents: Vec<Vec<(u32, f64)>>,
    edges: Vec<(NodeId, NodeId, f64)>,
}

impl InfluenceDag {
    /// Node count of the graph this DAG was cut from.
    pub fn global_node_count(&self) -> usize {
        self.n_global
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes in topological order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.index.contains_key(&v.0)
    }

    pub fn rank_of(&self, v: NodeId) -> Option<f64> {
        self.index.get(&v.0).map(|&i| self.ranks[i as usize])
    }

    pub fn is_seed(&self, v: NodeId) -> bool {
        self.index
            .get(&v.0)
            .is_some_and(|&i| self.seed_flags[i as usize])
    }

    /// Edges as (src, dst, prob), sorted by (src, dst).
    pub fn edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.edges
    }

    pub(crate) fn parents_of(&self, local: usize) -> &[(u32, f64)] {
        &self.parents[local]
    }

    pub(crate) fn seed_flag(&self, local: usize) -> bool {
        self.seed_flags[local]
    }

    /// Dumps the DAG in edge-list format with node ranks appended as
    /// comment lines, so the output is still loadable as a graph.
    pub fn write_debug<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (u, v, p) in &self.edges {
            writeln!(w, "{u} {v} {p}")?;
        }
        writeln!(w, "# node rank")?;
        for (i, v) in self.nodes.iter().enumerate() {
            writeln!(w, "# {v} {}", self.ranks[i])?;
        }
        Ok(())
    }

    fn assemble(
        g: &InfluenceGraph,
        nr: &NodeRanks,
        node_order: Vec<u32>,
        mut edge_list: Vec<(u32, u32, f64)>,
    ) -> Self {
        edge_list.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let index: HashMap<u32, u32> = node_order
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        let mut parents: Vec<Vec<(u32, f64)>> = vec![Vec::new(); node_order.len()];
        for &(u, v, p) in &edge_list {
            let (ui, vi) = (index[&u], index[&v]);
            debug_assert!(ui < vi, "edge ({u}, {v}) violates the topological order");
            parents[vi as usize].push((ui, p));
        }
        let ranks = node_order
            .iter()
            .map(|&v| nr.region.rank[v as usize])
            .collect();
        let seed_flags: Vec<bool> = node_order
            .iter()
            .map(|&v| nr.seed_set.contains(&v))
            .collect();
        InfluenceDag {
            n_global: g.node_count(),
            nodes: node_order.iter().map(|&v| NodeId(v)).collect(),
            index,
            ranks,
            seed_flags,
            seeds: nr.seeds.iter().map(|&s| NodeId(s)).collect(),
            parents,
            edges: edge_list
                .into_iter()
                .map(|(u, v, p)| (NodeId(u), NodeId(v), p))
                .collect(),
        }
    }
}

/// First DAG builder: the multi-source shortest-path tree of the seed set,
/// augmented with every original edge that runs from lower to higher rank.
pub fn build_dag1(g: &InfluenceGraph, seeds: &[NodeId], theta: f64) -> Result<InfluenceDag> {
    let nr = node_ranks(g, seeds, theta)?;
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let mut tree: HashSet<(u32, u32)> = HashSet::new();
    for &v in nr.members() {
        let p = nr.region.parent[v as usize];
        if p != NO_PARENT {
            tree.insert((p, v));
            edges.push((p, v, nr.region.edge_prob[v as usize]));
        }
    }
    for &u in nr.members() {
        for nb in g.out_neighbors(NodeId(u)) {
            let v = nb.node.0;
            if nr.keep_edge(u, v) && !tree.contains(&(u, v)) {
                edges.push((u, v, nb.prob));
            }
        }
    }
    Ok(InfluenceDag::assemble(g, &nr, nr.members().to_vec(), edges))
}

/// Second DAG builder: the union of the seeds' cached MIOA trees with every
/// edge violating the rank orientation removed.
pub fn build_dag2(
    g: &InfluenceGraph,
    seeds: &[NodeId],
    cache: &MioaCache,
    theta: f64,
) -> Result<InfluenceDag> {
    if cache.theta() != theta {
        return Err(Error::invalid(format!(
            "MIOA cache was built at theta {}, DAG requested at {theta}",
            cache.theta()
        )));
    }
    if cache.trees().len() != g.node_count() {
        return Err(Error::invalid("MIOA cache does not match the graph"));
    }
    let nr = node_ranks(g, seeds, theta)?;

    let mut in_union: HashSet<u32> = HashSet::new();
    let mut union_edges: HashSet<(u32, u32)> = HashSet::new();
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    for &s in &nr.seeds {
        for m in cache.tree(NodeId(s)).members() {
            in_union.insert(m.node.0);
            if let Some(parent) = m.parent {
                let key = (parent.0, m.node.0);
                if union_edges.insert(key) && nr.keep_edge(key.0, key.1) {
                    edges.push((key.0, key.1, m.edge_prob));
                }
            }
        }
    }

    // The union's node set equals the rank region's (the best multi-source
    // path probability is the max over per-seed best paths), so the rank
    // run's finalization order restricted to the union is a topological
    // order for the pruned edge set.
    let node_order: Vec<u32> = nr
        .members()
        .iter()
        .copied()
        .filter(|v| in_union.contains(v))
        .collect();
    debug_assert_eq!(node_order.len(), in_union.len());
    Ok(InfluenceDag::assemble(g, &nr, node_order, edges))
}

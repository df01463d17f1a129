//! Influence regions: maximum-influence paths, per-node out-arborescences,
//! and the peer-seeds overlap index.
//!
//! The maximum-influence path from `u` to `v` maximizes the product of edge
//! probabilities; it is found as a shortest path under `-log10 p` edge
//! weights. Ties are broken by fewer hops, then by the smaller predecessor
//! id at each relaxation, which keeps sub-paths of maximum-influence paths
//! maximal themselves.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{InfluenceGraph, NodeId};

const NO_PARENT: u32 = u32::MAX;

/// Propagation probability of a path: the product of its edge
/// probabilities. A single-node path has probability 1.
pub fn path_prob(g: &InfluenceGraph, path: &[NodeId]) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::invalid("empty path"));
    }
    for &v in path {
        if !g.contains_node(v) {
            return Err(Error::invalid(format!("unknown node {v} in path")));
        }
    }
    let mut p = 1.0;
    for w in path.windows(2) {
        match g.edge_prob(w[0], w[1]) {
            Some(ep) => p *= ep,
            None => {
                return Err(Error::invalid(format!(
                    "({}, {}) is not an edge",
                    w[0], w[1]
                )))
            }
        }
    }
    Ok(p)
}

/// One node of a [`MioaTree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MioaMember {
    pub node: NodeId,
    /// Tree parent; `None` for the root.
    pub parent: Option<NodeId>,
    /// Product of edge probabilities along the tree path from the root.
    pub path_prob: f64,
    /// `-log10(path_prob)` accumulated along the tree path.
    pub rank: f64,
    /// Tree depth.
    pub hops: u32,
    /// Probability of the tree edge `(parent, node)`; 1 for the root.
    pub edge_prob: f64,
}

/// Maximum-influence out-arborescence of one root: all nodes whose best
/// path probability from the root is at least `theta`, with the tree
/// realizing those paths.
#[derive(Debug, Clone)]
pub struct MioaTree {
    root: NodeId,
    theta: f64,
    /// Members in Dijkstra finalization order (root first); this order is
    /// topological for the tree.
    members: Vec<MioaMember>,
    index: HashMap<u32, u32>,
}

impl MioaTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in finalization (topological) order.
    pub fn members(&self) -> &[MioaMember] {
        &self.members
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.index.contains_key(&v.0)
    }

    pub fn member(&self, v: NodeId) -> Option<&MioaMember> {
        self.index.get(&v.0).map(|&i| &self.members[i as usize])
    }

    /// Tree path from the root to `v`, if `v` is a member.
    pub fn path_to(&self, v: NodeId) -> Option<Vec<NodeId>> {
        let mut path = vec![self.member(v)?.node];
        let mut cur = self.member(v)?;
        while let Some(p) = cur.parent {
            path.push(p);
            cur = self.member(p)?;
        }
        path.reverse();
        Some(path)
    }
}

/// Dense output of a (multi-source) shortest-path run under `-log10 p`
/// weights, truncated at the influence threshold.
pub(crate) struct DijkstraRegion {
    /// Finalization order under the (rank, hops, id) key.
    pub order: Vec<u32>,
    pub in_set: FixedBitSet,
    pub rank: Vec<f64>,
    pub hops: Vec<u32>,
    /// `NO_PARENT` for sources.
    pub parent: Vec<u32>,
    pub path_prob: Vec<f64>,
    /// Probability of the tree edge into each node; 1 for sources.
    pub edge_prob: Vec<f64>,
}

struct HeapEntry {
    rank: f64,
    hops: u32,
    node: u32,
    parent: u32,
    path_prob: f64,
    edge_prob: f64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Reversed: BinaryHeap is a max-heap and we want the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .rank
            .total_cmp(&self.rank)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.parent.cmp(&self.parent))
    }
}

/// Multi-source Dijkstra over `-log10 p`, keeping nodes with
/// `rank <= -log10(theta)`. Sources start at rank 0.
pub(crate) fn dijkstra_region(g: &InfluenceGraph, sources: &[u32], theta: f64) -> DijkstraRegion {
    let n = g.node_count();
    let theta_rank = -theta.log10();
    let mut region = DijkstraRegion {
        order: Vec::new(),
        in_set: FixedBitSet::with_capacity(n),
        rank: vec![f64::INFINITY; n],
        hops: vec![u32::MAX; n],
        parent: vec![NO_PARENT; n],
        path_prob: vec![0.0; n],
        edge_prob: vec![0.0; n],
    };
    let mut finalized = FixedBitSet::with_capacity(n);
    // Best-so-far key per node, used to drop stale heap entries.
    let mut best: Vec<(f64, u32, u32)> = vec![(f64::INFINITY, u32::MAX, NO_PARENT); n];

    let mut heap = BinaryHeap::new();
    for &s in sources {
        best[s as usize] = (0.0, 0, NO_PARENT);
        heap.push(HeapEntry {
            rank: 0.0,
            hops: 0,
            node: s,
            parent: NO_PARENT,
            path_prob: 1.0,
            edge_prob: 1.0,
        });
    }

    while let Some(e) = heap.pop() {
        let v = e.node as usize;
        if finalized.contains(v) {
            continue;
        }
        if (e.rank, e.hops, e.parent) != best[v] {
            continue; // superseded by a better candidate
        }
        finalized.insert(v);
        region.order.push(e.node);
        region.in_set.insert(v);
        region.rank[v] = e.rank;
        region.hops[v] = e.hops;
        region.parent[v] = e.parent;
        region.path_prob[v] = e.path_prob;
        region.edge_prob[v] = e.edge_prob;

        for nb in g.out_neighbors(e.node.into()) {
            let w = nb.node.index();
            if finalized.contains(w) {
                continue;
            }
            let rank = e.rank + -nb.prob.log10();
            if rank > theta_rank {
                continue;
            }
            let hops = e.hops + 1;
            let cand = (rank, hops, e.node);
            let cur = best[w];
            let improves = match rank.total_cmp(&cur.0) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => (hops, e.node) < (cur.1, cur.2),
            };
            if improves {
                best[w] = cand;
                heap.push(HeapEntry {
                    rank,
                    hops,
                    node: nb.node.0,
                    parent: e.node,
                    path_prob: e.path_prob * nb.prob,
                    edge_prob: nb.prob,
                });
            }
        }
    }
    region
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!(
            "influence threshold must lie in (0, 1), got {theta}"
        )));
    }
    Ok(())
}

/// Builds the maximum-influence out-arborescence of `root` at threshold
/// `theta`.
pub fn build_mioa(g: &InfluenceGraph, root: NodeId, theta: f64) -> Result<MioaTree> {
    check_theta(theta)?;
    if !g.contains_node(root) {
        return Err(Error::invalid(format!("unknown root {root}")));
    }
    let region = dijkstra_region(g, &[root.0], theta);
    let mut members = Vec::with_capacity(region.order.len());
    let mut index = HashMap::with_capacity(region.order.len());
    for (i, &v) in region.order.iter().enumerate() {
        let vi = v as usize;
        let parent = region.parent[vi];
        members.push(MioaMember {
            node: NodeId(v),
            parent: (parent != NO_PARENT).then_some(NodeId(parent)),
            path_prob: region.path_prob[vi],
            rank: region.rank[vi],
            hops: region.hops[vi],
            edge_prob: region.edge_prob[vi],
        });
        index.insert(v, i as u32);
    }
    Ok(MioaTree {
        root,
        theta,
        members,
        index,
    })
}

/// Per-node MIOA trees, built once and shared by DAG construction and the
/// optimized selector.
#[derive(Debug, Clone)]
pub struct MioaCache {
    theta: f64,
    trees: Vec<MioaTree>,
}

impl MioaCache {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tree(&self, v: NodeId) -> &MioaTree {
        &self.trees[v.index()]
    }

    pub fn trees(&self) -> &[MioaTree] {
        &self.trees
    }
}

/// Builds the MIOA of every node in parallel.
pub fn build_mioa_cache(g: &InfluenceGraph, theta: f64) -> Result<MioaCache> {
    check_theta(theta)?;
    let trees: Vec<MioaTree> = (0..g.node_count() as u32)
        .into_par_iter()
        .map(|v| build_mioa(g, NodeId(v), theta).expect("validated inputs"))
        .collect();
    Ok(MioaCache { theta, trees })
}

/// For every node `v`, the set of nodes whose influence region overlaps
/// `v`'s. Symmetric and reflexive.
#[derive(Debug, Clone)]
pub struct PeerSeedsIndex {
    theta: f64,
    peers: Vec<FixedBitSet>,
}

impl PeerSeedsIndex {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn are_peers(&self, u: NodeId, v: NodeId) -> bool {
        self.peers[u.index()].contains(v.index())
    }

    pub fn peers_of(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.peers[v.index()].ones().map(|i| NodeId(i as u32))
    }

    pub fn peer_count(&self, v: NodeId) -> usize {
        self.peers[v.index()].count_ones(..)
    }
}

/// Builds the peer-seeds index from one MIOA per node: `u` and `v` are
/// peers iff their member sets intersect.
pub fn build_peer_seeds(trees: &[MioaTree], theta: f64) -> Result<PeerSeedsIndex> {
    check_theta(theta)?;
    let n = trees.len();
    for (i, t) in trees.iter().enumerate() {
        if t.root().index() != i {
            return Err(Error::invalid(format!(
                "tree at position {i} is rooted at {}; expected one tree per node in id order",
                t.root()
            )));
        }
        if t.theta() != theta {
            return Err(Error::invalid(format!(
                "tree of {} was built at theta {}, index requested at {theta}",
                t.root(),
                t.theta()
            )));
        }
    }

    // roots_containing[w] = bitset of roots whose region includes w
    let mut roots_containing = vec![FixedBitSet::with_capacity(n); n];
    for t in trees {
        for m in t.members() {
            roots_containing[m.node.index()].insert(t.root().index());
        }
    }
    let peers = trees
        .par_iter()
        .map(|t| {
            let mut bits = FixedBitSet::with_capacity(n);
            for m in t.members() {
                bits.union_with(&roots_containing[m.node.index()]);
            }
            bits
        })
        .collect();
    Ok(PeerSeedsIndex { theta, peers })
}

/// Convenience: cache + index in one call.
pub fn build_peer_seeds_from_cache(cache: &MioaCache) -> Result<PeerSeedsIndex> {
    build_peer_seeds(cache.trees(), cache.theta())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32, f64)]) -> InfluenceGraph {
        InfluenceGraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn path_prob_basics() {
        let g = graph(3, &[(0, 1, 0.5), (1, 2, 0.2)]);
        assert_eq!(path_prob(&g, &[NodeId(0)]).unwrap(), 1.0);
        let p = path_prob(&g, &[NodeId(0), NodeId(1), NodeId(2)]).unwrap();
        assert!((p - 0.1).abs() < 1e-15);
        assert!(path_prob(&g, &[NodeId(2), NodeId(0)]).is_err());
        assert!(path_prob(&g, &[]).is_err());
    }

    #[test]
    fn mioa_of_leaf_is_singleton() {
        let g = graph(3, &[(0, 1, 0.5), (1, 2, 0.2)]);
        let t = build_mioa(&g, NodeId(2), 0.01).unwrap();
        assert_eq!(t.len(), 1);
        let root = t.member(NodeId(2)).unwrap();
        assert_eq!(root.path_prob, 1.0);
        assert_eq!(root.rank, 0.0);
        assert_eq!(root.parent, None);
    }

    #[test]
    fn theta_above_all_probs_keeps_only_root() {
        let g = graph(3, &[(0, 1, 0.3), (0, 2, 0.4), (1, 2, 0.2)]);
        let t = build_mioa(&g, NodeId(0), 0.5).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn mioa_picks_max_probability_paths() {
        // 0 -> 1 direct (0.3) vs 0 -> 2 -> 1 (0.9 * 0.5 = 0.45)
        let g = graph(3, &[(0, 1, 0.3), (0, 2, 0.9), (2, 1, 0.5)]);
        let t = build_mioa(&g, NodeId(0), 0.001).unwrap();
        let m1 = t.member(NodeId(1)).unwrap();
        assert_eq!(m1.parent, Some(NodeId(2)));
        assert!((m1.path_prob - 0.45).abs() < 1e-12);
        assert!((m1.rank - (-0.45f64.log10())).abs() < 1e-12);
    }

    #[test]
    fn equal_probability_tie_prefers_fewer_hops_then_smaller_parent() {
        // two-hop path with product 0.25 vs direct edge 0.25
        let g = graph(3, &[(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.25)]);
        let t = build_mioa(&g, NodeId(0), 0.001).unwrap();
        let m2 = t.member(NodeId(2)).unwrap();
        assert_eq!(m2.parent, Some(NodeId(0)), "fewer hops wins the tie");

        // same rank, same hops, two predecessors: the smaller id wins
        let g = graph(4, &[(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)]);
        let t = build_mioa(&g, NodeId(0), 0.001).unwrap();
        assert_eq!(t.member(NodeId(3)).unwrap().parent, Some(NodeId(1)));
    }

    #[test]
    fn rank_matches_path_prob_and_tree_paths_are_consistent() {
        let g = graph(
            6,
            &[
                (0, 1, 0.9),
                (0, 2, 0.4),
                (1, 3, 0.8),
                (2, 3, 0.9),
                (3, 4, 0.5),
                (1, 5, 0.1),
            ],
        );
        let t = build_mioa(&g, NodeId(0), 1e-6).unwrap();
        for m in t.members() {
            assert!((m.rank + m.path_prob.log10()).abs() < 1e-9);
            assert!(m.path_prob >= t.theta() * (1.0 - 1e-9));
            let path = t.path_to(m.node).unwrap();
            let p = path_prob(&g, &path).unwrap();
            assert!((p - m.path_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn peer_seeds_symmetric_reflexive() {
        let g = graph(5, &[(0, 2, 0.5), (1, 2, 0.5), (3, 4, 0.5)]);
        let cache = build_mioa_cache(&g, 0.01).unwrap();
        let ps = build_peer_seeds_from_cache(&cache).unwrap();
        for u in g.nodes() {
            assert!(ps.are_peers(u, u));
            for v in g.nodes() {
                assert_eq!(ps.are_peers(u, v), ps.are_peers(v, u));
            }
        }
        // 0 and 1 overlap at 2; the 3-4 component is separate
        assert!(ps.are_peers(NodeId(0), NodeId(1)));
        assert!(!ps.are_peers(NodeId(0), NodeId(3)));
        assert!(ps.are_peers(NodeId(3), NodeId(4)));
    }

    #[test]
    fn peer_seeds_rejects_theta_mismatch() {
        let g = graph(2, &[(0, 1, 0.5)]);
        let t0 = build_mioa(&g, NodeId(0), 0.01).unwrap();
        let t1 = build_mioa(&g, NodeId(1), 0.02).unwrap();
        assert!(build_peer_seeds(&[t0, t1], 0.01).is_err());
    }

    #[test]
    fn invalid_theta_rejected() {
        let g = graph(2, &[(0, 1, 0.5)]);
        assert!(build_mioa(&g, NodeId(0), 0.0).is_err());
        assert!(build_mioa(&g, NodeId(0), 1.0).is_err());
    }
}

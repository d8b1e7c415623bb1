//! Labeled directed graph with group accounting.
//!
//! Stores a simple digraph (no self-loops, no parallel edges) over dense
//! node ids `0..n`, a binary group label per node, and edge mixing counts
//! maintained incrementally so homophily is O(1) to read.

use std::collections::HashSet;

use thiserror::Error;

/// Dense node identifier, `0..n`.
pub type NodeId = u32;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self-loop ({0},{0}) rejected")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0},{1}) rejected")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0},{1}) does not exist")]
    MissingEdge(NodeId, NodeId),
    #[error("node {0} out of range (n = {1})")]
    NodeOutOfRange(NodeId, usize),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("homophily undefined: group {0:?} has no outgoing edges")]
    UndefinedHomophily(Group),
}

/// Binary group membership. Label files encode majority as 0, minority as 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Majority,
    Minority,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::Minority, Group::Majority];

    pub fn idx(self) -> usize {
        match self {
            Group::Majority => 0,
            Group::Minority => 1,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::Majority => Group::Minority,
            Group::Minority => Group::Majority,
        }
    }

    pub fn from_code(code: u8) -> Option<Group> {
        match code {
            0 => Some(Group::Majority),
            1 => Some(Group::Minority),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Group::Majority => 0,
            Group::Minority => 1,
        }
    }
}

/// Edge counts by (source group, target group).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MixingCounts {
    counts: [[usize; 2]; 2],
}

impl MixingCounts {
    pub fn between(&self, src: Group, dst: Group) -> usize {
        self.counts[src.idx()][dst.idx()]
    }

    /// `|E_ii|`: edges starting and ending in group `i`.
    pub fn within(&self, i: Group) -> usize {
        self.counts[i.idx()][i.idx()]
    }

    /// `|E_i.|`: edges starting in group `i`.
    pub fn from_group(&self, i: Group) -> usize {
        self.counts[i.idx()][0] + self.counts[i.idx()][1]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn add(&mut self, src: Group, dst: Group) {
        self.counts[src.idx()][dst.idx()] += 1;
    }

    fn remove(&mut self, src: Group, dst: Group) {
        self.counts[src.idx()][dst.idx()] -= 1;
    }
}

/// Directed simple graph with a binary group label per node.
///
/// Both adjacency views are kept sorted by node id, which makes iteration
/// order deterministic and membership checks O(log d).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDigraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    labels: Vec<Group>,
    edge_count: usize,
    mixing: MixingCounts,
}

impl LabeledDigraph {
    pub fn new(labels: Vec<Group>) -> Self {
        let n = labels.len();
        LabeledDigraph {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            labels,
            edge_count: 0,
            mixing: MixingCounts::default(),
        }
    }

    /// All-majority graph of `n` nodes; labels are assigned afterwards.
    pub fn with_node_count(n: usize) -> Self {
        Self::new(vec![Group::Majority; n])
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn label(&self, u: NodeId) -> Group {
        self.labels[u as usize]
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    /// Relabels `u`, updating mixing counts for every incident edge.
    pub fn set_label(&mut self, u: NodeId, group: Group) {
        let old = self.labels[u as usize];
        if old == group {
            return;
        }
        for i in 0..self.out_adj[u as usize].len() {
            let v = self.out_adj[u as usize][i];
            self.mixing.remove(old, self.labels[v as usize]);
            self.mixing.add(group, self.labels[v as usize]);
        }
        for i in 0..self.in_adj[u as usize].len() {
            let w = self.in_adj[u as usize][i];
            self.mixing.remove(self.labels[w as usize], old);
            self.mixing.add(self.labels[w as usize], group);
        }
        self.labels[u as usize] = group;
    }

    pub fn out(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u as usize]
    }

    pub fn incoming(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u as usize]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u as usize].len()
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_adj[u as usize].len()
    }

    pub fn total_degree(&self, u: NodeId) -> usize {
        self.out_degree(u) + self.in_degree(u)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u as usize].binary_search(&v).is_ok()
    }

    fn check_node(&self, u: NodeId) -> Result<(), GraphError> {
        if (u as usize) < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange(u, self.node_count()))
        }
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let slot = match self.out_adj[u as usize].binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u, v)),
            Err(slot) => slot,
        };
        self.out_adj[u as usize].insert(slot, v);
        let slot = self.in_adj[v as usize]
            .binary_search(&u)
            .expect_err("in/out adjacency out of sync");
        self.in_adj[v as usize].insert(slot, u);
        self.edge_count += 1;
        self.mixing
            .add(self.labels[u as usize], self.labels[v as usize]);
        Ok(())
    }

    /// Replaces the existing edge `(u, old_v)` with `(u, new_v)`.
    ///
    /// Out-degrees are preserved by construction; used by the rewiring
    /// transformation. The simulation itself only ever adds edges.
    pub fn rewire_out_edge(
        &mut self,
        u: NodeId,
        old_v: NodeId,
        new_v: NodeId,
    ) -> Result<(), GraphError> {
        self.check_node(new_v)?;
        if new_v == u {
            return Err(GraphError::SelfLoop(u));
        }
        if self.has_edge(u, new_v) {
            return Err(GraphError::DuplicateEdge(u, new_v));
        }
        let slot = self.out_adj[u as usize]
            .binary_search(&old_v)
            .map_err(|_| GraphError::MissingEdge(u, old_v))?;
        self.out_adj[u as usize].remove(slot);
        let slot = self.in_adj[old_v as usize]
            .binary_search(&u)
            .expect("in/out adjacency out of sync");
        self.in_adj[old_v as usize].remove(slot);
        self.mixing
            .remove(self.labels[u as usize], self.labels[old_v as usize]);

        let slot = self.out_adj[u as usize]
            .binary_search(&new_v)
            .expect_err("duplicate checked above");
        self.out_adj[u as usize].insert(slot, new_v);
        let slot = self.in_adj[new_v as usize]
            .binary_search(&u)
            .expect_err("in/out adjacency out of sync");
        self.in_adj[new_v as usize].insert(slot, u);
        self.mixing
            .add(self.labels[u as usize], self.labels[new_v as usize]);
        Ok(())
    }

    pub fn group_size(&self, i: Group) -> usize {
        self.labels.iter().filter(|&&g| g == i).count()
    }

    /// Sorted members of group `i`.
    pub fn members(&self, i: Group) -> Vec<NodeId> {
        (0..self.node_count() as NodeId)
            .filter(|&u| self.labels[u as usize] == i)
            .collect()
    }

    /// `s_i = |V_i| / |V|`.
    pub fn group_share(&self, i: Group) -> Result<f64, GraphError> {
        if self.node_count() == 0 {
            return Err(GraphError::EmptyGraph);
        }
        Ok(self.group_size(i) as f64 / self.node_count() as f64)
    }

    /// `|E_ii| / |E_i.|`: fraction of group-`i`-sourced edges staying in `i`.
    pub fn edge_fraction_within(&self, i: Group) -> Result<f64, GraphError> {
        let from = self.mixing.from_group(i);
        if from == 0 {
            return Err(GraphError::UndefinedHomophily(i));
        }
        Ok(self.mixing.within(i) as f64 / from as f64)
    }

    /// `h_i = |E_ii|/|E_i.| - s_i`, in `(-s_i, 1 - s_i]`.
    pub fn homophily(&self, i: Group) -> Result<f64, GraphError> {
        Ok(self.edge_fraction_within(i)? - self.group_share(i)?)
    }

    pub fn mixing(&self) -> &MixingCounts {
        &self.mixing
    }

    /// Full O(E) recount of mixing counts, for cross-checking the
    /// incrementally maintained ones.
    pub fn recount_mixing(&self) -> MixingCounts {
        let mut counts = MixingCounts::default();
        for u in 0..self.node_count() {
            for &v in &self.out_adj[u] {
                counts.add(self.labels[u], self.labels[v as usize]);
            }
        }
        counts
    }

    /// Nodes reachable in exactly two out-hops that are not `u`, not already
    /// followed by `u`, and not in `excluded`. Sorted by node id.
    pub fn distance2_candidates(&self, u: NodeId, excluded: &HashSet<NodeId>) -> Vec<NodeId> {
        let mut cands: Vec<NodeId> = Vec::new();
        for &z in &self.out_adj[u as usize] {
            for &v in &self.out_adj[z as usize] {
                if v != u && !excluded.contains(&v) {
                    cands.push(v);
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        cands.retain(|&v| !self.has_edge(u, v));
        cands
    }

    /// Sorted edge list, the canonical serialization order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut edges = Vec::with_capacity(self.edge_count);
        for u in 0..self.node_count() {
            for &v in &self.out_adj[u] {
                edges.push((u as NodeId, v));
            }
        }
        edges
    }

    /// Exhaustive structural check: adjacency views mutually consistent and
    /// sorted, no self-loops/duplicates, counts match. Test support.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut total = 0;
        for u in 0..self.node_count() {
            let out = &self.out_adj[u];
            if !out.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("out adjacency of {u} not strictly sorted"));
            }
            if !self.in_adj[u].windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("in adjacency of {u} not strictly sorted"));
            }
            for &v in out {
                if v as usize >= self.node_count() {
                    return Err(format!("edge ({u},{v}) out of range"));
                }
                if v as usize == u {
                    return Err(format!("self-loop at {u}"));
                }
                if self.in_adj[v as usize]
                    .binary_search(&(u as NodeId))
                    .is_err()
                {
                    return Err(format!("edge ({u},{v}) missing from in-adjacency"));
                }
            }
            total += out.len();
        }
        let total_in: usize = self.in_adj.iter().map(Vec::len).sum();
        if total != self.edge_count || total_in != self.edge_count {
            return Err(format!(
                "edge count mismatch: out {total}, in {total_in}, cached {}",
                self.edge_count
            ));
        }
        if self.recount_mixing() != self.mixing {
            return Err("incremental mixing counts disagree with recount".into());
        }
        if self.mixing.total() != self.edge_count {
            return Err("mixing counts do not sum to edge count".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(minority: &[NodeId], n: usize) -> Vec<Group> {
        let mut labels = vec![Group::Majority; n];
        for &u in minority {
            labels[u as usize] = Group::Minority;
        }
        labels
    }

    #[test]
    fn add_edge_updates_both_views() {
        let mut g = LabeledDigraph::with_node_count(2);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.in_degree(1), 1);
        assert_eq!(g.out(0), &[1]);
        assert_eq!(g.incoming(1), &[0]);
    }

    #[test]
    fn add_edge_rejects_self_loop_and_duplicate() {
        let mut g = LabeledDigraph::with_node_count(2);
        assert_eq!(g.add_edge(0, 0), Err(GraphError::SelfLoop(0)));
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(0, 1), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn group_share_counts_labels() {
        let g = LabeledDigraph::new(labels(&[0, 1, 2], 10));
        assert_eq!(g.group_share(Group::Minority).unwrap(), 0.3);
        assert_eq!(g.group_share(Group::Majority).unwrap(), 0.7);

        let all_minority = LabeledDigraph::new(vec![Group::Minority; 4]);
        assert_eq!(all_minority.group_share(Group::Minority).unwrap(), 1.0);
        assert_eq!(all_minority.group_share(Group::Majority).unwrap(), 0.0);

        let empty = LabeledDigraph::new(vec![]);
        assert_eq!(
            empty.group_share(Group::Minority),
            Err(GraphError::EmptyGraph)
        );
    }

    /// 10 nodes, 3 minority, all six ordered minority pairs present.
    fn mixing_fixture() -> LabeledDigraph {
        let mut g = LabeledDigraph::new(labels(&[0, 1, 2], 10));
        for (u, v) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
            g.add_edge(u, v).unwrap();
        }
        g
    }

    #[test]
    fn homophily_matches_hand_count() {
        // |E_mm|/|E_m.| = 14/20 with s_m = 6/20 = 0.3 gives h_m = 0.4.
        let minority: Vec<NodeId> = (0..6).collect();
        let mut g = LabeledDigraph::new(labels(&minority, 20));
        let mut within = 0;
        'fill: for u in 0..6u32 {
            for v in 0..6u32 {
                if within == 14 {
                    break 'fill;
                }
                if u != v {
                    g.add_edge(u, v).unwrap();
                    within += 1;
                }
            }
        }
        for u in 0..6u32 {
            g.add_edge(u, 6 + u).unwrap();
        }
        assert_eq!(g.mixing().within(Group::Minority), 14);
        assert_eq!(g.mixing().from_group(Group::Minority), 20);
        let h = g.homophily(Group::Minority).unwrap();
        assert!((h - 0.4).abs() < 1e-15, "h_m = {h}");
    }

    #[test]
    fn homophily_boundary_all_within() {
        let g = mixing_fixture();
        // all 6 minority edges stay within: h = 1 - s_m = 0.7
        assert_eq!(g.homophily(Group::Minority).unwrap(), 1.0 - 0.3);
    }

    #[test]
    fn homophily_neutral_when_proportional() {
        // edges from minority split 3 within / 7 across: ratio = s_m = 0.3
        let minority: Vec<NodeId> = (0..3).collect();
        let mut g = LabeledDigraph::new(labels(&minority, 10));
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(2, 0).unwrap();
        for (u, v) in [(0, 3), (0, 4), (1, 5), (1, 6), (2, 7), (2, 8), (0, 9)] {
            g.add_edge(u, v).unwrap();
        }
        assert!(g.homophily(Group::Minority).unwrap().abs() < 1e-15);
    }

    #[test]
    fn homophily_undefined_without_outgoing_edges() {
        let mut g = LabeledDigraph::new(labels(&[0], 3));
        g.add_edge(1, 0).unwrap();
        assert_eq!(
            g.homophily(Group::Minority),
            Err(GraphError::UndefinedHomophily(Group::Minority))
        );
    }

    #[test]
    fn edge_fraction_within_boundary_all_cross() {
        let mut g = LabeledDigraph::new(labels(&[0, 1, 2], 10));
        g.add_edge(0, 5).unwrap();
        g.add_edge(1, 6).unwrap();
        assert_eq!(g.edge_fraction_within(Group::Minority).unwrap(), 0.0);
    }

    #[test]
    fn distance2_chain() {
        let mut g = LabeledDigraph::with_node_count(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        assert_eq!(g.distance2_candidates(0, &HashSet::new()), vec![2]);
    }

    #[test]
    fn distance2_saturated_triangle() {
        let mut g = LabeledDigraph::with_node_count(3);
        for (u, v) in [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)] {
            g.add_edge(u, v).unwrap();
        }
        assert!(g.distance2_candidates(0, &HashSet::new()).is_empty());
    }

    #[test]
    fn distance2_respects_exclusions() {
        let mut g = LabeledDigraph::with_node_count(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        let excluded: HashSet<NodeId> = [2].into_iter().collect();
        assert!(g.distance2_candidates(0, &excluded).is_empty());
    }

    #[test]
    fn set_label_keeps_mixing_consistent() {
        let mut g = mixing_fixture();
        g.add_edge(3, 0).unwrap();
        g.add_edge(2, 7).unwrap();
        g.set_label(0, Group::Majority);
        g.set_label(5, Group::Minority);
        assert_eq!(g.recount_mixing(), *g.mixing());
        g.check_consistency().unwrap();
    }

    proptest! {
        /// h_i + s_i = |E_ii|/|E_i.| exactly, and h_i in (-s_i, 1 - s_i].
        #[test]
        fn homophily_identity_and_range(
            edges in proptest::collection::vec((0u32..30, 0u32..30), 1..200),
            minority_mask in proptest::collection::vec(any::<bool>(), 30),
        ) {
            let labels: Vec<Group> = minority_mask
                .iter()
                .map(|&m| if m { Group::Minority } else { Group::Majority })
                .collect();
            let mut g = LabeledDigraph::new(labels);
            for (u, v) in edges {
                let _ = g.add_edge(u, v);
            }
            for group in Group::BOTH {
                let s = g.group_share(group).unwrap();
                if let Ok(h) = g.homophily(group) {
                    let within = g.mixing().within(group) as f64
                        / g.mixing().from_group(group) as f64;
                    prop_assert!((h + s - within).abs() < 1e-15);
                    prop_assert!(h > -s - 1e-15 && h <= 1.0 - s + 1e-15);
                }
            }
        }

        /// Incremental mixing equals full recount; adjacency views symmetric.
        #[test]
        fn incremental_mixing_matches_recount(
            edges in proptest::collection::vec((0u32..40, 0u32..40), 0..300),
            minority_mask in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let labels: Vec<Group> = minority_mask
                .iter()
                .map(|&m| if m { Group::Minority } else { Group::Majority })
                .collect();
            let mut g = LabeledDigraph::new(labels);
            for (u, v) in edges {
                let _ = g.add_edge(u, v);
            }
            prop_assert_eq!(g.recount_mixing(), *g.mixing());
            prop_assert!(g.check_consistency().is_ok());
        }

        /// Candidates never contain u, current out-neighbors, or exclusions.
        #[test]
        fn distance2_excludes_forbidden_nodes(
            edges in proptest::collection::vec((0u32..20, 0u32..20), 0..120),
            u in 0u32..20,
            excluded in proptest::collection::hash_set(0u32..20, 0..8),
        ) {
            let mut g = LabeledDigraph::with_node_count(20);
            for (a, b) in edges {
                let _ = g.add_edge(a, b);
            }
            let cands = g.distance2_candidates(u, &excluded);
            for &v in &cands {
                prop_assert!(v != u);
                prop_assert!(!g.has_edge(u, v));
                prop_assert!(!excluded.contains(&v));
                // two-hop witness exists
                prop_assert!(g.out(u).iter().any(|&z| g.has_edge(z, v)));
            }
        }
    }
}

//! Directed Adamic-Adar scoring.
//!
//! The score of a missing edge (u,v) sums 1/ln(total degree) over every
//! intermediary z with (u,z) and (z,v) present, so paths through hubs are
//! penalized. An intermediary always has total degree >= 2, keeping the
//! logarithm strictly positive.

use crate::graph::{LabeledDigraph, NodeId};

pub fn ada_score(g: &LabeledDigraph, u: NodeId, v: NodeId) -> f64 {
    g.out(u)
        .iter()
        .filter(|&&z| g.has_edge(z, v))
        .map(|&z| 1.0 / (g.total_degree(z) as f64).ln())
        .sum()
}

/// Scores every candidate in one pass over u's two-hop neighborhood.
/// `candidates` must be sorted ascending.
pub(crate) fn ada_scores(g: &LabeledDigraph, u: NodeId, candidates: &[NodeId]) -> Vec<f64> {
    let mut scores = vec![0.0; candidates.len()];
    for &z in g.out(u) {
        let weight = 1.0 / (g.total_degree(z) as f64).ln();
        for v in g.out(z) {
            if let Ok(slot) = candidates.binary_search(v) {
                scores[slot] += weight;
            }
        }
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn chain_scores_inverse_log_two() {
        let mut g = LabeledDigraph::with_node_count(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        let expected = 1.0 / 2f64.ln();
        assert!((ada_score(&g, 0, 2) - expected).abs() < 1e-12);
    }

    #[test]
    fn disjoint_intermediaries_add_up() {
        let mut g = LabeledDigraph::with_node_count(4);
        g.add_edge(0, 1).unwrap();
        g.add_edge(0, 2).unwrap();
        g.add_edge(1, 3).unwrap();
        g.add_edge(2, 3).unwrap();
        let expected = 2.0 / 2f64.ln();
        assert!((ada_score(&g, 0, 3) - expected).abs() < 1e-12);
    }

    #[test]
    fn hub_paths_score_below_quiet_paths() {
        let mut g = LabeledDigraph::with_node_count(103);
        // hub path: 0 -> 1 -> 2, with 98 extra followers pushing
        // deg_tot(1) to 100
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        for w in 5..103u32 {
            g.add_edge(w, 1).unwrap();
        }
        // quiet path: 0 -> 3 -> 4 with deg_tot(3) = 2
        g.add_edge(0, 3).unwrap();
        g.add_edge(3, 4).unwrap();
        assert_eq!(g.total_degree(1), 100);
        let via_hub = ada_score(&g, 0, 2);
        let via_quiet = ada_score(&g, 0, 4);
        assert!((via_hub - 1.0 / 100f64.ln()).abs() < 1e-12);
        assert!(via_hub < via_quiet);
    }

    #[test]
    fn batch_scores_match_pairwise() {
        let mut g = LabeledDigraph::with_node_count(25);
        for u in 0..25u32 {
            for j in [1u32, 4, 9] {
                let _ = g.add_edge(u, (u + j) % 25);
            }
        }
        let cands = g.distance2_candidates(3, &HashSet::new());
        let batch = ada_scores(&g, 3, &cands);
        for (i, &v) in cands.iter().enumerate() {
            assert!((batch[i] - ada_score(&g, 3, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_permutes_scores() {
        // permutation equivariance on a small fixed graph
        let edges = [(0u32, 1u32), (1, 2), (0, 3), (3, 2), (2, 4), (1, 4)];
        let mut g = LabeledDigraph::with_node_count(5);
        for (u, v) in edges {
            g.add_edge(u, v).unwrap();
        }
        let perm = |x: NodeId| (x + 2) % 5;
        let mut h = LabeledDigraph::with_node_count(5);
        for (u, v) in edges {
            h.add_edge(perm(u), perm(v)).unwrap();
        }
        for u in 0..5u32 {
            for v in 0..5u32 {
                if u != v {
                    let a = ada_score(&g, u, v);
                    let b = ada_score(&h, perm(u), perm(v));
                    assert!((a - b).abs() < 1e-12, "({u},{v})");
                }
            }
        }
    }
}

//! Personalized bipartite SALSA.
//!
//! For a source user u the hub side is u plus its out-neighbors and the
//! authority side is everything those hubs follow. Alternating mass
//! updates converge to the stationary authority weights of the bipartite
//! walk; candidates are ranked by their final authority mass.

use crate::graph::{LabeledDigraph, NodeId};

use super::{rank_by_score, RankedList};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalsaParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SalsaParams {
    fn default() -> Self {
        SalsaParams {
            max_iters: 50,
            tol: 1e-8,
        }
    }
}

/// Runs the personalized SALSA iteration for `u` and returns the authority
/// node list (sorted by id) with its converged mass vector. Masses are
/// non-negative and sum to 1 whenever the authority side is non-empty.
pub fn salsa_authorities(
    g: &LabeledDigraph,
    u: NodeId,
    params: &SalsaParams,
) -> (Vec<NodeId>, Vec<f64>) {
    let mut hubs: Vec<NodeId> = Vec::with_capacity(g.out_degree(u) + 1);
    hubs.extend_from_slice(g.out(u));
    match hubs.binary_search(&u) {
        Ok(_) => {}
        Err(slot) => hubs.insert(slot, u),
    }

    let mut authorities: Vec<NodeId> = hubs
        .iter()
        .flat_map(|&h| g.out(h).iter().copied())
        .collect();
    authorities.sort_unstable();
    authorities.dedup();
    if authorities.is_empty() {
        return (authorities, Vec::new());
    }

    // hub -> authority slots; every out-neighbor of a hub is an authority
    let hub_targets: Vec<Vec<usize>> = hubs
        .iter()
        .map(|&h| {
            g.out(h)
                .iter()
                .map(|v| {
                    authorities
                        .binary_search(v)
                        .expect("authority set is closed")
                })
                .collect()
        })
        .collect();
    let mut in_hub_count = vec![0usize; authorities.len()];
    for targets in &hub_targets {
        for &slot in targets {
            in_hub_count[slot] += 1;
        }
    }

    let mut hub_mass = vec![1.0 / hubs.len() as f64; hubs.len()];
    let mut auth_mass = vec![0.0; authorities.len()];
    for _ in 0..params.max_iters {
        let mut next = vec![0.0; authorities.len()];
        for (targets, &mass) in hub_targets.iter().zip(hub_mass.iter()) {
            if targets.is_empty() {
                continue;
            }
            let share = mass / targets.len() as f64;
            for &slot in targets {
                next[slot] += share;
            }
        }
        // hubs without out-edges leak mass; renormalize so the authority
        // distribution stays a distribution
        let total: f64 = next.iter().sum();
        if total > 0.0 {
            for m in &mut next {
                *m /= total;
            }
        }
        for (mass, targets) in hub_mass.iter_mut().zip(hub_targets.iter()) {
            *mass = targets
                .iter()
                .map(|&slot| next[slot] / in_hub_count[slot] as f64)
                .sum();
        }
        let change: f64 = next
            .iter()
            .zip(auth_mass.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        auth_mass = next;
        if change < params.tol {
            break;
        }
    }
    (authorities, auth_mass)
}

/// Ranks `candidates` (sorted ascending) by SALSA authority mass.
pub fn salsa_rank(
    g: &LabeledDigraph,
    u: NodeId,
    candidates: &[NodeId],
    k: usize,
    params: &SalsaParams,
) -> RankedList {
    let (authorities, mass) = salsa_authorities(g, u, params);
    let scores: Vec<f64> = candidates
        .iter()
        .map(|v| match authorities.binary_search(v) {
            Ok(slot) => mass[slot],
            Err(_) => 0.0,
        })
        .collect();
    RankedList {
        user: u,
        targets: rank_by_score(candidates, &scores, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn symmetric_star_ties_break_by_id() {
        // 0 follows 1; 1 follows 2, 3, 4 symmetrically
        let mut g = LabeledDigraph::with_node_count(5);
        g.add_edge(0, 1).unwrap();
        for v in [2, 3, 4] {
            g.add_edge(1, v).unwrap();
        }
        let cands = g.distance2_candidates(0, &HashSet::new());
        assert_eq!(cands, vec![2, 3, 4]);
        let list = salsa_rank(&g, 0, &cands, 3, &SalsaParams::default());
        assert_eq!(list.targets, vec![2, 3, 4]);

        let (auth, mass) = salsa_authorities(&g, 0, &SalsaParams::default());
        assert_eq!(auth, vec![1, 2, 3, 4]);
        assert!((mass[1] - mass[2]).abs() < 1e-12);
        assert!((mass[2] - mass[3]).abs() < 1e-12);
    }

    #[test]
    fn no_out_neighbors_yields_empty_ranking() {
        let mut g = LabeledDigraph::with_node_count(3);
        g.add_edge(1, 0).unwrap();
        let list = salsa_rank(&g, 0, &[], 3, &SalsaParams::default());
        assert!(list.targets.is_empty());
        let (auth, _) = salsa_authorities(&g, 0, &SalsaParams::default());
        assert!(auth.is_empty());
    }

    /// Independent oracle: explicit dense transition matrices of the
    /// bipartite walk, iterated to stationarity.
    fn brute_force_authority(g: &LabeledDigraph, u: NodeId) -> (Vec<NodeId>, Vec<f64>) {
        let mut hubs: Vec<NodeId> = g.out(u).to_vec();
        if !hubs.contains(&u) {
            hubs.push(u);
        }
        hubs.sort_unstable();
        let mut auth: Vec<NodeId> = hubs
            .iter()
            .flat_map(|&h| g.out(h).iter().copied())
            .collect();
        auth.sort_unstable();
        auth.dedup();
        if auth.is_empty() {
            return (auth, Vec::new());
        }
        let nh = hubs.len();
        let na = auth.len();
        // row-stochastic hub->authority and authority->hub walk matrices
        let mut h2a = vec![vec![0.0f64; na]; nh];
        let mut a2h = vec![vec![0.0f64; nh]; na];
        for (i, &h) in hubs.iter().enumerate() {
            let deg = g.out(h).len();
            for (j, &v) in auth.iter().enumerate() {
                if g.has_edge(h, v) {
                    h2a[i][j] = 1.0 / deg as f64;
                }
            }
        }
        for (j, &v) in auth.iter().enumerate() {
            let followers = hubs.iter().filter(|&&h| g.has_edge(h, v)).count();
            for (i, &h) in hubs.iter().enumerate() {
                if g.has_edge(h, v) {
                    a2h[j][i] = 1.0 / followers as f64;
                }
            }
        }
        let mut hub = vec![1.0 / nh as f64; nh];
        let mut a = vec![0.0; na];
        for _ in 0..100_000 {
            let mut next = vec![0.0; na];
            for i in 0..nh {
                for j in 0..na {
                    next[j] += hub[i] * h2a[i][j];
                }
            }
            let total: f64 = next.iter().sum();
            for x in &mut next {
                *x /= total;
            }
            let mut next_hub = vec![0.0; nh];
            for j in 0..na {
                for i in 0..nh {
                    next_hub[i] += next[j] * a2h[j][i];
                }
            }
            let diff: f64 = next.iter().zip(a.iter()).map(|(x, y)| (x - y).abs()).sum();
            a = next;
            hub = next_hub;
            if diff < 1e-14 {
                break;
            }
        }
        (auth, a)
    }

    #[test]
    fn two_hub_authority_beats_one_hub_authority() {
        let mut g = LabeledDigraph::with_node_count(6);
        g.add_edge(0, 1).unwrap();
        g.add_edge(0, 2).unwrap();
        g.add_edge(1, 3).unwrap();
        g.add_edge(2, 3).unwrap();
        g.add_edge(2, 4).unwrap();

        let (auth, mass) = salsa_authorities(&g, 0, &SalsaParams::default());
        let (oracle_auth, oracle_mass) = brute_force_authority(&g, 0);
        assert_eq!(auth, oracle_auth);
        for (m, o) in mass.iter().zip(oracle_mass.iter()) {
            assert!((m - o).abs() < 1e-6, "{m} vs oracle {o}");
        }

        let cands = g.distance2_candidates(0, &HashSet::new());
        assert_eq!(cands, vec![3, 4]);
        let list = salsa_rank(&g, 0, &cands, 2, &SalsaParams::default());
        assert_eq!(list.targets, vec![3, 4]);
        let slot3 = auth.binary_search(&3).unwrap();
        let slot4 = auth.binary_search(&4).unwrap();
        assert!(mass[slot3] > mass[slot4]);
    }

    #[test]
    fn authority_mass_is_a_distribution() {
        // pseudo-random graphs; masses non-negative summing to 1
        for seed in 0..10u32 {
            let n = 30;
            let mut g = LabeledDigraph::with_node_count(n);
            for u in 0..n as u32 {
                for j in 1..=3u32 {
                    let v = (u * 7 + j * (seed + 2) + 1) % n as u32;
                    if v != u {
                        let _ = g.add_edge(u, v);
                    }
                }
            }
            for u in 0..n as u32 {
                let (auth, mass) = salsa_authorities(&g, u, &SalsaParams::default());
                if auth.is_empty() {
                    continue;
                }
                assert!(mass.iter().all(|&m| m >= 0.0));
                let total: f64 = mass.iter().sum();
                assert!((total - 1.0).abs() < 1e-9, "sum = {total}");
            }
        }
    }
}

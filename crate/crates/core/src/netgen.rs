//! Initial network configurations with controlled minority share and
//! homophily.
//!
//! A synthetic preferential-attachment seed graph stands in for the original
//! social-network sample; two transformations then impose the requested
//! group share (label flips) and homophily levels (degree-preserving edge
//! rewiring).

use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::graph::{GraphError, Group, LabeledDigraph, NodeId};
use crate::rng::{stream_rng, Stream};

/// Default tolerance on achieved homophily, well below the 0.05 grid
/// spacing used by the sweep configurations.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

/// Attachment smoothing: targets draw proportional to in-degree plus this
/// offset. Keeps the in-degree tail heavy enough for hub-driven dynamics
/// without letting one early hub capture a label-luck share of all edges.
const ATTACHMENT_SMOOTHING: usize = 3;

/// Probability that an edge slot (after a node's first) copies a
/// friend-of-friend instead of attaching by popularity, giving the local
/// clustering that neighborhood-based recommenders key on.
const TRIADIC_CLOSURE_PROB: f64 = 0.3;

#[derive(Debug, Error)]
pub enum NetgenError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("share target would empty a group: {target_minority} minority of {n} nodes")]
    ShareEmptiesGroup { target_minority: usize, n: usize },
    #[error(
        "homophily target {target} for {group:?} outside admissible interval ({lo:.4}, {hi:.4}]"
    )]
    TargetOutOfRange {
        group: Group,
        target: f64,
        lo: f64,
        hi: f64,
    },
    #[error("cannot reach homophily {target} for {group:?}: achieved {achieved}")]
    Unreachable {
        group: Group,
        target: f64,
        achieved: f64,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Full description of a generated network.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetConfig {
    pub n_nodes: usize,
    pub avg_out_degree: f64,
    pub s_m_target: f64,
    pub h_m_target: f64,
    pub h_maj_target: f64,
    pub tolerance: f64,
    pub rng_seed: u64,
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), NetgenError> {
        if self.n_nodes < 10 {
            return Err(NetgenError::ParamOutOfRange(format!(
                "n_nodes = {} (need >= 10)",
                self.n_nodes
            )));
        }
        if self.avg_out_degree < 1.0 || self.avg_out_degree > (self.n_nodes - 1) as f64 {
            return Err(NetgenError::ParamOutOfRange(format!(
                "avg_out_degree = {} (need 1 <= d <= n-1)",
                self.avg_out_degree
            )));
        }
        if !(self.s_m_target > 0.0 && self.s_m_target <= 0.5) {
            return Err(NetgenError::ParamOutOfRange(format!(
                "s_m_target = {} (need 0 < s <= 0.5)",
                self.s_m_target
            )));
        }
        if self.tolerance <= 0.0 {
            return Err(NetgenError::ParamOutOfRange(format!(
                "tolerance = {} (need > 0)",
                self.tolerance
            )));
        }
        check_homophily_target(Group::Minority, self.h_m_target, self.s_m_target)?;
        check_homophily_target(Group::Majority, self.h_maj_target, 1.0 - self.s_m_target)?;
        Ok(())
    }
}

fn check_homophily_target(group: Group, target: f64, share: f64) -> Result<(), NetgenError> {
    if target <= -share || target > 1.0 - share {
        return Err(NetgenError::TargetOutOfRange {
            group,
            target,
            lo: -share,
            hi: 1.0 - share,
        });
    }
    Ok(())
}

/// The named network configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    G0,
    G1,
    G2,
    G3,
    G4,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::G0, Preset::G1, Preset::G2, Preset::G3, Preset::G4];

    /// `(s_m, h_m, h_M)` targets.
    pub fn targets(self) -> (f64, f64, f64) {
        match self {
            Preset::G0 => (0.3, 0.42, 0.0),
            Preset::G1 => (0.1, 0.4, 0.0),
            Preset::G2 => (0.45, 0.5, 0.0),
            Preset::G3 => (0.3, -0.25, 0.0),
            Preset::G4 => (0.3, 0.6, 0.2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::G0 => "G0",
            Preset::G1 => "G1",
            Preset::G2 => "G2",
            Preset::G3 => "G3",
            Preset::G4 => "G4",
        }
    }

    pub fn config(self, n: usize, avg_out_degree: f64, rng_seed: u64) -> NetConfig {
        let (s_m, h_m, h_maj) = self.targets();
        NetConfig {
            n_nodes: n,
            avg_out_degree,
            s_m_target: s_m,
            h_m_target: h_m,
            h_maj_target: h_maj,
            tolerance: DEFAULT_TOLERANCE,
            rng_seed,
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "G0" => Ok(Preset::G0),
            "G1" => Ok(Preset::G1),
            "G2" => Ok(Preset::G2),
            "G3" => Ok(Preset::G3),
            "G4" => Ok(Preset::G4),
            other => Err(format!("unknown preset '{other}' (expected G0..G4)")),
        }
    }
}

/// Measured network statistics, recorded in provenance sidecars.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NetworkStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub s_m: f64,
    pub h_m: f64,
    pub h_maj: f64,
}

impl NetworkStats {
    pub fn measure(g: &LabeledDigraph) -> Result<NetworkStats, GraphError> {
        Ok(NetworkStats {
            n_nodes: g.node_count(),
            n_edges: g.edge_count(),
            s_m: g.group_share(Group::Minority)?,
            h_m: g.homophily(Group::Minority)?,
            h_maj: g.homophily(Group::Majority)?,
        })
    }
}

/// Directed preferential-attachment graph with triadic closure and
/// independently drawn labels.
///
/// The first `ceil(d)+1` nodes form a follow ring; every later node emits
/// about `avg_out_degree` edges, each either copying a friend-of-friend
/// (probability [`TRIADIC_CLOSURE_PROB`]) or attaching to a node drawn
/// proportionally to in-degree + [`ATTACHMENT_SMOOTHING`]. The result has
/// a heavy in-degree tail plus local clustering; labels are independent
/// of topology, so expected homophily is 0 for both groups.
pub fn seed_graph(
    n: usize,
    avg_out_degree: f64,
    s_m: f64,
    rng_seed: u64,
) -> Result<LabeledDigraph, NetgenError> {
    if n < 10 {
        return Err(NetgenError::ParamOutOfRange(format!(
            "n = {n} (need >= 10)"
        )));
    }
    if avg_out_degree < 1.0 || avg_out_degree > (n - 1) as f64 {
        return Err(NetgenError::ParamOutOfRange(format!(
            "avg_out_degree = {avg_out_degree} (need 1 <= d <= n-1)"
        )));
    }
    if !(0.0..=1.0).contains(&s_m) {
        return Err(NetgenError::ParamOutOfRange(format!(
            "s_m = {s_m} (need 0 <= s <= 1)"
        )));
    }

    let mut label_rng = stream_rng(rng_seed, Stream::SeedGraphLabels, 0);
    let labels: Vec<Group> = (0..n)
        .map(|_| {
            if label_rng.gen::<f64>() < s_m {
                Group::Minority
            } else {
                Group::Majority
            }
        })
        .collect();
    let mut g = LabeledDigraph::new(labels);

    let mut rng = stream_rng(rng_seed, Stream::SeedGraphTopology, 0);
    let ring = (avg_out_degree.ceil() as usize + 1).min(n);
    for u in 0..ring {
        g.add_edge(u as NodeId, ((u + 1) % ring) as NodeId)?;
    }

    // Urn holds one entry per node plus one per received edge, so drawing
    // uniformly from it is drawing proportional to in-degree + 1.
    let reps = ATTACHMENT_SMOOTHING;
    let mut urn: Vec<NodeId> = Vec::with_capacity(n * (avg_out_degree.ceil() as usize + reps));
    for u in 0..ring {
        for _ in 0..reps {
            urn.push(u as NodeId);
        }
        urn.push(((u + 1) % ring) as NodeId);
    }

    let whole = avg_out_degree.floor() as usize;
    let frac = avg_out_degree - whole as f64;
    for t in ring..n {
        let mut quota = whole + usize::from(frac > 0.0 && rng.gen::<f64>() < frac);
        quota = quota.min(t);
        let mut added = 0;
        let mut attempts = 0;
        while added < quota {
            let closure: f64 = std::env::var("LINKLOOP_CLOSURE")
                .ok()
                .and_then(|x| x.parse().ok())
                .unwrap_or(TRIADIC_CLOSURE_PROB);
            let use_closure = added > 0 && rng.gen::<f64>() < closure;
            let v = if use_closure {
                let followed = g.out(t as NodeId);
                let z = followed[rng.gen_range(0..followed.len())];
                let outs = g.out(z);
                if outs.is_empty() {
                    urn[rng.gen_range(0..urn.len())]
                } else {
                    outs[rng.gen_range(0..outs.len())]
                }
            } else {
                urn[rng.gen_range(0..urn.len())]
            };
            attempts += 1;
            if v != t as NodeId && !g.has_edge(t as NodeId, v) {
                g.add_edge(t as NodeId, v)?;
                urn.push(v);
                added += 1;
            } else if attempts > 64 * quota {
                // saturated neighborhood; fall back to direct enumeration
                let rest: Vec<NodeId> = (0..t as NodeId)
                    .filter(|&v| !g.has_edge(t as NodeId, v))
                    .collect();
                if rest.is_empty() {
                    break;
                }
                let v = rest[rng.gen_range(0..rest.len())];
                g.add_edge(t as NodeId, v)?;
                urn.push(v);
                added += 1;
            }
        }
        for _ in 0..reps {
            urn.push(t as NodeId);
        }
    }
    Ok(g)
}

/// Flips uniformly sampled labels until the minority counts exactly
/// `round(n * s_m_target)` nodes. Edges are untouched.
pub fn set_minority_share(
    g: &mut LabeledDigraph,
    s_m_target: f64,
    rng: &mut ChaCha12Rng,
) -> Result<(), NetgenError> {
    if !(s_m_target > 0.0 && s_m_target < 1.0) {
        return Err(NetgenError::ParamOutOfRange(format!(
            "s_m_target = {s_m_target} (need 0 < s < 1)"
        )));
    }
    let n = g.node_count();
    let target = (n as f64 * s_m_target).round() as usize;
    if target == 0 || target == n {
        return Err(NetgenError::ShareEmptiesGroup {
            target_minority: target,
            n,
        });
    }
    let current = g.group_size(Group::Minority);
    let (from, to, flips) = if target < current {
        (Group::Minority, Group::Majority, current - target)
    } else {
        (Group::Majority, Group::Minority, target - current)
    };
    if flips == 0 {
        return Ok(());
    }
    let pool = g.members(from);
    for idx in sample(rng, pool.len(), flips) {
        g.set_label(pool[idx], to);
    }
    Ok(())
}

/// Rewires group-`group`-sourced edges until its homophily reaches
/// `h_target` within `tolerance`.
///
/// The rewired edge count is fixed up-front as `round(|E_i.| * |h* - h|)`;
/// each rewire keeps the source and out-degree, swapping only the target to
/// the opposite class of the one it had. A corrective pass of at most 1% of
/// `|E_i.|` extra rewires closes any residual gap.
pub fn set_homophily(
    g: &mut LabeledDigraph,
    group: Group,
    h_target: f64,
    rng: &mut ChaCha12Rng,
    tolerance: f64,
) -> Result<(), NetgenError> {
    let share = g.group_share(group)?;
    check_homophily_target(group, h_target, share)?;
    let from_edges = g.mixing().from_group(group);
    if from_edges == 0 {
        return Err(NetgenError::Graph(GraphError::UndefinedHomophily(group)));
    }
    let h_start = g.homophily(group)?;
    let inward = h_target > h_start;
    let quota = (from_edges as f64 * (h_target - h_start).abs()).round() as usize;

    let eligible = eligible_edges(g, group, inward);
    if eligible.len() < quota {
        // even rewiring every eligible edge cannot close the gap
        let step = eligible.len() as f64 / from_edges as f64;
        let reachable = if inward {
            h_start + step
        } else {
            h_start - step
        };
        if (reachable - h_target).abs() > tolerance {
            return Err(NetgenError::Unreachable {
                group,
                target: h_target,
                achieved: reachable,
            });
        }
    }

    let mut pool: Vec<(NodeId, NodeId)> = sample(rng, eligible.len(), eligible.len())
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    let mut done = 0;
    while done < quota {
        let Some((u, v)) = pool.pop() else { break };
        if rewire_toward(g, u, v, if inward { group } else { group.other() }, rng)? {
            done += 1;
        }
    }

    // corrective micro-rewires, bounded to 1% of the group's edges
    let mut extra = (from_edges / 100).max(1);
    loop {
        let achieved = g.homophily(group)?;
        if (achieved - h_target).abs() <= tolerance {
            return Ok(());
        }
        if extra == 0 {
            return Err(NetgenError::Unreachable {
                group,
                target: h_target,
                achieved,
            });
        }
        let inward = h_target > achieved;
        let eligible = eligible_edges(g, group, inward);
        let mut fixed = false;
        for idx in sample(rng, eligible.len(), eligible.len()) {
            let (u, v) = eligible[idx];
            if rewire_toward(g, u, v, if inward { group } else { group.other() }, rng)? {
                fixed = true;
                break;
            }
        }
        if !fixed {
            return Err(NetgenError::Unreachable {
                group,
                target: h_target,
                achieved,
            });
        }
        extra -= 1;
    }
}

/// Edges sourced in `group` whose targets sit in the class a rewire would
/// move them out of: cross-class targets when pulling inward, same-class
/// when pushing outward. Deterministic order.
fn eligible_edges(g: &LabeledDigraph, group: Group, inward: bool) -> Vec<(NodeId, NodeId)> {
    let want_target = if inward { group.other() } else { group };
    let mut edges = Vec::new();
    for u in g.members(group) {
        for &v in g.out(u) {
            if g.label(v) == want_target {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Replaces `(u, v)` with `(u, w)` for a uniformly drawn valid `w` in
/// `target_class`. Returns false when no valid target exists.
fn rewire_toward(
    g: &mut LabeledDigraph,
    u: NodeId,
    v: NodeId,
    target_class: Group,
    rng: &mut ChaCha12Rng,
) -> Result<bool, NetgenError> {
    let members = g.members(target_class);
    for _ in 0..64 {
        let w = members[rng.gen_range(0..members.len())];
        if w != u && !g.has_edge(u, w) {
            g.rewire_out_edge(u, v, w)?;
            return Ok(true);
        }
    }
    // dense source node: enumerate the remaining valid targets exactly
    let valid: Vec<NodeId> = members
        .into_iter()
        .filter(|&w| w != u && !g.has_edge(u, w))
        .collect();
    if valid.is_empty() {
        return Ok(false);
    }
    let w = valid[rng.gen_range(0..valid.len())];
    g.rewire_out_edge(u, v, w)?;
    Ok(true)
}

/// Seed graph, then exact share, then per-group homophily.
pub fn build_network(config: &NetConfig) -> Result<LabeledDigraph, NetgenError> {
    config.validate()?;
    let mut g = seed_graph(
        config.n_nodes,
        config.avg_out_degree,
        config.s_m_target,
        config.rng_seed,
    )?;
    let mut share_rng = stream_rng(config.rng_seed, Stream::ShareFlips, 0);
    set_minority_share(&mut g, config.s_m_target, &mut share_rng)?;
    let mut rng_m = stream_rng(config.rng_seed, Stream::RewireMinority, 0);
    set_homophily(
        &mut g,
        Group::Minority,
        config.h_m_target,
        &mut rng_m,
        config.tolerance,
    )?;
    let mut rng_maj = stream_rng(config.rng_seed, Stream::RewireMajority, 0);
    set_homophily(
        &mut g,
        Group::Majority,
        config.h_maj_target,
        &mut rng_maj,
        config.tolerance,
    )?;
    Ok(g)
}

pub fn build_preset(
    preset: Preset,
    n: usize,
    avg_out_degree: f64,
    rng_seed: u64,
) -> Result<LabeledDigraph, NetgenError> {
    build_network(&preset.config(n, avg_out_degree, rng_seed))
}

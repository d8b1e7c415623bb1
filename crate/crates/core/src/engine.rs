//! The recommendation feedback loop.
//!
//! Each iteration trains the recommender on the iteration-start snapshot,
//! samples a fraction of users, issues top-k lists from the snapshot, lets
//! the behavior model accept one link per non-empty list, and applies all
//! accepted edges in one batch. Scoring never observes edges added in the
//! same round, so results are independent of user processing order.

use std::collections::HashSet;

use thiserror::Error;

use crate::behavior::{select, BehaviorKind};
use crate::graph::{GraphError, Group, LabeledDigraph, NodeId};
use crate::metrics::{
    exposure, group_in_degree_gini, percentile_exposure, ExposureReport, MetricsError,
    PercentileBuckets, DEFAULT_PERCENTILES,
};
use crate::recommend::{AlsParams, RecommendationBatch, Recommender, RecommenderKind, SalsaParams};
use crate::rng::{stream_rng, substream, Stream};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("alpha = {alpha} samples zero users out of {n}")]
    EmptySample { alpha: f64, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Full experiment description for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of iterations T.
    pub iterations: usize,
    /// Fraction of users sampled per round.
    pub alpha: f64,
    /// Recommendation list length.
    pub k: usize,
    pub recommender: RecommenderKind,
    pub behavior: BehaviorKind,
    pub seed: u64,
    pub als: AlsParams,
    pub sls: SalsaParams,
    pub percentiles: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            iterations: 20,
            alpha: 0.2,
            k: 3,
            recommender: RecommenderKind::Random,
            behavior: BehaviorKind::PositionBiased,
            seed: 1,
            als: AlsParams::default(),
            sls: SalsaParams::default(),
            percentiles: DEFAULT_PERCENTILES.to_vec(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.iterations < 1 {
            return Err(EngineError::InvalidConfig("T must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(EngineError::InvalidConfig(format!(
                "alpha = {} (need 0 < alpha <= 1)",
                self.alpha
            )));
        }
        if self.k < 1 {
            return Err(EngineError::InvalidConfig("k must be >= 1".into()));
        }
        if self.als.d < 1 || self.als.lambda <= 0.0 || self.als.sweeps < 1 {
            return Err(EngineError::InvalidConfig(
                "als requires d >= 1, lambda > 0, sweeps >= 1".into(),
            ));
        }
        if self.sls.max_iters < 1 || self.sls.tol <= 0.0 {
            return Err(EngineError::InvalidConfig(
                "sls requires max_iters >= 1, tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-user set of everything ever recommended to that user. A pair
/// (u, v) that enters the table never reappears in any later list for u.
#[derive(Debug, Clone, Default)]
pub struct ExclusionTable {
    per_user: Vec<HashSet<NodeId>>,
}

impl ExclusionTable {
    pub fn new(n: usize) -> Self {
        ExclusionTable {
            per_user: vec![HashSet::new(); n],
        }
    }

    pub fn for_user(&self, u: NodeId) -> &HashSet<NodeId> {
        &self.per_user[u as usize]
    }

    pub fn extend(&mut self, u: NodeId, targets: &[NodeId]) {
        self.per_user[u as usize].extend(targets.iter().copied());
    }
}

/// Metrics row for one iteration, computed on the issued recommendations
/// and the post-update graph.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub recs_issued: usize,
    /// The constant-denominator variant `k * |sampled users|`.
    pub nominal_slots: usize,
    pub exposure: Option<ExposureReport>,
    pub edges_added: usize,
    /// Cumulative added edges as a fraction of the initial edge count.
    pub cumulative_edge_growth: f64,
    pub gini_minority: f64,
    pub gini_majority: f64,
    pub h_m: Option<f64>,
    pub h_maj: Option<f64>,
    pub e_mm: Option<f64>,
    pub pexp_minority: Option<PercentileBuckets>,
    pub pexp_majority: Option<PercentileBuckets>,
}

/// One line of the recommendation log: the ordered targets shown to a user
/// and the 1-based position accepted.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RecLogEntry {
    pub t: usize,
    pub user: NodeId,
    pub targets: Vec<NodeId>,
    pub accepted: Option<usize>,
}

/// Graph-level statistics before the first iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub edge_count: usize,
    pub s_m: f64,
    pub gini_minority: f64,
    pub gini_majority: f64,
    pub h_m: Option<f64>,
    pub h_maj: Option<f64>,
    pub e_mm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub initial: InitialState,
    pub records: Vec<IterationRecord>,
    pub rec_log: Vec<RecLogEntry>,
    pub graph: LabeledDigraph,
}

/// Uniform sample of `floor(alpha * N)` distinct users, ascending.
pub fn sample_users(
    n: usize,
    alpha: f64,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<Vec<NodeId>, EngineError> {
    let count = (alpha * n as f64).floor() as usize;
    if count == 0 {
        return Err(EngineError::EmptySample { alpha, n });
    }
    let mut users: Vec<NodeId> = rand::seq::index::sample(rng, n, count)
        .into_iter()
        .map(|i| i as NodeId)
        .collect();
    users.sort_unstable();
    Ok(users)
}

fn graph_stats(g: &LabeledDigraph) -> (f64, f64, Option<f64>, Option<f64>, Option<f64>) {
    let gini_min = group_in_degree_gini(g, Group::Minority).unwrap_or(0.0);
    let gini_maj = group_in_degree_gini(g, Group::Majority).unwrap_or(0.0);
    let h_m = g.homophily(Group::Minority).ok();
    let h_maj = g.homophily(Group::Majority).ok();
    // independent full recount, cross-checking the incremental counts
    // through the e_mm = h_m + s_m identity
    let recount = g.recount_mixing();
    let e_mm = match recount.from_group(Group::Minority) {
        0 => None,
        from => Some(recount.within(Group::Minority) as f64 / from as f64),
    };
    (gini_min, gini_maj, h_m, h_maj, e_mm)
}

pub fn initial_state(g: &LabeledDigraph) -> Result<InitialState, EngineError> {
    let (gini_minority, gini_majority, h_m, h_maj, e_mm) = graph_stats(g);
    Ok(InitialState {
        edge_count: g.edge_count(),
        s_m: g.group_share(Group::Minority)?,
        gini_minority,
        gini_majority,
        h_m,
        h_maj,
        e_mm,
    })
}

/// Runs one recommendation round in place and returns its record, the
/// issued batch, and the per-user log entries.
pub fn run_iteration(
    g: &mut LabeledDigraph,
    t: usize,
    config: &SimConfig,
    exclusions: &mut ExclusionTable,
    initial_edges: usize,
) -> Result<(IterationRecord, RecommendationBatch, Vec<RecLogEntry>), EngineError> {
    let mut sample_rng = stream_rng(config.seed, Stream::UserSample, t as u64);
    let users = sample_users(g.node_count(), config.alpha, &mut sample_rng)?;
    let nominal_slots = config.k * users.len();

    let recommender = Recommender::prepare(
        config.recommender,
        g,
        config.als,
        config.sls,
        config.seed,
        t as u64,
    );
    let mut batch = RecommendationBatch::default();
    let mut log = Vec::new();
    let mut accepted_edges: Vec<(NodeId, NodeId)> = Vec::new();
    for &u in &users {
        let candidates = g.distance2_candidates(u, exclusions.for_user(u));
        if candidates.is_empty() {
            continue;
        }
        let mut rec_rng = substream(config.seed, Stream::RandomRecommender, t as u64, u as u64);
        let list = recommender.top_k(u, &candidates, config.k, &mut rec_rng);
        debug_assert!(!list.targets.is_empty());

        let mut beh_rng = substream(config.seed, Stream::Behavior, t as u64, u as u64);
        let position = select(config.behavior, list.targets.len(), &mut beh_rng)
            .expect("non-empty list always yields one acceptance");
        accepted_edges.push((u, list.targets[position - 1]));
        exclusions.extend(u, &list.targets);
        log.push(RecLogEntry {
            t,
            user: u,
            targets: list.targets.clone(),
            accepted: Some(position),
        });
        batch.lists.push(list);
    }
    drop(recommender);

    // batch update: sources are distinct users and targets were missing
    // edges on the snapshot, so no insertion can fail
    for &(u, v) in &accepted_edges {
        g.add_edge(u, v)?;
    }

    let report = exposure(&batch, g.labels());
    let (gini_minority, gini_majority, h_m, h_maj, e_mm) = graph_stats(g);
    let record = IterationRecord {
        t,
        recs_issued: batch.slots(),
        nominal_slots,
        exposure: report,
        edges_added: accepted_edges.len(),
        cumulative_edge_growth: if initial_edges == 0 {
            0.0
        } else {
            (g.edge_count() as f64 - initial_edges as f64) / initial_edges as f64
        },
        gini_minority,
        gini_majority,
        h_m,
        h_maj,
        e_mm,
        pexp_minority: percentile_exposure(&batch, g, Group::Minority, &config.percentiles),
        pexp_majority: percentile_exposure(&batch, g, Group::Majority, &config.percentiles),
    };
    Ok((record, batch, log))
}

/// Runs the full T-iteration loop on `graph`. The output is a pure
/// function of `(graph, config)`.
pub fn run_simulation(
    mut graph: LabeledDigraph,
    config: &SimConfig,
) -> Result<SimOutput, EngineError> {
    config.validate()?;
    let initial = initial_state(&graph)?;
    let mut exclusions = ExclusionTable::new(graph.node_count());
    let mut records = Vec::with_capacity(config.iterations);
    let mut rec_log = Vec::new();
    for t in 1..=config.iterations {
        let (record, _, log) =
            run_iteration(&mut graph, t, config, &mut exclusions, initial.edge_count)?;
        records.push(record);
        rec_log.extend(log);
    }
    Ok(SimOutput {
        initial,
        records,
        rec_log,
        graph,
    })
}

//! Link recommenders: Adamic-Adar, personalized SALSA, implicit-feedback
//! ALS, and a uniform-random baseline.
//!
//! All of them rank an eligible candidate set (missing edges at distance
//! two) for one user and return an ordered top-k list. Scores are never
//! compared across recommender kinds; only the per-user ranking matters.

mod ada;
mod als;
mod salsa;

pub use ada::ada_score;
pub use als::{als_score, als_train, AlsModel, AlsParams};
pub use salsa::{salsa_authorities, salsa_rank, SalsaParams};

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha12Rng;

use crate::graph::{LabeledDigraph, NodeId};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecommenderKind {
    Ada,
    Salsa,
    Als,
    Random,
}

impl RecommenderKind {
    pub const ALL: [RecommenderKind; 4] = [
        RecommenderKind::Ada,
        RecommenderKind::Salsa,
        RecommenderKind::Als,
        RecommenderKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecommenderKind::Ada => "ada",
            RecommenderKind::Salsa => "sls",
            RecommenderKind::Als => "als",
            RecommenderKind::Random => "rnd",
        }
    }
}

impl FromStr for RecommenderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ada" => Ok(RecommenderKind::Ada),
            "sls" | "salsa" => Ok(RecommenderKind::Salsa),
            "als" => Ok(RecommenderKind::Als),
            "rnd" | "random" => Ok(RecommenderKind::Random),
            other => Err(format!(
                "unknown recommender '{other}' (expected ada, sls, als, or rnd)"
            )),
        }
    }
}

/// Ordered top-k recommendation list for one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub user: NodeId,
    pub targets: Vec<NodeId>,
}

/// All lists issued in one recommendation round, in ascending user order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecommendationBatch {
    pub lists: Vec<RankedList>,
}

impl RecommendationBatch {
    /// Total number of recommendation slots issued.
    pub fn slots(&self) -> usize {
        self.lists.iter().map(|l| l.targets.len()).sum()
    }
}

/// A recommender prepared against one immutable graph snapshot.
///
/// ALS is (re)trained from scratch on the snapshot; the others score
/// directly from the graph.
pub enum Recommender<'g> {
    Ada(&'g LabeledDigraph),
    Salsa(&'g LabeledDigraph, SalsaParams),
    Als(AlsModel),
    Random,
}

impl<'g> Recommender<'g> {
    /// Trains/binds `kind` on the iteration-start snapshot. The ALS
    /// initialization stream is derived from `(seed, iteration)`.
    pub fn prepare(
        kind: RecommenderKind,
        g: &'g LabeledDigraph,
        als: AlsParams,
        sls: SalsaParams,
        seed: u64,
        iteration: u64,
    ) -> Recommender<'g> {
        match kind {
            RecommenderKind::Ada => Recommender::Ada(g),
            RecommenderKind::Salsa => Recommender::Salsa(g, sls),
            RecommenderKind::Als => {
                let init = stream_rng(seed, Stream::AlsInit, iteration);
                Recommender::Als(als_train(g, &als, init))
            }
            RecommenderKind::Random => Recommender::Random,
        }
    }

    /// Top-k from a sorted candidate slice. Ties break by ascending node
    /// id; the random baseline samples uniformly without replacement.
    pub fn top_k(
        &self,
        u: NodeId,
        candidates: &[NodeId],
        k: usize,
        rng: &mut ChaCha12Rng,
    ) -> RankedList {
        debug_assert!(candidates.windows(2).all(|w| w[0] < w[1]));
        let targets = match self {
            Recommender::Ada(g) => rank_by_score(candidates, &ada::ada_scores(g, u, candidates), k),
            Recommender::Salsa(g, params) => salsa_rank(g, u, candidates, k, params).targets,
            Recommender::Als(model) => {
                let scores: Vec<f64> = candidates.iter().map(|&v| model.score(u, v)).collect();
                rank_by_score(candidates, &scores, k)
            }
            Recommender::Random => {
                let take = k.min(candidates.len());
                let mut picked: Vec<NodeId> = rand::seq::index::sample(rng, candidates.len(), take)
                    .into_iter()
                    .map(|i| candidates[i])
                    .collect();
                picked.shuffle(rng);
                picked
            }
        };
        RankedList { user: u, targets }
    }
}

/// Sorts candidates by descending score, ties by ascending node id, and
/// truncates to `k`.
pub fn rank_by_score(candidates: &[NodeId], scores: &[f64], k: usize) -> Vec<NodeId> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("recommendation scores must be finite")
            .then(candidates[a].cmp(&candidates[b]))
    });
    order.into_iter().take(k).map(|i| candidates[i]).collect()
}

/// One-shot form of the dispatch, convenient for tests and the FFI layer.
#[allow(clippy::too_many_arguments)]
pub fn recommend_top_k(
    kind: RecommenderKind,
    g: &LabeledDigraph,
    u: NodeId,
    candidates: &[NodeId],
    k: usize,
    als: AlsParams,
    sls: SalsaParams,
    seed: u64,
    rng: &mut ChaCha12Rng,
) -> RankedList {
    Recommender::prepare(kind, g, als, sls, seed, 0).top_k(u, candidates, k, rng)
}

//! Stochastic user acceptance policies.
//!
//! Every policy accepts exactly one recommendation from a non-empty list,
//! so each recommended user adds one edge per round. Positions are
//! 1-indexed, position 1 being the top-ranked item.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BehaviorKind {
    /// Always takes the top-ranked recommendation.
    Lazy,
    /// Uniform over the list.
    Random,
    /// Position-biased: p_i proportional to 1/log(i+1).
    PositionBiased,
    /// Picks one of the three policies uniformly, fresh per call.
    Mixed,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 4] = [
        BehaviorKind::Lazy,
        BehaviorKind::Random,
        BehaviorKind::PositionBiased,
        BehaviorKind::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BehaviorKind::Lazy => "lzy",
            BehaviorKind::Random => "rnd",
            BehaviorKind::PositionBiased => "psb",
            BehaviorKind::Mixed => "mix",
        }
    }
}

impl FromStr for BehaviorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lzy" => Ok(BehaviorKind::Lazy),
            "rnd" => Ok(BehaviorKind::Random),
            "psb" => Ok(BehaviorKind::PositionBiased),
            "mix" => Ok(BehaviorKind::Mixed),
            other => Err(format!(
                "unknown behavior '{other}' (expected lzy, rnd, psb, or mix)"
            )),
        }
    }
}

/// Position-bias selection probabilities for a list of `len` items:
/// `p_i = (1/ln(i+1)) / sum_j 1/ln(j+1)`, `i = 1..=len`.
///
/// The logarithm base cancels in the normalization, so any base gives the
/// same vector.
pub fn psb_probs(len: usize) -> Vec<f64> {
    assert!(len >= 1, "psb_probs needs a non-empty list");
    let weights: Vec<f64> = (1..=len).map(|i| 1.0 / ((i + 1) as f64).ln()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Draws the accepted 1-based position for a list of `len` recommendations,
/// or `None` for an empty list.
pub fn select(kind: BehaviorKind, len: usize, rng: &mut ChaCha12Rng) -> Option<usize> {
    if len == 0 {
        return None;
    }
    let position = match kind {
        BehaviorKind::Lazy => 1,
        BehaviorKind::Random => rng.gen_range(1..=len),
        BehaviorKind::PositionBiased => {
            let probs = psb_probs(len);
            let mut draw: f64 = rng.gen();
            let mut position = len;
            for (i, p) in probs.iter().enumerate() {
                if draw < *p {
                    position = i + 1;
                    break;
                }
                draw -= p;
            }
            position
        }
        BehaviorKind::Mixed => {
            let strategy = [
                BehaviorKind::Lazy,
                BehaviorKind::Random,
                BehaviorKind::PositionBiased,
            ][rng.gen_range(0..3)];
            return select(strategy, len, rng);
        }
    };
    Some(position)
}

//! Implicit-feedback alternating least squares.
//!
//! Edges are unit-preference observations with confidence 1 + alpha; every
//! absent pair is a zero-preference observation with confidence 1. Each
//! half-sweep solves the d x d normal equations per node with the
//! Gram-matrix decomposition, so cost scales with observed edges rather
//! than the full N^2 preference matrix.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::graph::{LabeledDigraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsParams {
    /// Latent dimension.
    pub d: usize,
    /// L2 regularization weight; must stay positive to keep solves SPD.
    pub lambda: f64,
    /// Confidence scale on observed edges.
    pub conf_alpha: f64,
    /// Alternating sweeps per training round.
    pub sweeps: usize,
}

impl Default for AlsParams {
    fn default() -> Self {
        AlsParams {
            d: 32,
            lambda: 0.1,
            conf_alpha: 100.0,
            sweeps: 20,
        }
    }
}

/// Trained factor matrices. Users embed followers, items embed followees.
#[derive(Debug, Clone)]
pub struct AlsModel {
    d: usize,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

impl AlsModel {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn user_factor(&self, u: NodeId) -> &[f64] {
        let base = u as usize * self.d;
        &self.user_factors[base..base + self.d]
    }

    pub fn item_factor(&self, v: NodeId) -> &[f64] {
        let base = v as usize * self.d;
        &self.item_factors[base..base + self.d]
    }

    /// Predicted affinity of `u` following `v`.
    pub fn score(&self, u: NodeId, v: NodeId) -> f64 {
        self.user_factor(u)
            .iter()
            .zip(self.item_factor(v))
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Inner product form of the model prediction.
pub fn als_score(model: &AlsModel, u: NodeId, v: NodeId) -> f64 {
    model.score(u, v)
}

/// Trains factors on the current graph. Deterministic for a fixed graph
/// and rng state; training loss is non-increasing across sweeps.
pub fn als_train(g: &LabeledDigraph, params: &AlsParams, mut rng: ChaCha12Rng) -> AlsModel {
    assert!(params.d >= 1, "latent dimension must be >= 1");
    assert!(params.lambda > 0.0, "lambda must be positive");
    assert!(params.sweeps >= 1, "need at least one sweep");
    assert!(params.conf_alpha >= 0.0, "confidence scale must be >= 0");

    let n = g.node_count();
    let d = params.d;
    let mut user_factors: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>() * 0.01).collect();
    let mut item_factors: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>() * 0.01).collect();

    for _ in 0..params.sweeps {
        solve_side(&mut user_factors, &item_factors, params, |u| g.out(u));
        solve_side(&mut item_factors, &user_factors, params, |v| g.incoming(v));
    }
    AlsModel {
        d,
        user_factors,
        item_factors,
    }
}

/// Solves one alternation: for every node, the regularized least-squares
/// system against the fixed side, restricted to its observed neighbors.
fn solve_side<'a>(
    target: &mut [f64],
    fixed: &[f64],
    params: &AlsParams,
    neighbors: impl Fn(NodeId) -> &'a [NodeId],
) {
    let d = params.d;
    let n = target.len() / d;
    let alpha = params.conf_alpha;

    // Gram matrix of the fixed side plus ridge term, shared by every node.
    let mut base = DMatrix::<f64>::zeros(d, d);
    for row in fixed.chunks_exact(d) {
        for i in 0..d {
            for j in 0..=i {
                base[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            base[(i, j)] = base[(j, i)];
        }
        base[(i, i)] += params.lambda;
    }

    for u in 0..n {
        let mut a = base.clone();
        let mut b = DVector::<f64>::zeros(d);
        for &v in neighbors(u as NodeId) {
            let row = &fixed[v as usize * d..(v as usize + 1) * d];
            for i in 0..d {
                b[i] += (1.0 + alpha) * row[i];
                for j in 0..=i {
                    a[(i, j)] += alpha * row[i] * row[j];
                }
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                a[(i, j)] = a[(j, i)];
            }
        }
        let solution = Cholesky::new(a)
            .expect("system is positive definite for lambda > 0")
            .solve(&b);
        target[u * d..(u + 1) * d].copy_from_slice(solution.as_slice());
    }
}

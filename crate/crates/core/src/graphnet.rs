//! Raw agent observations and the GraphSAGE embedding layer.
//!
//! The agent graph is complete, so each agent's embedding is
//!
//! ```text
//! z_i = tanh(W x_i + sum_{j != i} W' x_j)
//! ```
//!
//! Because the neighbor term is linear it equals `W' s_i` where `s_i` is the
//! sum of the other agents' raw observations; that is the form computed here.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::{axpy, glorot_bound, matvec};
use crate::pathing::CostMatrix;
use crate::world::{GridWorld, TaskStatus};

/// Width of the embedding.
pub const EMBED_DIM: usize = 6;

pub fn observation_dim(m_tasks: usize) -> usize {
    1 + 2 * m_tasks
}

/// Per-agent view of the allocation state.
#[derive(Clone, Debug, PartialEq)]
pub struct RawObservation {
    /// +1 while holding a task, -1 otherwise.
    pub status: f64,
    /// Normalized travel cost to each slot, in [-1, 1].
    pub costs: Vec<f64>,
    /// +1 for a waiting slot, -1 for an assigned or retired one.
    pub indicators: Vec<f64>,
}

impl RawObservation {
    /// Packed `[status, costs.., indicators..]`, length `1 + 2M`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.costs.len() + self.indicators.len());
        v.push(self.status);
        v.extend_from_slice(&self.costs);
        v.extend_from_slice(&self.indicators);
        v
    }
}

pub fn build_observation(world: &GridWorld, agent: usize, costs: &CostMatrix) -> RawObservation {
    let status = if world.agents()[agent].is_assigned() { 1.0 } else { -1.0 };
    let indicators = world
        .slots()
        .iter()
        .map(|s| match s {
            Some(t) if t.status == TaskStatus::Waiting => 1.0,
            _ => -1.0,
        })
        .collect();
    RawObservation {
        status,
        costs: costs.normalized[agent].clone(),
        indicators,
    }
}

/// Packed observations of every agent against the world's current costs.
pub fn build_observations(world: &GridWorld) -> Vec<Vec<f64>> {
    (0..world.n_agents())
        .map(|i| build_observation(world, i, world.costs()).to_vec())
        .collect()
}

/// Sum of every observation except agent `i`'s, in index order.
pub fn neighbor_sum(all: &[Vec<f64>], i: usize) -> Vec<f64> {
    let mut s = vec![0.0; all[i].len()];
    for (j, x) in all.iter().enumerate() {
        if j != i {
            axpy(1.0, x, &mut s);
        }
    }
    s
}

/// Learnable GraphSAGE weights: `w` (self) and `w_neighbor`, both
/// `out_dim x in_dim` row-major. There are no biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SageParams {
    pub out_dim: usize,
    pub in_dim: usize,
    pub w: Vec<f64>,
    pub w_neighbor: Vec<f64>,
}

impl SageParams {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        SageParams {
            out_dim,
            in_dim,
            w: vec![0.0; out_dim * in_dim],
            w_neighbor: vec![0.0; out_dim * in_dim],
        }
    }

    /// Glorot-uniform initialization of both matrices.
    pub fn init<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        Self::init_for_neighbors(out_dim, in_dim, 1, rng)
    }

    /// Glorot-uniform, with the neighbor bound divided by the number of
    /// neighbors so the summed term starts no larger than the self term.
    pub fn init_for_neighbors<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, neighbors: usize, rng: &mut R) -> Self {
        let a = glorot_bound(in_dim, out_dim);
        let b = a / neighbors.max(1) as f64;
        let mut p = Self::zeros(out_dim, in_dim);
        for v in p.w.iter_mut() {
            *v = rng.gen_range(-a..=a);
        }
        for v in p.w_neighbor.iter_mut() {
            *v = rng.gen_range(-b..=b);
        }
        p
    }

    /// `tanh(W own + W' neighbors)`; `None` drops the neighbor term.
    pub fn embed(&self, own: &[f64], neighbors: Option<&[f64]>) -> Vec<f64> {
        let mut pre = vec![0.0; self.out_dim];
        matvec(&self.w, own, &mut pre);
        if let Some(s) = neighbors {
            let mut agg = vec![0.0; self.out_dim];
            matvec(&self.w_neighbor, s, &mut agg);
            for (p, a) in pre.iter_mut().zip(&agg) {
                *p += a;
            }
        }
        pre.iter_mut().for_each(|p| *p = p.tanh());
        pre
    }

    /// Reverse pass for one embedding. Accumulates parameter gradients into
    /// `grads` and returns `(dL/d own, dL/d neighbors)`.
    pub fn backward(
        &self,
        own: &[f64],
        neighbors: Option<&[f64]>,
        z: &[f64],
        dz: &[f64],
        grads: &mut SageParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.in_dim;
        let mut d_own = vec![0.0; n];
        let mut d_nb = vec![0.0; n];
        for k in 0..self.out_dim {
            let dpre = dz[k] * (1.0 - z[k] * z[k]);
            if dpre == 0.0 {
                continue;
            }
            let row = k * n..(k + 1) * n;
            axpy(dpre, own, &mut grads.w[row.clone()]);
            axpy(dpre, &self.w[row.clone()], &mut d_own);
            if let Some(s) = neighbors {
                axpy(dpre, s, &mut grads.w_neighbor[row.clone()]);
                axpy(dpre, &self.w_neighbor[row], &mut d_nb);
            }
        }
        (d_own, d_nb)
    }

    pub fn tensors(&self) -> [&[f64]; 2] {
        [&self.w, &self.w_neighbor]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 2] {
        [&mut self.w, &mut self.w_neighbor]
    }
}

/// Embedding of agent `i` given everyone's raw observations.
pub fn sage_forward(all: &[Vec<f64>], i: usize, params: &SageParams) -> Vec<f64> {
    let s = neighbor_sum(all, i);
    params.embed(&all[i], Some(&s))
}

/// Gradients of a loss through every agent's embedding under shared
/// `params`.
#[derive(Clone, Debug, PartialEq)]
pub struct SageBackward {
    pub grads: SageParams,
    /// dL/dx_j for every agent's raw observation.
    pub d_inputs: Vec<Vec<f64>>,
}

/// Reverse pass of [`sage_forward`] for all agents at once.
///
/// `embeddings[i]` must be the forward output for agent `i` and
/// `upstream[i]` the loss gradient with respect to it. Contributions are
/// accumulated in agent-index order.
pub fn sage_backward(
    params: &SageParams,
    all: &[Vec<f64>],
    embeddings: &[Vec<f64>],
    upstream: &[Vec<f64>],
) -> SageBackward {
    let n = all.len();
    let mut grads = SageParams::zeros(params.out_dim, params.in_dim);
    let mut d_inputs = vec![vec![0.0; params.in_dim]; n];
    for i in 0..n {
        let s = neighbor_sum(all, i);
        let (d_own, d_nb) = params.backward(&all[i], Some(&s), &embeddings[i], &upstream[i], &mut grads);
        axpy(1.0, &d_own, &mut d_inputs[i]);
        for (j, d) in d_inputs.iter_mut().enumerate() {
            if j != i {
                axpy(1.0, &d_nb, d);
            }
        }
    }
    SageBackward { grads, d_inputs }
}

//! Per-agent policy and value networks.

mod dist;
mod mlp;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dist::{dist_entropy, entropy_grad, log_prob_grad, sample_action, ActionDistribution};
pub use mlp::{Dense, Mlp, MlpTrace};

/// Hidden width of both networks.
pub const HIDDEN: usize = 128;

/// Output-layer scale of a freshly initialized policy, so the first
/// rollouts are close to uniform.
pub const POLICY_HEAD_SCALE: f64 = 0.01;

/// Policy (`in -> h -> h -> M+1`, softmax) and value (`in -> h -> h -> 1`,
/// linear) networks of one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub policy: Mlp,
    pub value: Mlp,
}

impl MlpParams {
    pub fn zeros(input: usize, hidden: usize, actions: usize) -> Self {
        MlpParams {
            policy: Mlp::zeros(&[input, hidden, hidden, actions]),
            value: Mlp::zeros(&[input, hidden, hidden, 1]),
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, actions: usize, rng: &mut R) -> Self {
        MlpParams {
            policy: Mlp::init(&[input, hidden, hidden, actions], POLICY_HEAD_SCALE, rng),
            value: Mlp::init(&[input, hidden, hidden, 1], 1.0, rng),
        }
    }

    pub fn n_actions(&self) -> usize {
        self.policy.output_dim()
    }
}

pub fn policy_forward(z: &[f64], params: &MlpParams) -> ActionDistribution {
    ActionDistribution::from_logits(params.policy.eval(z))
}

pub fn value_forward(z: &[f64], params: &MlpParams) -> f64 {
    params.value.eval(z)[0]
}

/// Gradients of the policy network given dL/d logits.
pub fn policy_backward(params: &MlpParams, trace: &MlpTrace, d_logits: &[f64], grads: &mut MlpParams) -> Vec<f64> {
    params.policy.backward(trace, d_logits, &mut grads.policy)
}

/// Gradients of the value network given dL/dV.
pub fn value_backward(params: &MlpParams, trace: &MlpTrace, d_value: f64, grads: &mut MlpParams) -> Vec<f64> {
    params.value.backward(trace, &[d_value], &mut grads.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn zero_params_uniform_policy_and_zero_value() {
        let p = MlpParams::zeros(6, 8, 4);
        let z = [0.1, 0.2, -0.3, 0.4, 0.5, -0.6];
        let d = policy_forward(&z, &p);
        assert!(d.probs.iter().all(|q| (q - 0.25).abs() < 1e-15));
        assert_eq!(value_forward(&z, &p), 0.0);
    }

    #[test]
    fn value_bias_passthrough() {
        let mut p = MlpParams::zeros(6, 8, 4);
        p.value.layers[2].bias[0] = 1.75;
        assert_eq!(value_forward(&[0.3; 6], &p), 1.75);
    }

    #[test]
    fn fresh_policy_is_near_uniform() {
        let mut rng = stream(0, Purpose::Init, 0);
        let p = MlpParams::init(6, HIDDEN, 5, &mut rng);
        let d = policy_forward(&[0.9, -0.9, 0.5, -0.5, 0.1, 0.0], &p);
        assert!(d.probs.iter().all(|q| (q - 0.2).abs() < 0.01));
    }
}

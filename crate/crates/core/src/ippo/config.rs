use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::HIDDEN;

/// How an agent turns raw observations into the network input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    /// `tanh(W x_i + W' sum_{j != i} x_j)`
    #[default]
    Sage,
    /// `tanh(W x_i)`, the agent's own observation only.
    Local,
}

/// What the policy and value networks receive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyInput {
    /// The embedding `z_i` alone.
    #[default]
    Embedding,
    /// `[x_i, z_i]`.
    Concat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    pub sgd_iters: usize,
    /// Samples per agent per update.
    pub batch_size: usize,
    pub fragment_len: usize,
    pub minibatch_size: usize,
    pub clip_epsilon: f64,
    pub value_coef: f64,
    /// Penalty for losing a conflict or making an invalid or redundant request.
    pub lambda_conflict: f64,
    /// Penalty for idling while a task waits.
    pub mu_idle: f64,
    /// Bonus for a cheap assignment.
    pub eta_bonus: f64,
    /// Normalized cost below which the bonus is paid.
    pub bonus_threshold: f64,
    pub normalize_advantages: bool,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub hidden: usize,
    pub embedding: EmbeddingMode,
    pub policy_input: PolicyInput,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-5,
            gamma: 0.99,
            gae_lambda: 0.95,
            entropy_coef: 0.05,
            sgd_iters: 10,
            batch_size: 1000,
            fragment_len: 100,
            minibatch_size: 128,
            clip_epsilon: 0.2,
            value_coef: 0.5,
            lambda_conflict: 1.0,
            mu_idle: 0.5,
            eta_bonus: 0.5,
            bonus_threshold: -0.5,
            normalize_advantages: true,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            hidden: HIDDEN,
            embedding: EmbeddingMode::Sage,
            policy_input: PolicyInput::Embedding,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::config(format!(
                "gae_lambda must be in [0, 1], got {}",
                self.gae_lambda
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config(format!("lr must be positive, got {}", self.lr)));
        }
        for (name, v) in [
            ("sgd_iters", self.sgd_iters),
            ("batch_size", self.batch_size),
            ("fragment_len", self.fragment_len),
            ("minibatch_size", self.minibatch_size),
            ("hidden", self.hidden),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        for (name, v) in [
            ("entropy_coef", self.entropy_coef),
            ("clip_epsilon", self.clip_epsilon),
            ("value_coef", self.value_coef),
            ("lambda_conflict", self.lambda_conflict),
            ("mu_idle", self.mu_idle),
            ("eta_bonus", self.eta_bonus),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.bonus_threshold.is_finite() {
            return Err(Error::config("bonus_threshold must be finite"));
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(format!("{name} must be in [0, 1), got {v}")));
            }
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::config("adam_eps must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = [
            TrainConfig { gamma: 2.0, ..Default::default() },
            TrainConfig { gamma: 0.0, ..Default::default() },
            TrainConfig { gae_lambda: -0.1, ..Default::default() },
            TrainConfig { lr: 0.0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { adam_beta2: 1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().unwrap_err().is_config());
        }
    }

    #[test]
    fn partial_json_fills_defaults_and_rejects_unknown_keys() {
        let c: TrainConfig = serde_json::from_str(r#"{"lr": 0.001, "embedding": "local"}"#).unwrap();
        assert_eq!(c.lr, 0.001);
        assert_eq!(c.embedding, EmbeddingMode::Local);
        assert_eq!(c.gamma, 0.99);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"learning_rate": 1.0}"#).is_err());
    }
}

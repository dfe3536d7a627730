//! Independent PPO: every agent trains its own embedding, policy and value
//! networks from its own experience.

mod adam;
mod buffer;
mod config;
mod gae;
mod loss;
mod model;
mod rewards;
mod train;

pub use adam::{adam_step, AdamState, Parameters};
pub use buffer::RolloutBuffer;
pub use config::{EmbeddingMode, PolicyInput, TrainConfig};
pub use gae::{compute_gae, normalize};
pub use loss::{ppo_loss, LossStats, Sample};
pub use model::{AgentForward, AgentModel, Architecture, TrainedModel, CHECKPOINT_VERSION};
pub use rewards::compute_rewards;
pub use train::{evaluate, train, train_from, update_agent, CurveRow, TrainOutcome};

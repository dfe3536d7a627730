use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::adam::{adam_step, AdamState};
use super::buffer::RolloutBuffer;
use super::config::TrainConfig;
use super::gae::normalize;
use super::loss::{ppo_loss, Sample};
use super::model::{AgentModel, Architecture, TrainedModel};
use super::rewards::compute_rewards;
use crate::bench::{run_scenario, Allocator, MetricsRecord};
use crate::error::{Error, Result};
use crate::graphnet::{build_observations, neighbor_sum};
use crate::policy::{dist_entropy, sample_action};
use crate::rng::{derive_seed, stream, Purpose};
use crate::world::{GridWorld, ScenarioConfig};

/// One line of the training curve, written once per update.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub iteration: usize,
    pub env_steps: u64,
    /// Mean per-agent reward per step over the batch.
    pub mean_reward: f64,
    /// Mean entropy of the sampling distributions over the batch.
    pub mean_entropy: f64,
    pub mean_policy_loss: f64,
    pub mean_value_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub curve: Vec<CurveRow>,
}

/// Loss means over the minibatches of one agent's update.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
}

/// Runs PPO epochs over one agent's batch. Nothing but the agent's own
/// parameters, optimizer state and buffer is read or written.
pub fn update_agent<R: Rng + ?Sized>(
    agent: &mut AgentModel,
    arch: Architecture,
    adam: &mut AdamState,
    buffer: &RolloutBuffer,
    config: &TrainConfig,
    iteration: usize,
    rng: &mut R,
) -> Result<UpdateStats> {
    let mut advantages = buffer.advantages.clone();
    if config.normalize_advantages {
        normalize(&mut advantages);
    }
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut stats = UpdateStats::default();
    let mut minibatches = 0usize;
    for _ in 0..config.sgd_iters {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let samples: Vec<Sample<'_>> = chunk
                .iter()
                .map(|&k| Sample {
                    own: &buffer.own[k],
                    neighbors: &buffer.neighbors[k],
                    action: buffer.actions[k],
                    old_log_prob: buffer.log_probs[k],
                    advantage: advantages[k],
                    target: buffer.targets[k],
                })
                .collect();
            let (loss, grads) = ppo_loss(agent, arch, &samples, config);
            if !loss.total.is_finite() {
                return Err(Error::Diverged { iteration, quantity: "loss" });
            }
            adam_step(agent, &grads, adam, config.lr);
            stats.policy_loss += loss.policy;
            stats.value_loss += loss.value;
            minibatches += 1;
        }
    }
    if !agent.is_finite() {
        return Err(Error::Diverged { iteration, quantity: "parameters" });
    }
    if minibatches > 0 {
        stats.policy_loss /= minibatches as f64;
        stats.value_loss /= minibatches as f64;
    }
    Ok(stats)
}

fn update_all(
    model: &mut TrainedModel,
    adam: &mut [AdamState],
    buffers: &[RolloutBuffer],
    config: &TrainConfig,
    iteration: usize,
    seed: u64,
) -> Result<Vec<UpdateStats>> {
    let arch = model.arch;
    let n = model.n_agents;
    model
        .agents
        .par_iter_mut()
        .zip(adam.par_iter_mut())
        .zip(buffers.par_iter())
        .enumerate()
        .map(|(i, ((agent, state), buffer))| {
            let mut rng = stream(seed, Purpose::Minibatch, (iteration * n + i) as u64);
            update_agent(agent, arch, state, buffer, config, iteration, &mut rng)
        })
        .collect()
}

fn episode_world(scenario: &ScenarioConfig, seed: u64, episode: u64) -> Result<GridWorld> {
    GridWorld::new(scenario, derive_seed(seed, Purpose::Episode, episode))
}

/// Trains one model per agent for `total_steps` environment steps.
///
/// Each update collects `batch_size` steps in fragments of at most
/// `fragment_len`; every step yields one sample per agent. A fresh world is
/// drawn whenever an episode ends.
pub fn train(config: &TrainConfig, scenario: &ScenarioConfig, total_steps: u64, seed: u64) -> Result<TrainOutcome> {
    let model = TrainedModel::init(scenario.n_agents(), scenario.task_slots, config, seed);
    train_from(model, config, scenario, total_steps, seed)
}

/// Continues training `model` with fresh optimizer state.
pub fn train_from(
    mut model: TrainedModel,
    config: &TrainConfig,
    scenario: &ScenarioConfig,
    total_steps: u64,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    scenario.validate()?;
    let n = scenario.n_agents();
    model.check_shape(n, scenario.task_slots)?;
    if model.arch != Architecture::from_config(config) {
        return Err(Error::Shape("checkpoint architecture differs from the training config".into()));
    }
    let mut curve = Vec::new();
    if total_steps == 0 {
        return Ok(TrainOutcome { model, curve });
    }
    let arch = model.arch;
    let mut adam: Vec<AdamState> = model
        .agents
        .iter()
        .map(|a| AdamState::new(a, config.adam_beta1, config.adam_beta2, config.adam_eps))
        .collect();
    let mut sampler = stream(seed, Purpose::Sampling, 0);
    let mut episode = 0;
    let mut world = episode_world(scenario, seed, episode)?;
    let mut buffers = vec![RolloutBuffer::default(); n];
    let mut env_steps = 0u64;
    let mut iteration = 0usize;

    while env_steps < total_steps {
        let target = (config.batch_size as u64).min(total_steps - env_steps) as usize;
        buffers.iter_mut().for_each(RolloutBuffer::clear);
        let mut reward_sum = 0.0;
        let mut entropy_sum = 0.0;

        while buffers[0].len() < target {
            let fragment = config.fragment_len.min(target - buffers[0].len());
            let mut finished = false;
            for _ in 0..fragment {
                let obs = build_observations(&world);
                let mut actions = Vec::with_capacity(n);
                let mut staged = Vec::with_capacity(n);
                for (i, agent) in model.agents.iter().enumerate() {
                    let nb = neighbor_sum(&obs, i);
                    let (dist, value) = agent.policy_and_value(arch, &obs[i], &nb);
                    let (action, log_prob) = sample_action(&dist, &mut sampler);
                    entropy_sum += dist_entropy(&dist);
                    actions.push(action);
                    staged.push((nb, action, log_prob, value));
                }
                let result = world.step(&actions)?;
                let (rewards, _) = compute_rewards(&result.outcome, &result.costs, config);
                for (i, (nb, action, log_prob, value)) in staged.into_iter().enumerate() {
                    buffers[i].push(obs[i].clone(), nb, action, log_prob, value, rewards[i], result.done);
                    reward_sum += rewards[i];
                }
                env_steps += 1;
                if result.finished() {
                    finished = true;
                    break;
                }
            }
            let obs = build_observations(&world);
            for (i, buffer) in buffers.iter_mut().enumerate() {
                let terminal = buffer.dones.last().copied().unwrap_or(false);
                let bootstrap = if terminal {
                    0.0
                } else {
                    let nb = neighbor_sum(&obs, i);
                    model.agents[i].policy_and_value(arch, &obs[i], &nb).1
                };
                buffer.finish_fragment(bootstrap, config.gamma, config.gae_lambda);
            }
            if finished {
                episode += 1;
                world = episode_world(scenario, seed, episode)?;
            }
        }
        for b in &buffers {
            b.check().map_err(Error::InvalidState)?;
        }

        let stats = update_all(&mut model, &mut adam, &buffers, config, iteration, seed)?;
        let samples = (target * n) as f64;
        curve.push(CurveRow {
            iteration,
            env_steps,
            mean_reward: reward_sum / samples,
            mean_entropy: entropy_sum / samples,
            mean_policy_loss: stats.iter().map(|s| s.policy_loss).sum::<f64>() / n as f64,
            mean_value_loss: stats.iter().map(|s| s.value_loss).sum::<f64>() / n as f64,
        });
        iteration += 1;
    }
    Ok(TrainOutcome { model, curve })
}

/// Decentralized execution with greedy actions; no parameter updates.
pub fn evaluate(
    model: &TrainedModel,
    scenario: &ScenarioConfig,
    episodes: usize,
    seed: u64,
    rewards: &TrainConfig,
) -> Result<MetricsRecord> {
    scenario.validate()?;
    model.check_shape(scenario.n_agents(), scenario.task_slots)?;
    run_scenario(scenario, &Allocator::Policy(model), episodes, seed, rewards)
}

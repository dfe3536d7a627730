use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::allocators::{greedy_assign, hungarian, random_assign, resolve_conflicts, AllocationOutcome};
use crate::error::{Error, Result};
use crate::graphnet::{build_observations, neighbor_sum};
use crate::ippo::{compute_rewards, TrainConfig, TrainedModel};
use crate::pathing::CostMatrix;
use crate::rng::{derive_seed, stream, Purpose, StreamRng};
use crate::world::{GridWorld, ScenarioConfig, TaskMode, TaskId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocatorKind {
    Policy,
    Hungarian,
    Greedy,
    Random,
}

impl AllocatorKind {
    pub const ALL: [AllocatorKind; 4] = [
        AllocatorKind::Policy,
        AllocatorKind::Hungarian,
        AllocatorKind::Greedy,
        AllocatorKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AllocatorKind::Policy => "policy",
            AllocatorKind::Hungarian => "hungarian",
            AllocatorKind::Greedy => "greedy",
            AllocatorKind::Random => "random",
        }
    }
}

impl fmt::Display for AllocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AllocatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown allocator {s:?} (expected policy, hungarian, greedy or random)")))
    }
}

pub enum Allocator<'a> {
    /// Decentralized: every agent runs its own network, then requests are
    /// resolved.
    Policy(&'a TrainedModel),
    Hungarian,
    Greedy,
    Random,
}

impl Allocator<'_> {
    pub fn kind(&self) -> AllocatorKind {
        match self {
            Allocator::Policy(_) => AllocatorKind::Policy,
            Allocator::Hungarian => AllocatorKind::Hungarian,
            Allocator::Greedy => AllocatorKind::Greedy,
            Allocator::Random => AllocatorKind::Random,
        }
    }
}

/// One completed assignment, enough to recompute its travel time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    pub episode: usize,
    pub agent: usize,
    pub task: TaskId,
    pub velocity: f64,
    pub moves: u32,
    pub travel_time_s: f64,
}

/// Aggregate metrics of one allocator on one scenario and seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub allocator: AllocatorKind,
    pub n_agents: usize,
    pub m_tasks: usize,
    pub mode: TaskMode,
    pub seed: u64,
    pub episodes: usize,
    /// Realized travel time of completed assignments, summed per episode and
    /// averaged over episodes, in seconds.
    pub total_travel_cost: f64,
    /// Fraction of decision rounds whose raw requests contest no slot.
    pub success_rate: f64,
    /// Mean wall time of a decision round, path planning excluded. For the
    /// policy this is the slowest agent's forward pass plus resolution, as
    /// agents decide concurrently.
    pub alloc_time_mean_s: f64,
    pub alloc_time_total_s: f64,
    /// Policy only: mean of the summed per-agent forward times plus
    /// resolution, i.e. the round run on a single processor.
    pub alloc_time_serial_mean_s: f64,
    pub decision_rounds: usize,
    pub tasks_completed: usize,
    /// Mean over steps of the summed per-agent reward.
    pub mean_global_reward: f64,
    #[serde(skip)]
    pub audit: Vec<AuditEntry>,
}

impl MetricsRecord {
    /// Travel cost recomputed from the audit log.
    pub fn audited_travel_cost(&self) -> f64 {
        if self.episodes == 0 {
            return 0.0;
        }
        let total: f64 = self.audit.iter().map(|e| e.moves as f64 / e.velocity).sum();
        total / self.episodes as f64
    }
}

/// Timing of one decentralized decision round.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyRound {
    pub actions: Vec<usize>,
    pub outcome: AllocationOutcome,
    /// Slowest agent plus resolution.
    pub concurrent_s: f64,
    /// All agents back to back plus resolution.
    pub serial_s: f64,
}

/// Every agent embeds its neighborhood and picks its greedy action; the
/// requests are then resolved against `costs`.
pub fn policy_round(
    model: &TrainedModel,
    observations: &[Vec<f64>],
    costs: &CostMatrix,
    eligible: &[bool],
    waiting: &[bool],
) -> PolicyRound {
    let mut actions = Vec::with_capacity(model.n_agents);
    let mut slowest = 0.0f64;
    let mut serial = 0.0;
    for i in 0..model.n_agents {
        let start = Instant::now();
        let nb = neighbor_sum(observations, i);
        let action = model.agents[i].policy(model.arch, &observations[i], &nb).argmax();
        let t = start.elapsed().as_secs_f64();
        slowest = slowest.max(t);
        serial += t;
        actions.push(action);
    }
    let start = Instant::now();
    let outcome = resolve_conflicts(&actions, costs, eligible, waiting);
    let resolve = start.elapsed().as_secs_f64();
    PolicyRound {
        actions,
        outcome,
        concurrent_s: slowest + resolve,
        serial_s: serial + resolve,
    }
}

/// Centralized allocation over free agents and waiting slots, timed.
fn centralized_round(
    kind: AllocatorKind,
    world: &GridWorld,
    eligible: &[bool],
    waiting: &[bool],
    rng: &mut StreamRng,
) -> (AllocationOutcome, f64) {
    let agents: Vec<usize> = (0..eligible.len()).filter(|&i| eligible[i]).collect();
    let slots: Vec<usize> = (0..waiting.len()).filter(|&j| waiting[j]).collect();
    let raw = &world.costs().raw;
    let start = Instant::now();
    let sub: Vec<Vec<f64>> = agents
        .iter()
        .map(|&i| slots.iter().map(|&j| raw[i][j]).collect())
        .collect();
    let pairs = match kind {
        AllocatorKind::Hungarian => hungarian(&sub),
        AllocatorKind::Greedy => greedy_assign(&sub),
        AllocatorKind::Random => random_assign(agents.len(), slots.len(), rng),
        AllocatorKind::Policy => unreachable!("policy is decentralized"),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let mapped: Vec<(usize, usize)> = pairs.into_iter().map(|(a, s)| (agents[a], slots[s])).collect();
    (AllocationOutcome::from_assignments(&mapped, eligible, waiting), elapsed)
}

/// Runs `episodes` full episodes and aggregates their metrics.
///
/// Episode `e` uses the same world for every allocator given the same
/// `seed`, so results are paired. Fixed-mode episodes end when every task
/// is complete (or at the horizon); continuous ones at the horizon.
/// Centralized allocators act whenever an agent is free and a task waits;
/// the policy acts every step.
pub fn run_scenario(
    config: &ScenarioConfig,
    allocator: &Allocator<'_>,
    episodes: usize,
    seed: u64,
    rewards: &TrainConfig,
) -> Result<MetricsRecord> {
    config.validate()?;
    if let Allocator::Policy(model) = allocator {
        model.check_shape(config.n_agents(), config.task_slots)?;
    }
    let kind = allocator.kind();
    let mut record = MetricsRecord {
        allocator: kind,
        n_agents: config.n_agents(),
        m_tasks: config.task_slots,
        mode: config.mode,
        seed,
        episodes,
        total_travel_cost: 0.0,
        success_rate: 1.0,
        alloc_time_mean_s: 0.0,
        alloc_time_total_s: 0.0,
        alloc_time_serial_mean_s: 0.0,
        decision_rounds: 0,
        tasks_completed: 0,
        mean_global_reward: 0.0,
        audit: Vec::new(),
    };
    let mut conflict_free = 0usize;
    let mut serial_total = 0.0;
    let mut reward_total = 0.0;
    let mut steps = 0usize;
    let mut cost_total = 0.0;

    for episode in 0..episodes {
        let mut world = GridWorld::new(config, derive_seed(seed, Purpose::Episode, episode as u64))?;
        let mut rng = stream(seed, Purpose::Baseline, episode as u64);
        let velocities: Vec<f64> = world.agents().iter().map(|a| a.velocity).collect();
        loop {
            let eligible = world.eligibility();
            let waiting = world.waiting_mask();
            let decision = eligible.iter().any(|&e| e) && waiting.iter().any(|&w| w);
            let outcome = match allocator {
                Allocator::Policy(model) => {
                    let obs = build_observations(&world);
                    let round = policy_round(model, &obs, world.costs(), &eligible, &waiting);
                    if decision {
                        record.decision_rounds += 1;
                        record.alloc_time_total_s += round.concurrent_s;
                        serial_total += round.serial_s;
                        if round.outcome.is_conflict_free() {
                            conflict_free += 1;
                        }
                    }
                    round.outcome
                }
                _ if decision => {
                    let (outcome, elapsed) = centralized_round(kind, &world, &eligible, &waiting, &mut rng);
                    record.decision_rounds += 1;
                    record.alloc_time_total_s += elapsed;
                    serial_total += elapsed;
                    conflict_free += 1;
                    outcome
                }
                _ => AllocationOutcome::from_assignments(&[], &eligible, &waiting),
            };
            let result = world.apply(outcome)?;
            let (_, global) = compute_rewards(&result.outcome, &result.costs, rewards);
            reward_total += global;
            steps += 1;
            for c in &result.completions {
                cost_total += c.travel_time_s;
                record.tasks_completed += 1;
                record.audit.push(AuditEntry {
                    episode,
                    agent: c.agent,
                    task: c.task,
                    velocity: velocities[c.agent],
                    moves: c.moves,
                    travel_time_s: c.travel_time_s,
                });
            }
            if result.finished() {
                break;
            }
        }
    }
    if episodes > 0 {
        record.total_travel_cost = cost_total / episodes as f64;
    }
    if record.decision_rounds > 0 {
        let rounds = record.decision_rounds as f64;
        record.success_rate = conflict_free as f64 / rounds;
        record.alloc_time_mean_s = record.alloc_time_total_s / rounds;
        record.alloc_time_serial_mean_s = serial_total / rounds;
    }
    if steps > 0 {
        record.mean_global_reward = reward_total / steps as f64;
    }
    Ok(record)
}

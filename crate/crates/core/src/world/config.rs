use serde::{Deserialize, Serialize};

use super::grid::AgentKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    /// Tasks are generated once; the episode ends when all are complete.
    Fixed,
    /// An allocated slot is refilled immediately with a fresh task.
    #[default]
    Continuous,
}

impl std::fmt::Display for TaskMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskMode::Fixed => "fixed",
            TaskMode::Continuous => "continuous",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentGroup {
    pub kind: AgentKind,
    pub count: usize,
}

/// Scenario document. Field names are a stable file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dims: [usize; 3],
    pub agents: Vec<AgentGroup>,
    pub task_slots: usize,
    #[serde(default = "default_density")]
    pub obstacle_density: f64,
    #[serde(default)]
    pub mode: TaskMode,
    /// Step horizon; in fixed mode it caps episodes that never finish.
    #[serde(default = "default_episode_len")]
    pub episode_len: u64,
    #[serde(default = "default_threshold")]
    pub blockage_threshold: u32,
}

fn default_density() -> f64 {
    0.05
}

fn default_episode_len() -> u64 {
    500
}

fn default_threshold() -> u32 {
    3
}

pub const MAX_OBSTACLE_DENSITY: f64 = 0.3;

impl ScenarioConfig {
    /// Convenience constructor with default density, horizon and threshold.
    pub fn new(dims: [usize; 3], agents: Vec<AgentGroup>, task_slots: usize, mode: TaskMode) -> Self {
        ScenarioConfig {
            dims,
            agents,
            task_slots,
            obstacle_density: default_density(),
            mode,
            episode_len: default_episode_len(),
            blockage_threshold: default_threshold(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::config(format!("dims must be positive, got {:?}", self.dims)));
        }
        if self.dims.iter().any(|&d| d > 4096) {
            return Err(Error::config(format!("dims too large: {:?}", self.dims)));
        }
        if self.n_agents() == 0 {
            return Err(Error::config("agents: at least one agent is required"));
        }
        if self.task_slots == 0 {
            return Err(Error::config("task_slots must be at least 1"));
        }
        if !(0.0..=MAX_OBSTACLE_DENSITY).contains(&self.obstacle_density) {
            return Err(Error::config(format!(
                "obstacle_density must lie in [0, {MAX_OBSTACLE_DENSITY}], got {}",
                self.obstacle_density
            )));
        }
        if self.episode_len == 0 {
            return Err(Error::config("episode_len must be positive"));
        }
        if self.blockage_threshold == 0 {
            return Err(Error::config("blockage_threshold must be positive"));
        }
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.agents.iter().map(|g| g.count).sum()
    }

    /// Agent kinds in id order: groups expand in document order.
    pub fn agent_kinds(&self) -> Vec<AgentKind> {
        self.agents
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.kind, g.count))
            .collect()
    }

    pub fn has_ground_agents(&self) -> bool {
        self.agents.iter().any(|g| g.kind == AgentKind::Ground && g.count > 0)
    }

    pub fn min_velocity(&self) -> f64 {
        self.agents
            .iter()
            .filter(|g| g.count > 0)
            .map(|g| g.kind.velocity())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Rescales the agent groups to `n` agents total, keeping proportions.
    /// Remainders go to the earliest groups.
    pub fn with_agent_count(&self, n: usize) -> Self {
        let total = self.n_agents().max(1);
        let mut counts: Vec<usize> = self.agents.iter().map(|g| g.count * n / total).collect();
        let mut left = n - counts.iter().sum::<usize>();
        for (i, g) in self.agents.iter().enumerate().cycle() {
            if left == 0 {
                break;
            }
            if g.count > 0 {
                counts[i] += 1;
                left -= 1;
            }
        }
        let mut out = self.clone();
        for (g, c) in out.agents.iter_mut().zip(counts) {
            g.count = c;
        }
        out
    }
}

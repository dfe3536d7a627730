//! Discrete 3D grid world: agents, obstacles, task slots and the step loop.

mod config;
mod entity;
mod grid;
mod sim;

pub use config::{AgentGroup, ScenarioConfig, TaskMode, MAX_OBSTACLE_DENSITY};
pub use entity::{Agent, AgentStatus, Job, Task, TaskId, TaskStatus};
pub use grid::{AgentKind, Cell, Connectivity, Occupancy};
pub use sim::{AssignmentRecord, Completion, GridWorld, StepResult};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::grid::{AgentKind, Cell};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u64);

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Waiting,
    Assigned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub location: Cell,
    pub status: TaskStatus,
    pub spawn_step: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentStatus {
    Idle,
    /// Won a task this step.
    Accept,
    /// En route to its task.
    Assign,
    /// Reached its task this step.
    Complete,
}

/// The task an agent is currently serving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub task: TaskId,
    /// Slot the task was allocated from. In continuous mode the slot has
    /// already been refilled with another task.
    pub slot: usize,
    pub location: Cell,
    pub assigned_step: u64,
    /// Cells entered since assignment.
    pub moves: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub kind: AgentKind,
    pub position: Cell,
    pub velocity: f64,
    pub status: AgentStatus,
    pub job: Option<Job>,
    /// Cells still to enter, excluding the current one.
    pub path: VecDeque<Cell>,
    pub blockage_count: u32,
}

impl Agent {
    pub fn new(id: usize, kind: AgentKind, position: Cell) -> Self {
        Agent {
            id,
            kind,
            position,
            velocity: kind.velocity(),
            status: AgentStatus::Idle,
            job: None,
            path: VecDeque::new(),
            blockage_count: 0,
        }
    }

    pub fn assigned_task(&self) -> Option<TaskId> {
        self.job.as_ref().map(|j| j.task)
    }

    pub fn goal(&self) -> Option<Cell> {
        self.job.as_ref().map(|j| j.location)
    }

    /// Holding a task (statuses Accept and Assign).
    pub fn is_assigned(&self) -> bool {
        matches!(self.status, AgentStatus::Accept | AgentStatus::Assign)
    }

    /// Free to take a new task.
    pub fn is_free(&self) -> bool {
        !self.is_assigned()
    }
}

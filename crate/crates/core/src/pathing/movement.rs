use std::collections::HashMap;

use super::astar::astar_avoiding;
use super::reservation::ReservationTable;
use crate::world::{Agent, Cell, Occupancy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveResult {
    Moved { from: Cell, to: Cell },
    Blocked { count: u32 },
    Replanned,
}

/// Dynamic state an agent moves through during one step.
pub struct Traffic<'a> {
    pub occupancy: &'a Occupancy,
    /// Current cell of every agent, updated as agents move.
    pub occupants: &'a mut HashMap<Cell, usize>,
    pub reservations: &'a mut ReservationTable,
    /// Step being executed; a move lands at `clock + 1`.
    pub clock: u64,
    /// Consecutive blocked steps that trigger a replan.
    pub threshold: u32,
}

impl Traffic<'_> {
    fn is_taken(&self, cell: Cell, agent: usize) -> bool {
        !self.occupancy.is_free(cell)
            || self.occupants.get(&cell).is_some_and(|&a| a != agent)
            || self
                .reservations
                .holder(cell, self.clock + 1)
                .is_some_and(|a| a != agent)
    }
}

/// Advances `agent` one cell along its queued path.
///
/// A move needs the next cell to be free of obstacles, of other agents, and
/// of other agents' claims for the arrival step. Otherwise the agent waits;
/// after `threshold` consecutive waits it replans around the cells other
/// agents occupy right now. A failed replan leaves the agent in place with
/// its counter saturated, so it tries again next step.
pub fn advance(agent: &mut Agent, traffic: &mut Traffic<'_>) -> MoveResult {
    let next = *agent.path.front().expect("advance needs a queued path");
    if !traffic.is_taken(next, agent.id) {
        let from = agent.position;
        traffic.occupants.remove(&from);
        traffic.occupants.insert(next, agent.id);
        traffic.reservations.reserve(next, traffic.clock + 1, agent.id);
        agent.position = next;
        agent.path.pop_front();
        agent.blockage_count = 0;
        return MoveResult::Moved { from, to: next };
    }

    agent.blockage_count += 1;
    if agent.blockage_count >= traffic.threshold && replan(agent, traffic) {
        return MoveResult::Replanned;
    }
    // Still waiting: shift own claims one step later.
    traffic.reservations.release_agent(agent.id);
    traffic
        .reservations
        .reserve_path(agent.id, agent.path.iter(), traffic.clock + 2);
    MoveResult::Blocked {
        count: agent.blockage_count,
    }
}

/// Recomputes the path to the agent's goal treating other agents' cells as
/// obstacles. Returns false if the goal is unreachable right now.
pub fn replan(agent: &mut Agent, traffic: &mut Traffic<'_>) -> bool {
    let Some(goal) = agent.goal() else {
        return false;
    };
    let id = agent.id;
    let occupants = &*traffic.occupants;
    let found = astar_avoiding(
        traffic.occupancy,
        agent.kind.connectivity(),
        agent.position,
        goal,
        |c| occupants.get(&c).is_some_and(|&a| a != id),
    );
    match found {
        Some(path) => {
            agent.path = path.cells.into_iter().skip(1).collect();
            agent.blockage_count = 0;
            traffic.reservations.release_agent(id);
            traffic
                .reservations
                .reserve_path(id, agent.path.iter(), traffic.clock + 1);
            true
        }
        None => {
            agent.blockage_count = agent.blockage_count.max(traffic.threshold);
            false
        }
    }
}

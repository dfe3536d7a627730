use std::collections::BTreeMap;

use crate::pathing::CostMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub agent: usize,
    /// Zero-based task slot (request `j` targets slot `j - 1`).
    pub slot: usize,
}

/// A waiting task requested by more than one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub slot: usize,
    pub winner: usize,
    pub losers: Vec<usize>,
}

/// What happened to every agent's request in one decision step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AllocationOutcome {
    /// Raw action per agent: 0 = no request, `j` = slot `j - 1`.
    pub requests: Vec<usize>,
    pub assignments: Vec<Assignment>,
    pub conflicts: Vec<Conflict>,
    /// Free agents that requested a slot that was not waiting.
    pub invalid: Vec<usize>,
    /// Agents already holding a task that requested another one.
    pub redundant: Vec<usize>,
    /// Free agents that made no request while some task was waiting.
    pub idle_agents: Vec<usize>,
    /// Slots requested by two or more free agents, before resolution.
    pub contested_slots: usize,
}

impl AllocationOutcome {
    /// No slot drew more than one request from free agents.
    pub fn is_conflict_free(&self) -> bool {
        self.contested_slots == 0
    }

    pub fn conflict_losers(&self) -> impl Iterator<Item = usize> + '_ {
        self.conflicts.iter().flat_map(|c| c.losers.iter().copied())
    }

    pub fn slot_of(&self, agent: usize) -> Option<usize> {
        self.assignments.iter().find(|a| a.agent == agent).map(|a| a.slot)
    }

    /// Outcome of a centralized allocator: the given pairs are the whole
    /// decision, so there is nothing to contest.
    pub fn from_assignments(
        pairs: &[(usize, usize)],
        eligible: &[bool],
        waiting: &[bool],
    ) -> Self {
        let mut requests = vec![0; eligible.len()];
        for &(agent, slot) in pairs {
            requests[agent] = slot + 1;
        }
        let any_waiting = waiting.iter().any(|&w| w);
        let idle_agents = (0..eligible.len())
            .filter(|&i| eligible[i] && requests[i] == 0 && any_waiting)
            .collect();
        AllocationOutcome {
            requests,
            assignments: pairs
                .iter()
                .map(|&(agent, slot)| Assignment { agent, slot })
                .collect(),
            idle_agents,
            ..Default::default()
        }
    }
}

/// Resolves simultaneous requests.
///
/// Each waiting slot goes to the free requester with the smallest
/// normalized cost, ties to the lowest agent id; the other requesters are
/// recorded as conflict losers. Requests from agents that already hold a
/// task are recorded as redundant and otherwise ignored. Requests for slots
/// that are not waiting are recorded as invalid.
pub fn resolve_conflicts(
    requests: &[usize],
    costs: &CostMatrix,
    eligible: &[bool],
    waiting: &[bool],
) -> AllocationOutcome {
    let mut by_slot: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut outcome = AllocationOutcome {
        requests: requests.to_vec(),
        ..Default::default()
    };
    let any_waiting = waiting.iter().any(|&w| w);

    for (agent, &req) in requests.iter().enumerate() {
        match (req, eligible[agent]) {
            (0, true) if any_waiting => outcome.idle_agents.push(agent),
            (0, _) => {}
            (_, false) => outcome.redundant.push(agent),
            (j, true) => by_slot.entry(j - 1).or_default().push(agent),
        }
    }

    for (slot, requesters) in by_slot {
        if requesters.len() > 1 {
            outcome.contested_slots += 1;
        }
        if !waiting.get(slot).copied().unwrap_or(false) {
            outcome.invalid.extend(requesters);
            continue;
        }
        // requesters are in ascending id order, strict < keeps the lowest id on ties
        let mut winner = requesters[0];
        for &a in &requesters[1..] {
            if costs.normalized[a][slot] < costs.normalized[winner][slot] {
                winner = a;
            }
        }
        outcome.assignments.push(Assignment { agent: winner, slot });
        if requesters.len() > 1 {
            outcome.conflicts.push(Conflict {
                slot,
                winner,
                losers: requesters.into_iter().filter(|&a| a != winner).collect(),
            });
        }
    }
    outcome.invalid.sort_unstable();
    outcome
}

use std::collections::HashMap;

use crate::world::Cell;

/// Time-indexed cell claims: at most one agent per `(cell, step)`.
#[derive(Clone, Debug, Default)]
pub struct ReservationTable {
    entries: HashMap<(Cell, u64), usize>,
    by_agent: HashMap<usize, Vec<(Cell, u64)>>,
}

impl ReservationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn holder(&self, cell: Cell, step: u64) -> Option<usize> {
        self.entries.get(&(cell, step)).copied()
    }

    /// Claims `(cell, step)` for `agent`. Returns false if someone else holds it.
    pub fn reserve(&mut self, cell: Cell, step: u64, agent: usize) -> bool {
        match self.entries.get(&(cell, step)) {
            Some(&holder) => holder == agent,
            None => {
                self.entries.insert((cell, step), agent);
                self.by_agent.entry(agent).or_default().push((cell, step));
                true
            }
        }
    }

    /// Claims `cells[k]` at `first_step + k`, skipping slots already taken.
    pub fn reserve_path<'a>(
        &mut self,
        agent: usize,
        cells: impl IntoIterator<Item = &'a Cell>,
        first_step: u64,
    ) {
        for (k, cell) in cells.into_iter().enumerate() {
            self.reserve(*cell, first_step + k as u64, agent);
        }
    }

    pub fn release_agent(&mut self, agent: usize) {
        if let Some(held) = self.by_agent.remove(&agent) {
            for key in held {
                if self.entries.get(&key) == Some(&agent) {
                    self.entries.remove(&key);
                }
            }
        }
    }

    /// Drops every claim for steps before `step`.
    pub fn purge_before(&mut self, step: u64) {
        self.entries.retain(|(_, s), _| *s >= step);
        for held in self.by_agent.values_mut() {
            held.retain(|(_, s)| *s >= step);
        }
        self.by_agent.retain(|_, held| !held.is_empty());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, u64, usize)> + '_ {
        self.entries.iter().map(|(&(c, s), &a)| (c, s, a))
    }

    pub fn earliest_step(&self) -> Option<u64> {
        self.entries.keys().map(|(_, s)| *s).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_claim_wins() {
        let mut t = ReservationTable::new();
        let c = Cell::new(1, 1, 0);
        assert!(t.reserve(c, 5, 0));
        assert!(!t.reserve(c, 5, 1));
        assert!(t.reserve(c, 5, 0));
        assert_eq!(t.holder(c, 5), Some(0));
        assert!(t.reserve(c, 6, 1));
    }

    #[test]
    fn release_and_purge() {
        let mut t = ReservationTable::new();
        let cells = [Cell::new(0, 0, 0), Cell::new(1, 0, 0), Cell::new(2, 0, 0)];
        t.reserve_path(3, &cells, 10);
        assert_eq!(t.len(), 3);
        t.purge_before(11);
        assert_eq!(t.len(), 2);
        assert_eq!(t.earliest_step(), Some(11));
        t.release_agent(3);
        assert!(t.is_empty());
    }
}

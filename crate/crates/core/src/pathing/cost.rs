use std::collections::HashMap;

use super::astar::{astar, distance_field, is_unreachable};
use crate::world::{Cell, Connectivity, GridWorld, Occupancy};

/// Travel time in seconds for `distance_m` at `velocity` m/s.
pub fn travel_cost(distance_m: f64, velocity: f64) -> f64 {
    debug_assert!(velocity > 0.0);
    distance_m / velocity
}

/// Clips `raw` to `[0, c_max]` and maps it linearly onto `[-1, 1]`.
pub fn normalize_cost(raw: f64, c_max: f64) -> f64 {
    debug_assert!(c_max > 0.0);
    2.0 * raw.clamp(0.0, c_max) / c_max - 1.0
}

/// Clipping ceiling for a scenario: the free-space traversal time of the
/// whole box at the slowest speed.
pub fn scenario_c_max(dims: [usize; 3], min_velocity: f64) -> f64 {
    (dims[0] + dims[1] + dims[2]) as f64 / min_velocity
}

/// Agent-by-slot travel costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    /// Seconds; unreachable pairs and inactive slots hold exactly `c_max`.
    pub raw: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
    pub c_max: f64,
}

impl CostMatrix {
    pub fn from_raw(raw: Vec<Vec<f64>>, c_max: f64) -> Self {
        let normalized = raw
            .iter()
            .map(|row| row.iter().map(|&c| normalize_cost(c, c_max)).collect())
            .collect();
        CostMatrix {
            raw,
            normalized,
            c_max,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.raw.len()
    }

    pub fn m_tasks(&self) -> usize {
        self.raw.first().map_or(0, Vec::len)
    }
}

/// Reference construction: one A* search per agent-task pair.
pub fn build_cost_matrix(world: &GridWorld) -> CostMatrix {
    let c_max = world.c_max();
    let raw = world
        .agents()
        .iter()
        .map(|agent| {
            world
                .slots()
                .iter()
                .map(|slot| match slot {
                    Some(task) => astar(
                        world.occupancy(),
                        agent.kind.connectivity(),
                        agent.position,
                        task.location,
                    )
                    .map_or(c_max, |p| travel_cost(p.length_m(), agent.velocity)),
                    None => c_max,
                })
                .collect()
        })
        .collect();
    CostMatrix::from_raw(raw, c_max)
}

/// Caches one breadth-first distance field per (task cell, move set).
///
/// Fields depend only on static obstacles, so they stay valid for as long as
/// a task lives. Produces the same matrix as [`build_cost_matrix`].
#[derive(Clone, Debug, Default)]
pub struct DistanceCache {
    fields: HashMap<(Cell, Connectivity), Vec<u32>>,
}

impl DistanceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Distance in moves from `from` to `to`, `None` if unreachable.
    pub fn distance(
        &mut self,
        occ: &Occupancy,
        conn: Connectivity,
        from: Cell,
        to: Cell,
    ) -> Option<u32> {
        if !occ.contains(from) {
            return None;
        }
        let field = self
            .fields
            .entry((to, conn))
            .or_insert_with(|| distance_field(occ, conn, to));
        let d = field[occ.index(from)];
        (!is_unreachable(d)).then_some(d)
    }

    pub fn cost_matrix(&mut self, world: &GridWorld) -> CostMatrix {
        let c_max = world.c_max();
        let occ = world.occupancy();
        let live: Vec<Cell> = world.slots().iter().flatten().map(|t| t.location).collect();
        self.fields.retain(|(cell, _), _| live.contains(cell));

        let raw = world
            .agents()
            .iter()
            .map(|agent| {
                world
                    .slots()
                    .iter()
                    .map(|slot| match slot {
                        Some(task) => self
                            .distance(occ, agent.kind.connectivity(), agent.position, task.location)
                            .map_or(c_max, |d| travel_cost(d as f64, agent.velocity)),
                        None => c_max,
                    })
                    .collect()
            })
            .collect();
        CostMatrix::from_raw(raw, c_max)
    }
}

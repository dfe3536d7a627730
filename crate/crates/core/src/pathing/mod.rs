//! Shortest paths, travel costs, and reservation-based movement.

mod astar;
mod cost;
mod movement;
mod reservation;

pub use astar::{astar, astar_avoiding, distance_field, is_unreachable, Path};
pub use cost::{
    build_cost_matrix, normalize_cost, scenario_c_max, travel_cost, CostMatrix, DistanceCache,
};
pub use movement::{advance, replan, MoveResult, Traffic};
pub use reservation::ReservationTable;

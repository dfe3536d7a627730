//! Conflict resolution for decentralized requests, plus centralized and
//! heuristic baseline allocators.

mod baselines;
mod hungarian;
mod resolve;

pub use baselines::{greedy_assign, random_assign};
pub use hungarian::{assignment_total, hungarian};
pub use resolve::{resolve_conflicts, AllocationOutcome, Assignment, Conflict};

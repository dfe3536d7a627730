//! Scenario runner, metrics and CSV reports.

mod report;
mod run;

pub use report::{
    ablation_compare, ablation_no_graphsage, compare_table, mean_std, AblationReport, TableReport,
};
pub use run::{policy_round, run_scenario, Allocator, AllocatorKind, AuditEntry, MetricsRecord, PolicyRound};

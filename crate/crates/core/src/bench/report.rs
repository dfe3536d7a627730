use std::fs::File;
use std::path::Path;

use serde::Serialize;

use super::run::{run_scenario, Allocator, AllocatorKind, MetricsRecord};
use crate::error::{Error, Result};
use crate::ippo::{train, EmbeddingMode, TrainConfig, TrainedModel};
use crate::world::{ScenarioConfig, TaskMode};

/// Row of `runs.csv`.
#[derive(Serialize)]
struct RunRow {
    allocator: AllocatorKind,
    n_agents: usize,
    m_tasks: usize,
    mode: TaskMode,
    seed: u64,
    total_travel_cost: f64,
    success_rate: f64,
    alloc_time_mean_s: f64,
    tasks_completed: usize,
    mean_global_reward: f64,
}

impl From<&MetricsRecord> for RunRow {
    fn from(r: &MetricsRecord) -> Self {
        RunRow {
            allocator: r.allocator,
            n_agents: r.n_agents,
            m_tasks: r.m_tasks,
            mode: r.mode,
            seed: r.seed,
            total_travel_cost: r.total_travel_cost,
            success_rate: r.success_rate,
            alloc_time_mean_s: r.alloc_time_mean_s,
            tasks_completed: r.tasks_completed,
            mean_global_reward: r.mean_global_reward,
        }
    }
}

/// Every run of a comparison, in (config, allocator, seed) order.
#[derive(Clone, Debug)]
pub struct TableReport {
    pub configs: Vec<ScenarioConfig>,
    pub allocators: Vec<AllocatorKind>,
    pub seeds: Vec<u64>,
    pub runs: Vec<MetricsRecord>,
}

/// Sample mean and standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl TableReport {
    pub fn runs_for(&self, config: usize, allocator: AllocatorKind) -> impl Iterator<Item = &MetricsRecord> {
        let per_config = self.allocators.len() * self.seeds.len();
        self.runs[config * per_config..(config + 1) * per_config]
            .iter()
            .filter(move |r| r.allocator == allocator)
    }

    pub fn cell(&self, config: usize, allocator: AllocatorKind, metric: fn(&MetricsRecord) -> f64) -> (f64, f64) {
        let values: Vec<f64> = self.runs_for(config, allocator).map(metric).collect();
        mean_std(&values)
    }

    pub fn write_runs_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for r in &self.runs {
            w.serialize(RunRow::from(r))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Allocators as rows, configs as columns in the given order, cells
    /// `mean ± std` over seeds.
    pub fn write_table(&self, path: &Path, metric: fn(&MetricsRecord) -> f64, precision: usize) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["allocator".to_string()];
        header.extend(self.configs.iter().map(|c| format!("N={}", c.n_agents())));
        w.write_record(&header)?;
        for &a in &self.allocators {
            let mut row = vec![a.to_string()];
            for c in 0..self.configs.len() {
                let (m, s) = self.cell(c, a, metric);
                row.push(format!("{m:.precision$} ± {s:.precision$}"));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// `runs.csv`, `table_cost.csv`, `table_success.csv` and
    /// `table_alloc_time.csv` under `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        self.write_runs_csv(&dir.join("runs.csv"))?;
        self.write_table(&dir.join("table_cost.csv"), |r| r.total_travel_cost, 3)?;
        self.write_table(&dir.join("table_success.csv"), |r| r.success_rate, 4)?;
        self.write_table(&dir.join("table_alloc_time.csv"), |r| r.alloc_time_mean_s, 9)?;
        Ok(())
    }
}

/// Runs every allocator on every config for every seed.
///
/// `models[c]` is the policy for `configs[c]`; it is required only when the
/// policy allocator is requested. Runs are sequential so timings do not
/// compete for cores.
pub fn compare_table(
    configs: &[ScenarioConfig],
    models: &[Option<TrainedModel>],
    allocators: &[AllocatorKind],
    seeds: &[u64],
    episodes: usize,
    rewards: &TrainConfig,
) -> Result<TableReport> {
    if models.len() != configs.len() {
        return Err(Error::config("one model slot per config is required"));
    }
    let mut runs = Vec::with_capacity(configs.len() * allocators.len() * seeds.len());
    for (config, model) in configs.iter().zip(models) {
        for &kind in allocators {
            let allocator = match kind {
                AllocatorKind::Policy => Allocator::Policy(model.as_ref().ok_or_else(|| {
                    Error::config(format!("policy allocator needs a model for N={}", config.n_agents()))
                })?),
                AllocatorKind::Hungarian => Allocator::Hungarian,
                AllocatorKind::Greedy => Allocator::Greedy,
                AllocatorKind::Random => Allocator::Random,
            };
            for &seed in seeds {
                runs.push(run_scenario(config, &allocator, episodes, seed, rewards)?);
            }
        }
    }
    Ok(TableReport {
        configs: configs.to_vec(),
        allocators: allocators.to_vec(),
        seeds: seeds.to_vec(),
        runs,
    })
}

/// Paired evaluation of the full model and the local-observation variant.
#[derive(Clone, Debug)]
pub struct AblationReport {
    pub full: MetricsRecord,
    pub ablated: MetricsRecord,
}

#[derive(Serialize)]
struct AblationRow {
    variant: &'static str,
    total_travel_cost: f64,
    success_rate: f64,
    alloc_time_mean_s: f64,
    tasks_completed: f64,
    mean_global_reward: f64,
}

impl AblationRow {
    fn of(variant: &'static str, r: &MetricsRecord) -> Self {
        AblationRow {
            variant,
            total_travel_cost: r.total_travel_cost,
            success_rate: r.success_rate,
            alloc_time_mean_s: r.alloc_time_mean_s,
            tasks_completed: r.tasks_completed as f64,
            mean_global_reward: r.mean_global_reward,
        }
    }
}

impl AblationReport {
    /// `ablated - full` for each metric.
    pub fn deltas(&self) -> [(&'static str, f64); 5] {
        let (a, f) = (&self.ablated, &self.full);
        [
            ("total_travel_cost", a.total_travel_cost - f.total_travel_cost),
            ("success_rate", a.success_rate - f.success_rate),
            ("alloc_time_mean_s", a.alloc_time_mean_s - f.alloc_time_mean_s),
            ("tasks_completed", a.tasks_completed as f64 - f.tasks_completed as f64),
            ("mean_global_reward", a.mean_global_reward - f.mean_global_reward),
        ]
    }

    /// Rows `full`, `no_graphsage` and `delta`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.serialize(AblationRow::of("full", &self.full))?;
        w.serialize(AblationRow::of("no_graphsage", &self.ablated))?;
        let d = self.deltas();
        w.serialize(AblationRow {
            variant: "delta",
            total_travel_cost: d[0].1,
            success_rate: d[1].1,
            alloc_time_mean_s: d[2].1,
            tasks_completed: d[3].1,
            mean_global_reward: d[4].1,
        })?;
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Evaluates two trained variants on identical episodes.
pub fn ablation_compare(
    config: &ScenarioConfig,
    full: &TrainedModel,
    ablated: &TrainedModel,
    episodes: usize,
    seed: u64,
    rewards: &TrainConfig,
) -> Result<AblationReport> {
    Ok(AblationReport {
        full: run_scenario(config, &Allocator::Policy(full), episodes, seed, rewards)?,
        ablated: run_scenario(config, &Allocator::Policy(ablated), episodes, seed, rewards)?,
    })
}

/// Trains the full model and a variant whose embedding sees only the
/// agent's own observation, with the same seed and budget, then compares
/// them on identical episodes.
pub fn ablation_no_graphsage(
    config: &ScenarioConfig,
    train_config: &TrainConfig,
    steps: u64,
    episodes: usize,
    seed: u64,
) -> Result<AblationReport> {
    let full_cfg = TrainConfig {
        embedding: EmbeddingMode::Sage,
        ..train_config.clone()
    };
    let local_cfg = TrainConfig {
        embedding: EmbeddingMode::Local,
        ..train_config.clone()
    };
    let full = train(&full_cfg, config, steps, seed)?.model;
    let ablated = train(&local_cfg, config, steps, seed)?.model;
    ablation_compare(config, &full, &ablated, episodes, seed, train_config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{AgentGroup, AgentKind};

    fn cfg(n: usize) -> ScenarioConfig {
        ScenarioConfig::new(
            [8, 8, 2],
            vec![AgentGroup { kind: AgentKind::Aerial, count: n }],
            3,
            TaskMode::Fixed,
        )
    }

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_cell_equals_run_scenario() {
        let tc = TrainConfig::default();
        let rep = compare_table(&[cfg(2)], &[None], &[AllocatorKind::Greedy], &[4], 2, &tc).unwrap();
        let direct = run_scenario(&cfg(2), &Allocator::Greedy, 2, 4, &tc).unwrap();
        assert_eq!(rep.runs.len(), 1);
        assert_eq!(rep.cell(0, AllocatorKind::Greedy, |r| r.total_travel_cost), (direct.total_travel_cost, 0.0));
    }

    #[test]
    fn tables_follow_config_order() {
        let tc = TrainConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let rep = compare_table(
            &[cfg(3), cfg(1), cfg(2)],
            &[None, None, None],
            &[AllocatorKind::Hungarian, AllocatorKind::Random],
            &[1, 2],
            1,
            &tc,
        )
        .unwrap();
        rep.write_all(dir.path()).unwrap();
        let table = std::fs::read_to_string(dir.path().join("table_cost.csv")).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next().unwrap(), "allocator,N=3,N=1,N=2");
        assert!(lines.next().unwrap().starts_with("hungarian,"));
        assert!(lines.next().unwrap().starts_with("random,"));
        let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(
            runs.lines().next().unwrap(),
            "allocator,n_agents,m_tasks,mode,seed,total_travel_cost,success_rate,alloc_time_mean_s,tasks_completed,mean_global_reward"
        );
        assert_eq!(runs.lines().count(), 1 + 3 * 2 * 2);
    }

    #[test]
    fn policy_without_model_is_rejected() {
        let tc = TrainConfig::default();
        let err = compare_table(&[cfg(2)], &[None], &[AllocatorKind::Policy], &[0], 1, &tc).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn self_comparison_has_zero_deltas() {
        let tc = TrainConfig { hidden: 8, ..Default::default() };
        let model = TrainedModel::init(2, 3, &tc, 1);
        let rep = ablation_compare(&cfg(2), &model, &model, 2, 3, &tc).unwrap();
        for (name, d) in rep.deltas() {
            if name != "alloc_time_mean_s" {
                assert_eq!(d, 0.0, "{name}");
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ablation.csv");
        rep.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let variants: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(variants, vec!["full", "no_graphsage", "delta"]);
    }
}

//! Command-line front end: `train`, `eval`, `bench` and `ablate`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{ablation_compare, ablation_no_graphsage, compare_table, AllocatorKind, TableReport};
use crate::error::{Error, Result};
use crate::ippo::{evaluate, train, CurveRow, TrainConfig, TrainedModel};
use crate::world::ScenarioConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SWARM_ALLOC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "swarm-alloc", version, about = "Decentralized multi-agent task allocation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one policy per agent and write checkpoint.json and curve.csv.
    Train(TrainArgs),
    /// Evaluate a checkpoint with greedy actions.
    Eval(EvalArgs),
    /// Compare allocators over seeds and agent counts.
    Bench(BenchArgs),
    /// Compare the full model against one without neighbor aggregation.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Scenario JSON, optionally with a "train" object.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Override a config value: `key=value`, dotted paths into the document
    /// (e.g. `dims.0=12`, `train.lr=1e-4`); a bare training key such as
    /// `gamma` means `train.gamma`. Repeatable, last one wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Environment steps.
    #[arg(long, default_value_t = 50_000)]
    pub steps: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub episodes: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma list of policy, hungarian, greedy, random.
    #[arg(long, default_value = "hungarian,greedy,random")]
    pub allocators: String,
    /// Inclusive range `a..b` or comma list.
    #[arg(long, default_value = "1..10")]
    pub seeds: String,
    /// Comma list of agent counts, one table column each; defaults to the
    /// config's own count.
    #[arg(long)]
    pub agent_counts: Option<String>,
    /// Policy checkpoints, matched to columns by agent and task count.
    #[arg(long)]
    pub checkpoint: Vec<PathBuf>,
    /// Training steps for columns without a matching checkpoint.
    #[arg(long, default_value_t = 50_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub episodes: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Two checkpoints, full model first; both are trained when omitted.
    #[arg(long, num_args = 2)]
    pub checkpoint: Vec<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 10)]
    pub episodes: usize,
}

/// Scenario and training configuration after overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub scenario: ScenarioConfig,
    pub train: TrainConfig,
    /// The full document, every default filled in.
    pub document: Value,
}

fn scenario_keys() -> Vec<String> {
    let doc = serde_json::to_value(ScenarioConfig::new([1, 1, 1], vec![], 1, Default::default()))
        .expect("scenario serializes");
    doc.as_object().expect("object").keys().cloned().collect()
}

/// Builds the configuration from a JSON document and `key=value` overrides.
pub fn resolve_config(text: &str, overrides: &[String]) -> Result<ResolvedConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| Error::config("config: top level must be an object"))?;
    let train_doc = obj.remove("train").unwrap_or_else(|| json!({}));
    let scenario: ScenarioConfig =
        serde_json::from_value(doc).map_err(|e| Error::config(format!("config: {e}")))?;
    let train: TrainConfig =
        serde_json::from_value(train_doc).map_err(|e| Error::config(format!("config.train: {e}")))?;

    let mut full = serde_json::to_value(&scenario)?;
    full["train"] = serde_json::to_value(&train)?;
    let top = scenario_keys();
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {o:?} is not key=value")))?;
        let key = key.trim();
        let first = key.split('.').next().unwrap_or_default();
        let path = if first == "train" || top.iter().any(|k| k == first) {
            key.to_string()
        } else {
            format!("train.{key}")
        };
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut full, &path, value).map_err(|_| Error::config(format!("unknown config key {key:?}")))?;
    }

    let mut scenario_doc = full.clone();
    let train_doc = scenario_doc
        .as_object_mut()
        .and_then(|o| o.remove("train"))
        .unwrap_or_default();
    let scenario: ScenarioConfig =
        serde_json::from_value(scenario_doc).map_err(|e| Error::config(format!("config: {e}")))?;
    let train: TrainConfig =
        serde_json::from_value(train_doc).map_err(|e| Error::config(format!("config.train: {e}")))?;
    scenario.validate()?;
    train.validate()?;
    Ok(ResolvedConfig {
        scenario,
        train,
        document: full,
    })
}

/// Replaces the value at an existing dotted path.
fn set_path(doc: &mut Value, path: &str, value: Value) -> std::result::Result<(), ()> {
    let mut cur = doc;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(m) => m.get_mut(seg).ok_or(())?,
            Value::Array(a) => a.get_mut(seg.parse::<usize>().map_err(|_| ())?).ok_or(())?,
            _ => return Err(()),
        };
    }
    *cur = value;
    Ok(())
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::config(format!("bad seed list {spec:?}"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let seeds = parse_list(spec).map_err(|_| bad())?;
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn parse_list<T: std::str::FromStr>(spec: &str) -> std::result::Result<Vec<T>, T::Err> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn parse_allocators(spec: &str) -> Result<Vec<AllocatorKind>> {
    let list: Vec<AllocatorKind> = parse_list(spec)?;
    if list.is_empty() {
        return Err(Error::config("no allocators given"));
    }
    Ok(list)
}

fn read_config(common: &CommonArgs) -> Result<ResolvedConfig> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", common.config.display())))?;
    resolve_config(&text, &common.overrides)
}

fn read_checkpoint(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read checkpoint {}: {e}", path.display())))?;
    TrainedModel::from_json(&text)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_curve(path: &Path, curve: &[CurveRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if curve.is_empty() {
        w.write_record([
            "iteration",
            "env_steps",
            "mean_reward",
            "mean_entropy",
            "mean_policy_loss",
            "mean_value_loss",
        ])?;
    }
    for row in curve {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_manifest(out: &Path, subcommand: &str, seed: u64, config: &ResolvedConfig, args: &impl Serialize, artifacts: &[String]) -> Result<()> {
    let manifest = json!({
        "version": VERSION,
        "subcommand": subcommand,
        "seed": seed,
        "config": config.document,
        "args": args,
        "artifacts": artifacts,
    });
    write(&out.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let cfg = read_config(&args.common)?;
    let out = &args.common.out;
    prepare_out(out)?;
    let result = train(&cfg.train, &cfg.scenario, args.steps, args.common.seed)?;
    write(&out.join("checkpoint.json"), &result.model.to_json()?)?;
    write_curve(&out.join("curve.csv"), &result.curve)?;
    let artifacts = ["checkpoint.json", "curve.csv"].map(String::from);
    write_manifest(out, "train", args.common.seed, &cfg, args, &artifacts)
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let cfg = read_config(&args.common)?;
    let model = read_checkpoint(&args.checkpoint)?;
    let out = &args.common.out;
    prepare_out(out)?;
    let record = evaluate(&model, &cfg.scenario, args.episodes, args.common.seed, &cfg.train)?;
    let report = TableReport {
        configs: vec![cfg.scenario.clone()],
        allocators: vec![AllocatorKind::Policy],
        seeds: vec![args.common.seed],
        runs: vec![record],
    };
    report.write_runs_csv(&out.join("runs.csv"))?;
    write_manifest(out, "eval", args.common.seed, &cfg, args, &["runs.csv".to_string()])
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let cfg = read_config(&args.common)?;
    let allocators = parse_allocators(&args.allocators)?;
    let seeds = parse_seeds(&args.seeds)?;
    let configs: Vec<ScenarioConfig> = match &args.agent_counts {
        Some(spec) => {
            let counts: Vec<usize> =
                parse_list(spec).map_err(|_| Error::config(format!("bad agent counts {spec:?}")))?;
            if counts.is_empty() || counts.contains(&0) {
                return Err(Error::config(format!("bad agent counts {spec:?}")));
            }
            counts.iter().map(|&n| cfg.scenario.with_agent_count(n)).collect()
        }
        None => vec![cfg.scenario.clone()],
    };
    let out = &args.common.out;
    prepare_out(out)?;
    let checkpoints = args
        .checkpoint
        .iter()
        .map(|p| read_checkpoint(p))
        .collect::<Result<Vec<_>>>()?;
    let mut artifacts = vec![];
    let mut models = Vec::with_capacity(configs.len());
    for config in &configs {
        if !allocators.contains(&AllocatorKind::Policy) {
            models.push(None);
            continue;
        }
        let (n, m) = (config.n_agents(), config.task_slots);
        let model = match checkpoints.iter().find(|c| c.check_shape(n, m).is_ok()) {
            Some(c) => c.clone(),
            None => {
                let model = train(&cfg.train, config, args.steps, args.common.seed)?.model;
                let name = format!("checkpoint_n{n}.json");
                write(&out.join(&name), &model.to_json()?)?;
                artifacts.push(name);
                model
            }
        };
        models.push(Some(model));
    }
    let report = compare_table(&configs, &models, &allocators, &seeds, args.episodes, &cfg.train)?;
    report.write_all(out)?;
    artifacts.extend(
        ["runs.csv", "table_cost.csv", "table_success.csv", "table_alloc_time.csv"].map(String::from),
    );
    write_manifest(out, "bench", args.common.seed, &cfg, args, &artifacts)
}

fn run_ablate(args: &AblateArgs) -> Result<()> {
    let cfg = read_config(&args.common)?;
    let out = &args.common.out;
    prepare_out(out)?;
    let seed = args.common.seed;
    let report = match args.checkpoint.as_slice() {
        [full, ablated] => {
            let full = read_checkpoint(full)?;
            let ablated = read_checkpoint(ablated)?;
            ablation_compare(&cfg.scenario, &full, &ablated, args.episodes, seed, &cfg.train)?
        }
        _ => ablation_no_graphsage(&cfg.scenario, &cfg.train, args.steps, args.episodes, seed)?,
    };
    report.write_csv(&out.join("ablation.csv"))?;
    write_manifest(out, "ablate", seed, &cfg, args, &["ablation.csv".to_string()])
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Train(a) => run_train(a),
        Command::Eval(a) => run_eval(a),
        Command::Bench(a) => run_bench(a),
        Command::Ablate(a) => run_ablate(a),
    }
}

/// Parses `argv`, runs the command and maps the outcome to an exit code:
/// 0 on success, 1 for configuration errors, 2 for runtime failures.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"dims": [6, 6, 2], "agents": [{"kind": "aerial", "count": 2}], "task_slots": 2}"#;

    #[test]
    fn defaults_fill_the_document() {
        let c = resolve_config(DOC, &[]).unwrap();
        assert_eq!(c.train, TrainConfig::default());
        assert_eq!(c.document["train"]["gamma"], 0.99);
        assert_eq!(c.document["episode_len"], 500);
    }

    #[test]
    fn overrides_apply_in_order() {
        let sets = ["gamma=0.9", "train.lr=0.001", "dims.0=9", "mode=fixed", "gamma=0.8"].map(String::from);
        let c = resolve_config(DOC, &sets).unwrap();
        assert_eq!(c.train.gamma, 0.8);
        assert_eq!(c.train.lr, 0.001);
        assert_eq!(c.scenario.dims, [9, 6, 2]);
        assert_eq!(c.scenario.mode, crate::world::TaskMode::Fixed);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        for s in ["gamma=2.0", "nonsense=1", "dims.7=3", "train.lr", "obstacle_density=0.9"] {
            let err = resolve_config(DOC, &[s.to_string()]).unwrap_err();
            assert!(err.is_config(), "{s}: {err}");
        }
    }

    #[test]
    fn missing_field_is_named() {
        let err = resolve_config(r#"{"dims": [4, 4, 1], "task_slots": 2}"#, &[]).unwrap_err();
        assert!(err.to_string().contains("agents"), "{err}");
        assert!(err.is_config());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("3, 5,9").unwrap(), vec![3, 5, 9]);
        for bad in ["", "5..2", "a..3", "1,x"] {
            assert!(parse_seeds(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn allocator_lists() {
        assert_eq!(
            parse_allocators("hungarian,random").unwrap(),
            vec![AllocatorKind::Hungarian, AllocatorKind::Random]
        );
        assert!(parse_allocators("hungarian,mappo").is_err());
    }
}

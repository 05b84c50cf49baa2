//! Seeded campaigns over strategies and knowledge conditions, the room-belief
//! policy map, and the turn-by-turn dialog session.

mod policy_map;
mod session;

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use policy_map::{policy_map, MapPoint};
pub use session::{DialogSession, Prompt, SessionError};

use crate::controller::{
    run_episode, ControlError, EpisodeTrace, ControllerConfig, DialogEnv, KnowledgeCondition, NavEnv, PolicyCache, SolverConfig, Strategy,
};
use crate::domains::dialog::TIMES;
use crate::domains::{DomainError, NavConfig, Scenario};
use crate::model::{ActionSpec, BuildOptions, DomainBundle, ModelError, SensedFacts};
use crate::planning::Belief;

pub const CSV_SCHEMA: &str = "icorpp-bench v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid campaign: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<KnowledgeCondition>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Fixed true time of day; `None` draws it uniformly per trial.
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub unavailable: Vec<String>,
    /// Facts behind the stationary model; `None` uses the task defaults.
    #[serde(default)]
    pub baseline: Option<SensedFacts>,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_conditions() -> Vec<KnowledgeCondition> {
    vec![KnowledgeCondition::All]
}

impl BenchConfig {
    pub fn new(strategies: Vec<Strategy>, trials: usize, seed: u64) -> Self {
        BenchConfig {
            strategies,
            conditions: default_conditions(),
            trials,
            seed,
            time: None,
            unavailable: Vec::new(),
            baseline: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub strategy: String,
    pub condition: String,
    pub trial: usize,
    pub seed: u64,
    pub requested: String,
    pub delivered: String,
    pub qa_cost: f64,
    pub success: bool,
    pub reward: f64,
    pub steps: usize,
    pub replans: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Stat {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Stat { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Stat { mean, stderr: (var / n).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub strategy: String,
    pub condition: String,
    pub trials: usize,
    pub cost: Stat,
    pub accuracy: Stat,
    pub reward: Stat,
    pub steps: Stat,
    pub replans: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

impl BenchResult {
    fn from_rows(rows: Vec<TrialRow>, cells: &[(String, String)]) -> Self {
        let aggregates = cells
            .iter()
            .map(|(s, c)| {
                let cell: Vec<&TrialRow> = rows.iter().filter(|r| &r.strategy == s && &r.condition == c).collect();
                Aggregate {
                    strategy: s.clone(),
                    condition: c.clone(),
                    trials: cell.len(),
                    cost: Stat::of(cell.iter().map(|r| r.qa_cost)),
                    accuracy: Stat::of(cell.iter().map(|r| f64::from(u8::from(r.success)))),
                    reward: Stat::of(cell.iter().map(|r| r.reward)),
                    steps: Stat::of(cell.iter().map(|r| r.steps as f64)),
                    replans: Stat::of(cell.iter().map(|r| r.replans as f64)),
                }
            })
            .collect();
        BenchResult { rows, aggregates }
    }

    pub fn aggregate(&self, strategy: &str, condition: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.strategy == strategy && a.condition == condition)
    }

    /// Schema line, trial rows, a blank line, then one aggregate row per cell.
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let csv_err = |e: csv::Error| BenchError::Csv(e.to_string());
        let mut rows = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            rows.serialize(r).map_err(csv_err)?;
        }
        let mut aggs = csv::Writer::from_writer(Vec::new());
        aggs.write_record([
            "strategy", "condition", "trials", "mean_cost", "stderr_cost", "accuracy", "stderr_accuracy", "mean_reward",
            "stderr_reward", "mean_steps", "stderr_steps", "mean_replans",
        ])
        .map_err(csv_err)?;
        for a in &self.aggregates {
            let f = |x: f64| format!("{x:.6}");
            aggs.write_record([
                a.strategy.clone(),
                a.condition.clone(),
                a.trials.to_string(),
                f(a.cost.mean),
                f(a.cost.stderr),
                f(a.accuracy.mean),
                f(a.accuracy.stderr),
                f(a.reward.mean),
                f(a.reward.stderr),
                f(a.steps.mean),
                f(a.steps.stderr),
                f(a.replans.mean),
            ])
            .map_err(csv_err)?;
        }
        let text = |w: csv::Writer<Vec<u8>>| -> Result<String, BenchError> {
            let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| BenchError::Csv(e.to_string()))
        };
        let mut out = String::new();
        let _ = writeln!(out, "# {CSV_SCHEMA}");
        out.push_str(&text(rows)?);
        out.push('\n');
        out.push_str(&text(aggs)?);
        Ok(out)
    }
}

/// The per-trial random stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub(crate) fn sample_index<R: Rng + ?Sized>(b: &Belief, rng: &mut R) -> usize {
    let mut u: f64 = rng.gen();
    let mut last = 0;
    for (i, p) in b.0.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        last = i;
        if u < *p {
            return i;
        }
        u -= p;
    }
    last
}

fn dialog_truth(time: &str, unavailable: &[String]) -> SensedFacts {
    SensedFacts::new()
        .with("curr_time", [format!("curr_time={time}")])
        .with("unavailable", unavailable.iter().map(|i| format!("unavailable({i})")))
}

pub fn run_benchmark(scenario: &Scenario, cfg: &BenchConfig) -> Result<BenchResult, BenchError> {
    if cfg.trials == 0 {
        return Err(BenchError::Config("at least one trial is required".into()));
    }
    if cfg.strategies.is_empty() || cfg.conditions.is_empty() {
        return Err(BenchError::Config("at least one strategy and one condition are required".into()));
    }
    let bundle = Arc::new(scenario.bundle()?);
    let cache = PolicyCache::new(bundle.clone(), cfg.solver.clone());
    let rows = match scenario {
        Scenario::Navigation(nav) => {
            let per_trial = crate::par_map(cfg.trials, |trial| nav_trial(nav, &cache, cfg, trial));
            flatten(per_trial)?
        }
        Scenario::Dialog(_) => {
            prepare_dialog(&cache, cfg)?;
            flatten(crate::par_map(cfg.trials, |trial| dialog_trial(&bundle, &cache, cfg, trial)))?
        }
    };
    let cells: Vec<(String, String)> = match scenario {
        Scenario::Navigation(_) => cfg.strategies.iter().map(|s| (s.to_string(), KnowledgeCondition::All.name().into())).collect(),
        Scenario::Dialog(_) => cfg
            .strategies
            .iter()
            .flat_map(|s| cfg.conditions.iter().map(move |c| (s.to_string(), c.name().to_string())))
            .collect(),
    };
    Ok(BenchResult::from_rows(rows, &cells))
}

fn controller_config(cfg: &BenchConfig, strategy: Strategy) -> ControllerConfig {
    ControllerConfig { baseline_facts: cfg.baseline.clone(), ..ControllerConfig::new(strategy, cfg.seed) }
}

type Trial = Result<Vec<(TrialRow, EpisodeTrace)>, BenchError>;

fn flatten(per_trial: Vec<Trial>) -> Result<Vec<TrialRow>, BenchError> {
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?.into_iter().map(|(row, _)| row));
    }
    Ok(rows)
}

/// One trial of a campaign with the episode traces kept, one per
/// (strategy, condition) cell.
pub fn simulate(scenario: &Scenario, cfg: &BenchConfig, trial: usize) -> Result<Vec<(TrialRow, EpisodeTrace)>, BenchError> {
    if cfg.strategies.is_empty() || cfg.conditions.is_empty() {
        return Err(BenchError::Config("at least one strategy and one condition are required".into()));
    }
    let bundle = Arc::new(scenario.bundle()?);
    let cache = PolicyCache::new(bundle.clone(), cfg.solver.clone());
    match scenario {
        Scenario::Navigation(nav) => nav_trial(nav, &cache, cfg, trial),
        Scenario::Dialog(_) => dialog_trial(&bundle, &cache, cfg, trial),
    }
}

fn nav_trial(nav: &NavConfig, cache: &PolicyCache, cfg: &BenchConfig, trial: usize) -> Trial {
    let mut out = Vec::new();
    for strategy in &cfg.strategies {
        let mut env = NavEnv::new(nav.clone());
        let mut rng = trial_rng(cfg.seed, trial);
        let ctl = controller_config(cfg, *strategy);
        let trace = run_episode(&mut env, &ctl, cache, &mut rng)?;
        let row = TrialRow {
            strategy: strategy.to_string(),
            condition: KnowledgeCondition::All.name().into(),
            trial,
            seed: cfg.seed,
            requested: String::new(),
            delivered: String::new(),
            qa_cost: 0.0,
            success: env.state.cell == nav.goal,
            reward: trace.total_reward,
            steps: trace.steps.len(),
            replans: trace.replans.len(),
        };
        out.push((row, trace));
    }
    Ok(out)
}

fn trial_times(cfg: &BenchConfig) -> Result<Vec<String>, BenchError> {
    Ok(match &cfg.time {
        Some(t) if TIMES.contains(&t.as_str()) => vec![t.clone()],
        Some(t) => return Err(BenchError::Config(format!("unknown time `{t}`"))),
        None => TIMES.iter().map(|t| t.to_string()).collect(),
    })
}

/// Solves every model the trials can need before fanning out.
fn prepare_dialog(cache: &PolicyCache, cfg: &BenchConfig) -> Result<(), BenchError> {
    let times = trial_times(cfg)?;
    for time in &times {
        let truth = dialog_truth(time, &cfg.unavailable);
        cache.get(&truth, BuildOptions::FULL, false)?;
        for s in &cfg.strategies {
            for c in &cfg.conditions {
                let sensed = match s {
                    Strategy::Stationary => cfg.baseline.clone().unwrap_or_default(),
                    _ => c.apply(&truth),
                };
                cache.get(&sensed, s.build_options(), !matches!(s, Strategy::ReasoningOnly | Strategy::Defined { .. }))?;
            }
        }
    }
    Ok(())
}

fn dialog_trial(bundle: &DomainBundle, cache: &PolicyCache, cfg: &BenchConfig, trial: usize) -> Trial {
    let ActionSpec::Dialog { dims } = &bundle.task.actions else {
        return Err(BenchError::Config("dialog scenario without dialog actions".into()));
    };
    let times = trial_times(cfg)?;
    let mut rng = trial_rng(cfg.seed, trial);
    let time = &times[rng.gen_range(0..times.len())];
    let truth = dialog_truth(time, &cfg.unavailable);
    let truth_model = cache.get(&truth, BuildOptions::FULL, false)?;
    let m = &truth_model.model;
    let prior = m.pomdp().map(|p| p.prior.clone()).ok_or_else(|| BenchError::Config("dialog model is not partially observable".into()))?;
    let s = sample_index(&prior, &mut rng);
    let request = dims
        .iter()
        .map(|d| m.space.value_of(s, &d.attr).map(String::from))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| BenchError::Config("request dimensions are not state variables".into()))?;

    let mut out = Vec::new();
    for strategy in &cfg.strategies {
        for condition in &cfg.conditions {
            let mut env = DialogEnv::new(bundle, request.clone(), truth.clone(), *condition)?;
            let mut ep_rng = rng.clone();
            let trace = run_episode(&mut env, &controller_config(cfg, *strategy), cache, &mut ep_rng)?;
            let o = env.outcome();
            let row = TrialRow {
                strategy: strategy.to_string(),
                condition: condition.name().into(),
                trial,
                seed: cfg.seed,
                requested: request.join("_"),
                delivered: o.delivered.as_ref().map(|d| d.join("_")).unwrap_or_default(),
                qa_cost: o.question_cost,
                success: o.correct(),
                reward: trace.total_reward,
                steps: trace.steps.len(),
                replans: trace.replans.len(),
            };
            out.push((row, trace));
        }
    }
    Ok(out)
}


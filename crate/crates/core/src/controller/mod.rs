//! The sense, reason, plan, act loop with consistency monitoring.

mod env;
mod trace;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use env::{DialogEnv, DialogOutcome, Environment, KnowledgeCondition, NavEnv, StepOutcome, WorldEvent};
pub use trace::{EpisodeTrace, ReplanEvent, StepRecord, TRACE_SCHEMA};

use crate::domains::dialog::DialogAction;
use crate::domains::DomainError;
use crate::model::{build_model, check_consistency, ActionSpec, DialogDim, BuildOptions, DecisionModel, DomainBundle, FactKey, ModelError, SensedFacts};
use crate::planning::{belief_update, pbvi_solve, value_iteration, Belief, PbviConfig, PlanError, Policy, ViConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("step {step}: {source}")]
    Model { step: usize, source: ModelError },
    #[error("step {step}: {source}")]
    Plan { step: usize, source: PlanError },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("step {step}: {message}")]
    Episode { step: usize, message: String },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

/// Which questions a fixed-schedule policy may ask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefinedKind {
    /// Open questions only.
    Open,
    /// Confirmations only.
    Confirm,
    /// Both.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    /// Reason, plan, and rebuild whenever sensing invalidates the world set.
    Icorpp,
    /// Reason and plan once per episode; never rebuild.
    Corpp,
    /// One model from the baseline facts for every episode.
    Stationary,
    /// Logically filtered states, uniform prior.
    LrPp,
    /// Unfiltered states, uniform prior.
    PpOnly,
    /// Deliver the most likely request under the reasoned prior, no questions.
    ReasoningOnly,
    /// Fixed rounds of questions, then the most likely request.
    Defined { kind: DefinedKind, rounds: u32, filtered: bool },
}

impl Strategy {
    pub fn build_options(&self) -> BuildOptions {
        match self {
            Strategy::Icorpp | Strategy::Corpp | Strategy::Stationary | Strategy::ReasoningOnly => BuildOptions::FULL,
            Strategy::LrPp => BuildOptions::FILTER_ONLY,
            Strategy::PpOnly => BuildOptions::NONE,
            Strategy::Defined { filtered, .. } => {
                if *filtered {
                    BuildOptions::FILTER_ONLY
                } else {
                    BuildOptions::NONE
                }
            }
        }
    }

    fn needs_policy(&self) -> bool {
        !matches!(self, Strategy::ReasoningOnly | Strategy::Defined { .. })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Icorpp => f.write_str("icorpp"),
            Strategy::Corpp => f.write_str("corpp"),
            Strategy::Stationary => f.write_str("stationary"),
            Strategy::LrPp => f.write_str("lr+pp"),
            Strategy::PpOnly => f.write_str("pp-only"),
            Strategy::ReasoningOnly => f.write_str("reasoning-only"),
            Strategy::Defined { kind, rounds, filtered } => {
                let k = match kind {
                    DefinedKind::Open => 1,
                    DefinedKind::Confirm => 2,
                    DefinedKind::All => 3,
                };
                write!(f, "{}defined-{k}@{rounds}", if *filtered { "lr-" } else { "" })
            }
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = ControlError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

impl FromStr for Strategy {
    type Err = ControlError;

    /// Names as printed by `Display`; `defined-K` means one round.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ControlError::UnknownStrategy(s.to_string());
        Ok(match s.to_ascii_lowercase().as_str() {
            "icorpp" => Strategy::Icorpp,
            "corpp" => Strategy::Corpp,
            "stationary" => Strategy::Stationary,
            "lr+pp" | "lr-pp" => Strategy::LrPp,
            "pp-only" | "pp" => Strategy::PpOnly,
            "reasoning-only" => Strategy::ReasoningOnly,
            other => {
                let (filtered, rest) = match other.strip_prefix("lr-") {
                    Some(r) => (true, r),
                    None => (false, other),
                };
                let rest = rest.strip_prefix("defined-").ok_or_else(unknown)?;
                let (k, rounds) = rest.split_once('@').unwrap_or((rest, "1"));
                let kind = match k {
                    "1" => DefinedKind::Open,
                    "2" => DefinedKind::Confirm,
                    "3" => DefinedKind::All,
                    _ => return Err(unknown()),
                };
                let rounds: u32 = rounds.parse().ok().filter(|r| *r >= 1).ok_or_else(unknown)?;
                Strategy::Defined { kind, rounds, filtered }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub vi: ViConfig,
    pub pbvi: PbviConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { vi: ViConfig::default(), pbvi: PbviConfig { belief_budget: 200, horizon_budget: 90, ..PbviConfig::default() } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub strategy: Strategy,
    pub replan_on_inconsistency: bool,
    pub seed: u64,
    pub max_steps: usize,
    /// Facts behind the stationary model; `None` uses the task defaults.
    #[serde(default)]
    pub baseline_facts: Option<SensedFacts>,
}

impl ControllerConfig {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        ControllerConfig { strategy, replan_on_inconsistency: true, seed, max_steps: 500, baseline_facts: None }
    }
}

/// A model with its solved policy, if the strategy needs one.
#[derive(Debug)]
pub struct Planned {
    pub model: DecisionModel,
    pub policy: Option<Policy>,
}

impl Planned {
    pub fn short_id(&self) -> String {
        self.model.hash[..12].to_string()
    }
}

type CacheKey = (FactKey, BuildOptions, bool);

#[derive(Default)]
struct Entries {
    by_facts: HashMap<CacheKey, Arc<Planned>>,
    by_model: HashMap<(String, bool), Arc<Planned>>,
}

/// Models and policies per fact set; fact sets that yield the same model
/// share one solve. Entries are built outside the lock, so concurrent misses
/// may duplicate work but never block each other.
pub struct PolicyCache {
    bundle: Arc<DomainBundle>,
    solver: SolverConfig,
    entries: Mutex<Entries>,
}

impl PolicyCache {
    pub fn new(bundle: Arc<DomainBundle>, solver: SolverConfig) -> Self {
        PolicyCache { bundle, solver, entries: Mutex::new(Entries::default()) }
    }

    pub fn bundle(&self) -> &Arc<DomainBundle> {
        &self.bundle
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").by_facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, sensed: &SensedFacts, opts: BuildOptions, solve: bool) -> Result<Arc<Planned>, ModelError> {
        let key = self.bundle.task.effective_facts(sensed)?;
        let ck = (key, opts, solve);
        if let Some(p) = self.entries.lock().expect("cache lock").by_facts.get(&ck) {
            return Ok(p.clone());
        }
        let model = build_model(&self.bundle, sensed, opts)?;
        let mk = (model.hash.clone(), solve);
        let shared = self.entries.lock().expect("cache lock").by_model.get(&mk).cloned();
        let planned = match shared {
            Some(p) => p,
            None => {
                let policy = if solve { Some(solve_model(&model, &self.solver)?) } else { None };
                Arc::new(Planned { model, policy })
            }
        };
        let mut entries = self.entries.lock().expect("cache lock");
        let planned = entries.by_model.entry(mk).or_insert(planned).clone();
        Ok(entries.by_facts.entry(ck).or_insert(planned).clone())
    }
}

pub fn solve_model(model: &DecisionModel, solver: &SolverConfig) -> Result<Policy, ModelError> {
    Ok(match model.pomdp() {
        None => Policy::Mdp(value_iteration(model.mdp(), solver.vi)?.policy),
        Some(p) => Policy::Alpha(pbvi_solve(p, &solver.pbvi)?),
    })
}

struct Tracker {
    planned: Arc<Planned>,
    belief: Option<Belief>,
    schedule: Vec<usize>,
    dims: Vec<DialogDim>,
}

impl Tracker {
    fn new(planned: Arc<Planned>, strategy: &Strategy, dims: Vec<DialogDim>) -> Self {
        let belief = planned.model.pomdp().map(|p| p.prior.clone());
        let schedule = match strategy {
            Strategy::Defined { kind, rounds, .. } => {
                let once: Vec<usize> = planned
                    .model
                    .actions
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| match kind {
                        DefinedKind::Open => a.starts_with("ask_"),
                        DefinedKind::Confirm => a.starts_with("conf_"),
                        DefinedKind::All => a.starts_with("ask_") || a.starts_with("conf_"),
                    })
                    .map(|(i, _)| i)
                    .collect();
                (0..*rounds).flat_map(|_| once.iter().copied()).rev().collect()
            }
            _ => Vec::new(),
        };
        Tracker { planned, belief, schedule, dims }
    }

    /// Carries the belief over to a rebuilt model by matching state labels.
    fn replace(&mut self, planned: Arc<Planned>) {
        if let (Some(old), Some(p)) = (&self.belief, planned.model.pomdp()) {
            let mut b = vec![0.0; p.states()];
            for (s, w) in planned.model.space.worlds.iter().enumerate() {
                if let Some(t) = self.planned.model.space.index_of(w) {
                    b[s] = old.0[t];
                }
            }
            let total: f64 = b.iter().sum();
            self.belief = Some(if total > 0.0 { Belief(b.iter().map(|x| x / total).collect()) } else { p.prior.clone() });
        }
        self.planned = planned;
    }

    fn choose(&mut self, strategy: &Strategy, state: Option<&[String]>, step: usize) -> Result<usize, ControlError> {
        let model = &self.planned.model;
        let fail = |message: String| ControlError::Episode { step, message };
        match (strategy, &self.planned.policy) {
            (Strategy::Defined { .. } | Strategy::ReasoningOnly, _) => {
                if let Some(a) = self.schedule.pop() {
                    return Ok(a);
                }
                let b = self.belief.as_ref().ok_or_else(|| fail("fixed schedules need a belief".into()))?;
                let n = model.space.worlds.len();
                let (s, _) = crate::planning::argmax((0..n).map(|s| b.0[s]));
                let vals = self
                    .dims
                    .iter()
                    .map(|d| model.space.var_index(&d.attr).map(|i| model.space.worlds[s][i].clone()))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| fail("delivery dimensions are not state variables".into()))?;
                let label = DialogAction::Deliver(vals).label(&self.dims);
                model.action_index(&label).ok_or_else(|| fail(format!("no delivery action `{label}`")))
            }
            (_, Some(Policy::Mdp(p))) => {
                let vals = state.ok_or_else(|| fail("MDP control needs an observable state".into()))?;
                let s = model.space.index_of(vals).ok_or_else(|| fail(format!("state {vals:?} is outside the model")))?;
                Ok(p.action(s))
            }
            (_, Some(Policy::Alpha(p))) => {
                let pomdp = model.pomdp().ok_or_else(|| fail("alpha policy on a fully observable model".into()))?;
                Ok(p.lookahead_action(pomdp, self.belief.as_ref().expect("POMDP has a belief")))
            }
            (_, None) => Err(fail("no policy".into())),
        }
    }

    fn observe(&mut self, a: usize, label: Option<&str>, step: usize) -> Result<(), ControlError> {
        let (Some(b), Some(p), Some(label)) = (&self.belief, self.planned.model.pomdp(), label) else { return Ok(()) };
        let o = self
            .planned
            .model
            .observation_index(label)
            .ok_or_else(|| ControlError::Episode { step, message: format!("observation `{label}` unknown to the model") })?;
        self.belief = Some(belief_update(p, b, a, o).map_err(|source| ControlError::Plan { step, source })?);
        Ok(())
    }
}

fn diff(old: &FactKey, new: &FactKey) -> (Vec<String>, Vec<String>) {
    let a: BTreeSet<&String> = old.0.iter().collect();
    let b: BTreeSet<&String> = new.0.iter().collect();
    (b.difference(&a).map(|s| s.to_string()).collect(), a.difference(&b).map(|s| s.to_string()).collect())
}

/// Runs one episode.
pub fn run_episode(
    env: &mut dyn Environment,
    cfg: &ControllerConfig,
    cache: &PolicyCache,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeTrace, ControlError> {
    let strategy = cfg.strategy;
    let opts = strategy.build_options();
    let solve = strategy.needs_policy();
    let bundle = cache.bundle().clone();
    let model_err = |step: usize| move |source: ModelError| ControlError::Model { step, source };

    let initial = match strategy {
        Strategy::Stationary => cfg.baseline_facts.clone().unwrap_or_default(),
        _ => env.sense(),
    };
    let planned = cache.get(&initial, opts, solve).map_err(model_err(0))?;
    let mut trace = EpisodeTrace::new(&strategy.to_string(), cfg.seed);
    trace.models.push(planned.short_id());
    let mut key = bundle.task.effective_facts(&env.sense()).map_err(model_err(0))?;
    let dims = match &bundle.task.actions {
        ActionSpec::Dialog { dims } => dims.clone(),
        ActionSpec::List { .. } => Vec::new(),
    };
    let mut tracker = Tracker::new(planned, &strategy, dims);
    let adaptive = strategy == Strategy::Icorpp && cfg.replan_on_inconsistency;

    let mut step = 0;
    while !env.done() {
        if step >= cfg.max_steps {
            trace.truncated = true;
            break;
        }
        let state = env.observe_state();
        let a = tracker.choose(&strategy, state.as_deref(), step)?;
        let label = tracker.planned.model.actions[a].clone();
        let out = env.step(&label, rng)?;
        tracker.observe(a, out.observation.as_deref(), step)?;
        trace.steps.push(StepRecord {
            step,
            facts: key.0.clone(),
            model: tracker.planned.short_id(),
            action: label,
            observation: out.observation,
            reward: out.reward,
        });
        step += 1;
        if env.done() {
            break;
        }

        let sensed = env.sense();
        let now = bundle.task.effective_facts(&sensed).map_err(model_err(step))?;
        if now == key {
            continue;
        }
        if adaptive && !check_consistency(&bundle, &now, &tracker.planned.model.space) {
            trace.inconsistencies += 1;
            let (added, removed) = diff(&key, &now);
            let fresh = cache.get(&sensed, opts, solve).map_err(model_err(step))?;
            trace.replans.push(ReplanEvent {
                step,
                added,
                removed,
                from_model: tracker.planned.short_id(),
                to_model: fresh.short_id(),
            });
            trace.models.push(fresh.short_id());
            tracker.replace(fresh);
        }
        key = now;
    }
    trace.terminal = env.done();
    trace.total_reward = trace.steps.iter().map(|s| s.reward).sum();
    Ok(trace)
}

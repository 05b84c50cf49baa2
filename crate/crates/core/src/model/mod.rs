//! Model construction: a state space from logical reasoning, a prior from
//! probabilistic reasoning, dynamics from causal queries, then assembly into
//! an MDP or POMDP.

mod assemble;
mod bundle;
mod reason;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble_model, DecisionModel, ModelKind, ModelView, ObservationBuilder, RewardBuilder};
pub use bundle::{ActionSpec, DialogDim, DomainBundle, FactKey, SensedFacts, TaskSpec, TermMode, VariablePartition};
pub use reason::{
    check_consistency, dyn_reason, dyn_reason_naive, log_reason, log_reason_unfiltered, prob_reason, prob_reason_naive,
    StateSpace,
};

use crate::domains;
use crate::planning::{Belief, PlanError};
use crate::plog::PlogError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Plog(#[from] PlogError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("task: {0}")]
    Task(String),
    #[error("`{0}` is not an exogenous attribute")]
    NotExogenous(String),
    #[error("relevant attribute `{0}` is undefined in some possible world")]
    UndefinedRelevant(String),
    #[error("relevant attribute `{0}` has no admissible value")]
    EmptyRelevant(String),
    #[error("the prior gives zero mass to every state")]
    ZeroPrior,
    #[error("no successor for state `{state}` under `{action}`")]
    EmptyRow { state: String, action: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Which reasoning stages feed a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Restrict the state space to logically possible assignments.
    pub filter: bool,
    /// Use the reasoned prior instead of a uniform one.
    pub reasoned_prior: bool,
}

impl BuildOptions {
    pub const FULL: BuildOptions = BuildOptions { filter: true, reasoned_prior: true };
    pub const FILTER_ONLY: BuildOptions = BuildOptions { filter: true, reasoned_prior: false };
    pub const NONE: BuildOptions = BuildOptions { filter: false, reasoned_prior: false };
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self::FULL
    }
}

/// Action labels for a state space.
pub fn resolve_actions(task: &TaskSpec, space: &StateSpace) -> Result<Vec<String>> {
    match &task.actions {
        ActionSpec::List { values } => Ok(values.clone()),
        ActionSpec::Dialog { dims } => {
            Ok(domains::dialog::dialog_actions(dims, space)?.into_iter().map(|(label, _)| label).collect())
        }
    }
}

/// Runs every stage for one fact set and assembles the result.
pub fn build_model(bundle: &DomainBundle, sensed: &SensedFacts, opts: BuildOptions) -> Result<DecisionModel> {
    let task = &bundle.task;
    task.validate()?;
    let key = task.effective_facts(sensed)?;
    let space = if opts.filter { log_reason(bundle, &key)? } else { log_reason_unfiltered(bundle, &key)? };
    let actions = resolve_actions(task, &space)?;
    let transitions = dyn_reason(bundle, &key, &space, &actions)?;
    let observation = task.observation.as_ref().map(|o| domains::observation_builder(task, o)).transpose()?;
    let prior = match (&observation, opts.reasoned_prior) {
        (Some(_), true) => Some(prob_reason(bundle, &key, &space)?),
        (Some(_), false) => Some(Belief::uniform(space.worlds.len())),
        (None, _) => None,
    };
    let reward = domains::reward_builder(task)?;
    assemble_model(space, actions, transitions, prior, task.discount, reward.as_ref(), observation.as_deref())
}

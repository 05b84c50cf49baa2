//! The two benchmark environments: grid navigation under sunlight and a
//! walker, and a delivery-request dialog. Each provides a knowledge bundle,
//! host-coded reward and observation builders, and a ground-truth simulator.

pub mod dialog;
pub mod navigation;
pub mod ontology;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dialog::{delivery_reward, dialog_observe, DeliverySetting, DialogAction, DialogConfig, DialogSensor, ItemPrior, Person, Role};
pub use navigation::{navigation_step, Cell, NavConfig, NavState, NavWorld, Walker};
pub use ontology::{item_closeness, room_closeness, Ontology};

use crate::model::{ActionSpec, ModelError, ObservationBuilder, RewardBuilder, TaskSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("`{0}` is a delivery; deliveries are not answered")]
    NotAQuestion(String),
}

impl From<DomainError> for ModelError {
    fn from(e: DomainError) -> Self {
        ModelError::Task(e.to_string())
    }
}

/// How a delivery is scored against the request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeliveryScheme {
    /// `correct` on an exact match, `-wrong` otherwise.
    Flat { correct: f64, wrong: f64 },
    /// `r_plus` on an exact match, otherwise `r_minus` scaled down by how
    /// close the delivery was.
    Closeness { r_plus: f64, r_minus: f64, ontology: Ontology, distances: BTreeMap<String, f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum RewardSpec {
    Navigation { goal: BTreeMap<String, String>, goal_reward: f64, fail_penalty: f64, step_cost: f64 },
    Dialog { ask_cost: f64, confirm_cost: f64, delivery: DeliveryScheme },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationSpec {
    Dialog {
        confirm_accuracy: f64,
        /// Overrides the size-dependent accuracy of open questions.
        #[serde(default)]
        wh_accuracy: Option<f64>,
        /// Recognizable answers per dimension.
        vocabulary: Vec<Vec<String>>,
    },
}

pub fn reward_builder(task: &TaskSpec) -> Result<Box<dyn RewardBuilder>, ModelError> {
    match (&task.reward, &task.actions) {
        (RewardSpec::Navigation { .. }, _) => Ok(Box::new(navigation::NavReward::new(task)?)),
        (RewardSpec::Dialog { .. }, ActionSpec::Dialog { dims }) => Ok(Box::new(dialog::DialogReward::new(task, dims)?)),
        _ => Err(ModelError::Task("dialog rewards need dialog actions".into())),
    }
}

pub fn observation_builder(task: &TaskSpec, spec: &ObservationSpec) -> Result<Box<dyn ObservationBuilder>, ModelError> {
    match (spec, &task.actions) {
        (ObservationSpec::Dialog { .. }, ActionSpec::Dialog { dims }) => {
            Ok(Box::new(dialog::DialogSensor::new(spec, dims)?))
        }
        _ => Err(ModelError::Task("dialog observations need dialog actions".into())),
    }
}

/// A named, fully configured environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum Scenario {
    Navigation(NavConfig),
    Dialog(DialogConfig),
}

pub const PRESETS: [&str; 6] =
    ["nav-paper", "dialog-paper-small", "dialog-paper-full", "dialog-tuning", "dialog-fig11", "dialog-five-persons"];

pub fn preset(name: &str) -> Result<Scenario, DomainError> {
    Ok(match name {
        "nav-paper" => Scenario::Navigation(NavConfig::paper()),
        "dialog-paper-small" => Scenario::Dialog(DialogConfig::paper_small()),
        "dialog-paper-full" => Scenario::Dialog(DialogConfig::paper_full()),
        "dialog-tuning" => Scenario::Dialog(DialogConfig::tuning()),
        "dialog-fig11" => Scenario::Dialog(DialogConfig::illustrative()),
        "dialog-five-persons" => Scenario::Dialog(DialogConfig::five_persons()),
        other => return Err(DomainError::UnknownPreset(other.to_string())),
    })
}

impl Scenario {
    pub fn bundle(&self) -> Result<crate::model::DomainBundle, DomainError> {
        match self {
            Scenario::Navigation(c) => navigation::build_navigation_domain(c),
            Scenario::Dialog(c) => dialog::build_dialog_domain(c),
        }
    }
}

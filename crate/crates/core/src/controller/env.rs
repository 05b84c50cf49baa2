use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::domains::dialog::TIMES;
use crate::domains::{delivery_reward, dialog_observe, navigation_step, Cell, DeliveryScheme, DialogAction, DialogSensor, NavConfig, NavState, NavWorld, RewardSpec};
use crate::model::{DomainBundle, SensedFacts};

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub observation: Option<String>,
}

/// The world as the controller sees it.
pub trait Environment {
    /// Exogenous facts currently available to the robot.
    fn sense(&self) -> SensedFacts;
    /// Relevant attribute values when the state is fully observable.
    fn observe_state(&self) -> Option<Vec<String>>;
    fn step(&mut self, action: &str, rng: &mut ChaCha8Rng) -> Result<StepOutcome, ControlError>;
    fn done(&self) -> bool;
}

/// A scheduled change to the navigation world, applied after the given step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WorldEvent {
    Time(String),
    Weather(String),
    Shade(Cell),
}

#[derive(Debug, Clone)]
pub struct NavEnv {
    pub world: NavWorld,
    pub state: NavState,
    events: Vec<(usize, WorldEvent)>,
}

impl NavEnv {
    pub fn new(cfg: NavConfig) -> Self {
        let world = NavWorld::new(cfg);
        NavEnv { state: world.start(), world, events: Vec::new() }
    }

    pub fn with_event(mut self, after_step: usize, event: WorldEvent) -> Self {
        self.events.push((after_step, event));
        self
    }
}

impl Environment for NavEnv {
    fn sense(&self) -> SensedFacts {
        self.world.sense()
    }

    fn observe_state(&self) -> Option<Vec<String>> {
        Some(self.state.values())
    }

    fn step(&mut self, action: &str, rng: &mut ChaCha8Rng) -> Result<StepOutcome, ControlError> {
        let (next, reward) = navigation_step(&self.world, self.state, action, rng);
        self.state = next;
        self.world.step += 1;
        let now = self.world.step;
        for (_, ev) in self.events.iter().filter(|(t, _)| *t + 1 == now) {
            match ev {
                WorldEvent::Time(t) => self.world.time = t.clone(),
                WorldEvent::Weather(w) => self.world.weather = w.clone(),
                WorldEvent::Shade(c) => {
                    self.world.shaded.insert(*c);
                }
            }
        }
        Ok(StepOutcome { reward, observation: None })
    }

    fn done(&self) -> bool {
        self.world.done(&self.state)
    }
}

/// How much of the true context reaches the robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeCondition {
    All,
    /// The time of day is withheld.
    Limited,
    /// The time of day is reported as the following period.
    Inaccurate,
}

impl KnowledgeCondition {
    pub const ALL: [KnowledgeCondition; 3] = [KnowledgeCondition::All, KnowledgeCondition::Limited, KnowledgeCondition::Inaccurate];

    pub fn name(&self) -> &'static str {
        match self {
            KnowledgeCondition::All => "all",
            KnowledgeCondition::Limited => "limited",
            KnowledgeCondition::Inaccurate => "inaccurate",
        }
    }

    pub fn apply(&self, truth: &SensedFacts) -> SensedFacts {
        let mut out = truth.clone();
        match self {
            KnowledgeCondition::All => {}
            KnowledgeCondition::Limited => out.remove("curr_time"),
            KnowledgeCondition::Inaccurate => {
                if let Some(lits) = truth.0.get("curr_time") {
                    let shifted: Vec<String> = lits
                        .iter()
                        .map(|l| match l.strip_prefix("curr_time=").and_then(|t| TIMES.iter().position(|x| *x == t)) {
                            Some(i) => format!("curr_time={}", TIMES[(i + 1) % TIMES.len()]),
                            None => l.clone(),
                        })
                        .collect();
                    out.set("curr_time", shifted);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogOutcome {
    pub request: Vec<String>,
    pub delivered: Option<Vec<String>>,
    pub questions: usize,
    pub question_cost: f64,
}

impl DialogOutcome {
    pub fn correct(&self) -> bool {
        self.delivered.as_ref() == Some(&self.request)
    }
}

/// A simulated requester with a hidden request.
#[derive(Debug, Clone)]
pub struct DialogEnv {
    sensor: DialogSensor,
    scheme: DeliveryScheme,
    ask_cost: f64,
    confirm_cost: f64,
    truth: SensedFacts,
    condition: KnowledgeCondition,
    outcome: DialogOutcome,
}

impl DialogEnv {
    pub fn new(bundle: &DomainBundle, request: Vec<String>, truth: SensedFacts, condition: KnowledgeCondition) -> Result<Self, ControlError> {
        let sensor = DialogSensor::from_task(&bundle.task).map_err(|source| ControlError::Model { step: 0, source })?;
        let RewardSpec::Dialog { ask_cost, confirm_cost, delivery } = &bundle.task.reward else {
            return Err(ControlError::Episode { step: 0, message: "not a dialog task".into() });
        };
        if request.len() != sensor.dims.len() {
            return Err(ControlError::Episode { step: 0, message: format!("request {request:?} has the wrong arity") });
        }
        Ok(DialogEnv {
            sensor,
            scheme: delivery.clone(),
            ask_cost: *ask_cost,
            confirm_cost: *confirm_cost,
            truth,
            condition,
            outcome: DialogOutcome { request, delivered: None, questions: 0, question_cost: 0.0 },
        })
    }

    pub fn outcome(&self) -> &DialogOutcome {
        &self.outcome
    }
}

impl Environment for DialogEnv {
    fn sense(&self) -> SensedFacts {
        self.condition.apply(&self.truth)
    }

    fn observe_state(&self) -> Option<Vec<String>> {
        None
    }

    fn step(&mut self, action: &str, rng: &mut ChaCha8Rng) -> Result<StepOutcome, ControlError> {
        let act = self
            .sensor
            .parse(action)
            .ok_or_else(|| ControlError::Episode { step: self.outcome.questions, message: format!("unknown action `{action}`") })?;
        let out = &mut self.outcome;
        match &act {
            DialogAction::Deliver(vals) => {
                let reward = delivery_reward(&self.scheme, &self.sensor.dims, &out.request, vals)?;
                out.delivered = Some(vals.clone());
                Ok(StepOutcome { reward, observation: None })
            }
            question => {
                let cost = if matches!(question, DialogAction::Ask(_)) { self.ask_cost } else { self.confirm_cost };
                out.questions += 1;
                out.question_cost += cost;
                let answer = dialog_observe(&self.sensor, &out.request, question, rng)?;
                Ok(StepOutcome { reward: -cost, observation: Some(answer) })
            }
        }
    }

    fn done(&self) -> bool {
        self.outcome.delivered.is_some()
    }
}

use thiserror::Error;

use super::BenchError;
use crate::controller::{solve_model, SolverConfig};
use crate::domains::dialog::{DialogAction, DialogSensor};
use crate::model::{build_model, BuildOptions, DecisionModel, DomainBundle, SensedFacts};
use crate::planning::{belief_update, AlphaVectorPolicy, Belief, Policy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("no answer given")]
    Empty,
    #[error("`{answer}` does not answer `{question}`; expected one of {expected:?}")]
    Unrecognized { answer: String, question: String, expected: Vec<String> },
    #[error("the session has ended with a delivery")]
    Finished,
    #[error("the answer contradicts every remaining request")]
    Impossible,
}

/// What the robot does next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prompt {
    Ask(String),
    Deliver(String),
}

/// A dialog driven by typed answers instead of a simulated user.
pub struct DialogSession {
    model: DecisionModel,
    policy: AlphaVectorPolicy,
    sensor: DialogSensor,
    belief: Belief,
    turns: usize,
}

impl DialogSession {
    pub fn new(bundle: &DomainBundle, sensed: &SensedFacts, opts: BuildOptions, solver: &SolverConfig) -> Result<Self, BenchError> {
        let model = build_model(bundle, sensed, opts)?;
        let sensor = DialogSensor::from_task(&bundle.task)?;
        let Policy::Alpha(policy) = solve_model(&model, solver)? else {
            return Err(BenchError::Config("dialog sessions need a partially observable model".into()));
        };
        let belief = model.pomdp().map(|p| p.prior.clone()).expect("alpha policies come from POMDPs");
        Ok(DialogSession { model, policy, sensor, belief, turns: 0 })
    }

    pub fn model(&self) -> &DecisionModel {
        &self.model
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    /// Questions answered so far.
    pub fn turns(&self) -> usize {
        self.turns
    }

    /// The `k` most likely requests, highest first.
    pub fn top(&self, k: usize) -> Vec<(String, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.belief.0.iter().copied().enumerate().filter(|(_, p)| *p > 0.0).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.into_iter().take(k).map(|(s, p)| (self.model.state_label(s), p)).collect()
    }

    pub fn prompt(&self) -> Prompt {
        let pomdp = self.model.pomdp().expect("session models are POMDPs");
        let label = self.model.actions[self.policy.lookahead_action(pomdp, &self.belief)].clone();
        if label.starts_with("del_") {
            Prompt::Deliver(label)
        } else {
            Prompt::Ask(label)
        }
    }

    /// Answers the current question; on error nothing changes.
    pub fn answer(&mut self, text: &str) -> Result<(), SessionError> {
        let Prompt::Ask(question) = self.prompt() else { return Err(SessionError::Finished) };
        let text = text.trim().to_ascii_lowercase();
        if text.is_empty() {
            return Err(SessionError::Empty);
        }
        let expected = self.expected(&question);
        let label = match text.as_str() {
            "y" => "yes",
            "n" => "no",
            t => t,
        };
        if !expected.iter().any(|e| e == label) {
            return Err(SessionError::Unrecognized { answer: text.clone(), question, expected });
        }
        let pomdp = self.model.pomdp().expect("session models are POMDPs");
        let a = self.model.action_index(&question).expect("prompted actions exist");
        let o = self.model.observation_index(label).expect("expected answers are observations");
        self.belief = belief_update(pomdp, &self.belief, a, o).map_err(|_| SessionError::Impossible)?;
        self.turns += 1;
        Ok(())
    }

    /// Answers accepted for a question.
    pub fn expected(&self, question: &str) -> Vec<String> {
        match self.sensor.parse(question) {
            Some(DialogAction::Ask(k)) => self.sensor.vocabulary[k].clone(),
            Some(DialogAction::Confirm(..)) => vec!["yes".into(), "no".into()],
            _ => Vec::new(),
        }
    }

    /// The noise-free answer to the current question for a given request.
    pub fn truthful_answer(&self, request: &[String]) -> Option<String> {
        let Prompt::Ask(q) = self.prompt() else { return None };
        match self.sensor.parse(&q)? {
            DialogAction::Ask(k) => request.get(k).cloned(),
            DialogAction::Confirm(k, v) => Some(if request.get(k) == Some(&v) { "yes" } else { "no" }.to_string()),
            DialogAction::Deliver(_) => None,
        }
    }
}

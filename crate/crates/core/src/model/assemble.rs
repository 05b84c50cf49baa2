use super::{ModelError, Result, StateSpace};
use crate::planning::{Belief, Mdp, Pomdp};

/// Read access to a model under construction, handed to reward and
/// observation builders.
pub struct ModelView<'a> {
    pub space: &'a StateSpace,
    pub actions: &'a [String],
    pub transitions: &'a [Vec<(u32, f64)>],
}

impl ModelView<'_> {
    pub fn states(&self) -> usize {
        self.space.states()
    }

    pub fn row(&self, s: usize, a: usize) -> &[(u32, f64)] {
        &self.transitions[s * self.actions.len() + a]
    }

    pub fn value(&self, s: usize, var: &str) -> Option<&str> {
        self.space.value_of(s, var)
    }
}

pub trait RewardBuilder: Send + Sync {
    fn reward(&self, view: &ModelView<'_>, s: usize, a: usize) -> f64;
}

pub trait ObservationBuilder: Send + Sync {
    fn labels(&self) -> Vec<String>;
    /// Probability of observing `o` after `a` lands in `next`.
    fn prob(&self, view: &ModelView<'_>, a: usize, next: usize, o: usize) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Mdp(Mdp),
    Pomdp(Pomdp),
}

#[derive(Debug, Clone)]
pub struct DecisionModel {
    pub space: StateSpace,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    pub kind: ModelKind,
    pub hash: String,
}

impl DecisionModel {
    pub fn mdp(&self) -> &Mdp {
        match &self.kind {
            ModelKind::Mdp(m) => m,
            ModelKind::Pomdp(p) => &p.mdp,
        }
    }

    pub fn pomdp(&self) -> Option<&Pomdp> {
        match &self.kind {
            ModelKind::Pomdp(p) => Some(p),
            ModelKind::Mdp(_) => None,
        }
    }

    pub fn states(&self) -> usize {
        self.space.states()
    }

    pub fn state_label(&self, s: usize) -> String {
        self.space.label(s)
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }

    pub fn observation_index(&self, label: &str) -> Option<usize> {
        self.observations.iter().position(|o| o == label)
    }
}

/// Combines synthesized dynamics with host-coded rewards and, when given, an
/// observation model. `prior` covers the non-sink states; a missing prior is
/// uniform over them.
pub fn assemble_model(
    space: StateSpace,
    actions: Vec<String>,
    transitions: Vec<Vec<(u32, f64)>>,
    prior: Option<Belief>,
    discount: f64,
    reward: &dyn RewardBuilder,
    observation: Option<&dyn ObservationBuilder>,
) -> Result<DecisionModel> {
    let n = space.states();
    let na = actions.len();
    if transitions.len() != n * na {
        return Err(ModelError::Task(format!("{} transition rows for {n} states x {na} actions", transitions.len())));
    }
    let view = ModelView { space: &space, actions: &actions, transitions: &transitions };
    let rewards: Vec<f64> = (0..n * na).map(|i| reward.reward(&view, i / na, i % na)).collect();
    let terminal: Vec<bool> = (0..n).map(|s| space.is_term(s)).collect();
    for (s, _) in terminal.iter().enumerate().filter(|(_, &t)| t) {
        for a in 0..na {
            let row = &transitions[s * na + a];
            if !row.iter().all(|&(t, _)| terminal[t as usize]) {
                return Err(ModelError::Task(format!("term state {} leaves the terminal set", space.label(s))));
            }
        }
    }
    let (kind, observations) = match observation {
        None => {
            let mdp = Mdp { states: n, actions: na, transitions, rewards, terminal, discount };
            mdp.validate()?;
            (ModelKind::Mdp(mdp), Vec::new())
        }
        Some(ob) => {
            let labels = ob.labels();
            let nz = labels.len();
            let mut obs = vec![0.0; na * n * nz];
            for a in 0..na {
                for next in 0..n {
                    for o in 0..nz {
                        obs[(a * n + next) * nz + o] = ob.prob(&view, a, next, o);
                    }
                }
            }
            let mut probs = match prior {
                Some(b) => b.0,
                None => vec![1.0 / space.worlds.len() as f64; space.worlds.len()],
            };
            probs.resize(n, 0.0);
            let pomdp = Pomdp {
                mdp: Mdp { states: n, actions: na, transitions, rewards, terminal, discount },
                observations: nz,
                obs,
                prior: Belief(probs),
            };
            pomdp.validate()?;
            (ModelKind::Pomdp(pomdp), labels)
        }
    };
    let hash = match &kind {
        ModelKind::Mdp(m) => m.hash(),
        ModelKind::Pomdp(p) => p.hash(),
    };
    Ok(DecisionModel { space, actions, observations, kind, hash })
}

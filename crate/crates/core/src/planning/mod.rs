//! Decision models and their solvers.

mod belief;
mod expectimax;
mod mdp;
mod pbvi;
mod policy_io;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use belief::{belief_update, observation_distribution, Belief};
pub use expectimax::{expectimax_oracle, ExpectimaxLimits};
pub use mdp::{value_iteration, MdpPolicy, ViConfig, ViReport};
pub use pbvi::{pbvi_solve, pbvi_trace, AlphaVector, AlphaVectorPolicy, PbviConfig, PbviTrace, ValueInit};
pub use policy_io::{load_policy, save_policy, Policy};

pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("{what} row {row} sums to {sum}")]
    NonStochastic { what: &'static str, row: usize, sum: f64 },
    #[error("non-finite reward at state {state}, action {action}")]
    NonFiniteReward { state: usize, action: usize },
    #[error("value iteration hit the cap of {iterations} iterations (residual {residual:e})")]
    IterationCap { iterations: usize, residual: f64 },
    #[error("observation {observation} has zero probability after action {action}")]
    ImpossibleObservation { action: usize, observation: usize },
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("expectimax tree too large: {0}")]
    SizeGuard(String),
    #[error("policy file: {0}")]
    PolicyFormat(String),
    #[error("policy was solved for model {found}, not {expected}")]
    HashMismatch { expected: String, found: String },
}

pub type Result<T> = std::result::Result<T, PlanError>;

/// A finite MDP with sparse transition rows indexed by `s * actions + a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    pub states: usize,
    pub actions: usize,
    pub transitions: Vec<Vec<(u32, f64)>>,
    pub rewards: Vec<f64>,
    pub terminal: Vec<bool>,
    pub discount: f64,
}

impl Mdp {
    pub fn row(&self, s: usize, a: usize) -> &[(u32, f64)] {
        &self.transitions[s * self.actions + a]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.actions + a]
    }

    /// Dense probability lookup; linear in the row length.
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.row(s, a).iter().filter(|(t, _)| *t as usize == next).map(|(_, p)| p).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (row, entries) in self.transitions.iter().enumerate() {
            let sum: f64 = entries.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE || entries.iter().any(|&(_, p)| p < 0.0) {
                return Err(PlanError::NonStochastic { what: "transition", row, sum });
            }
        }
        for (i, r) in self.rewards.iter().enumerate() {
            if !r.is_finite() {
                return Err(PlanError::NonFiniteReward { state: i / self.actions, action: i % self.actions });
            }
        }
        Ok(())
    }

    pub fn scale_rewards(&mut self, c: f64) {
        for r in &mut self.rewards {
            *r *= c;
        }
    }

    fn hash_into(&self, h: &mut Sha256) {
        h.update((self.states as u64).to_le_bytes());
        h.update((self.actions as u64).to_le_bytes());
        h.update(self.discount.to_le_bytes());
        for row in &self.transitions {
            h.update((row.len() as u64).to_le_bytes());
            for (t, p) in row {
                h.update(t.to_le_bytes());
                h.update(p.to_le_bytes());
            }
        }
        for r in &self.rewards {
            h.update(r.to_le_bytes());
        }
        for &t in &self.terminal {
            h.update([t as u8]);
        }
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"mdp");
        self.hash_into(&mut h);
        hex::encode(h.finalize())
    }
}

/// An MDP plus observations `obs[(a * states + s') * observations + o]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pomdp {
    pub mdp: Mdp,
    pub observations: usize,
    pub obs: Vec<f64>,
    pub prior: Belief,
}

impl Pomdp {
    pub fn states(&self) -> usize {
        self.mdp.states
    }

    pub fn actions(&self) -> usize {
        self.mdp.actions
    }

    pub fn obs_prob(&self, a: usize, next: usize, o: usize) -> f64 {
        self.obs[(a * self.mdp.states + next) * self.observations + o]
    }

    pub fn obs_row(&self, a: usize, next: usize) -> &[f64] {
        let i = (a * self.mdp.states + next) * self.observations;
        &self.obs[i..i + self.observations]
    }

    pub fn validate(&self) -> Result<()> {
        self.mdp.validate()?;
        for a in 0..self.actions() {
            for s in 0..self.states() {
                let row = self.obs_row(a, s);
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_TOLERANCE || row.iter().any(|&p| p < 0.0) {
                    return Err(PlanError::NonStochastic { what: "observation", row: a * self.states() + s, sum });
                }
            }
        }
        let sum: f64 = self.prior.0.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(PlanError::NonStochastic { what: "prior", row: 0, sum });
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"pomdp");
        self.mdp.hash_into(&mut h);
        h.update((self.observations as u64).to_le_bytes());
        for p in self.obs.iter().chain(&self.prior.0) {
            h.update(p.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Index of the maximum, first one on ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if i == 0 || v > best.1 + 1e-12 * best.1.abs().max(1.0) {
            best = (i, v);
        }
    }
    best
}

use serde::{Deserialize, Serialize};

use super::{PlanError, Pomdp, Result};

/// A probability distribution over POMDP states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief(pub Vec<f64>);

impl Belief {
    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, s: usize) -> Self {
        let mut v = vec![0.0; n];
        v[s] = 1.0;
        Belief(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Most likely state, lowest index on ties.
    pub fn argmax(&self) -> usize {
        super::argmax(self.0.iter().copied()).0
    }

    pub fn l1(&self, other: &Belief) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn normalize(&mut self) {
        let s: f64 = self.0.iter().sum();
        if s > 0.0 {
            for p in &mut self.0 {
                *p /= s;
            }
        }
    }
}

/// Predicted next-state distribution `Σ_s T(s,a,·) b(s)`.
pub(crate) fn predict(m: &Pomdp, b: &Belief, a: usize) -> Vec<f64> {
    let mut next = vec![0.0; m.states()];
    for (s, &p) in b.0.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for &(t, q) in m.mdp.row(s, a) {
            next[t as usize] += p * q;
        }
    }
    next
}

/// `pr(o | a, b)` for every observation.
pub fn observation_distribution(m: &Pomdp, b: &Belief, a: usize) -> Vec<f64> {
    let next = predict(m, b, a);
    let mut out = vec![0.0; m.observations];
    for (s, &p) in next.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (o, q) in m.obs_row(a, s).iter().enumerate() {
            out[o] += p * q;
        }
    }
    out
}

/// Bayes filter: `b'(s') ∝ O(s',a,o) Σ_s T(s,a,s') b(s)`.
pub fn belief_update(m: &Pomdp, b: &Belief, a: usize, o: usize) -> Result<Belief> {
    let mut next = predict(m, b, a);
    for (s, p) in next.iter_mut().enumerate() {
        *p *= m.obs_prob(a, s, o);
    }
    let norm: f64 = next.iter().sum();
    if norm <= 1e-300 {
        return Err(PlanError::ImpossibleObservation { action: a, observation: o });
    }
    for p in &mut next {
        *p /= norm;
    }
    Ok(Belief(next))
}

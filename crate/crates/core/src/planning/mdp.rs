use serde::{Deserialize, Serialize};

use super::{argmax, Mdp, PlanError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for ViConfig {
    fn default() -> Self {
        ViConfig { epsilon: 1e-6, max_iterations: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpPolicy {
    pub actions: Vec<usize>,
    pub values: Vec<f64>,
}

impl MdpPolicy {
    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViReport {
    pub policy: MdpPolicy,
    pub iterations: usize,
    /// Sup-norm change of every sweep, in order.
    pub residuals: Vec<f64>,
}

fn q_value(m: &Mdp, v: &[f64], s: usize, a: usize) -> f64 {
    m.reward(s, a) + m.discount * m.row(s, a).iter().map(|&(t, p)| p * v[t as usize]).sum::<f64>()
}

/// Synchronous value iteration until the Bellman residual drops below epsilon.
pub fn value_iteration(m: &Mdp, cfg: ViConfig) -> Result<ViReport> {
    m.validate()?;
    let mut v = vec![0.0; m.states];
    let mut residuals = Vec::new();
    loop {
        let next: Vec<f64> = (0..m.states)
            .map(|s| (0..m.actions).map(|a| q_value(m, &v, s, a)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        residuals.push(residual);
        v = next;
        if residual < cfg.epsilon {
            break;
        }
        if residuals.len() >= cfg.max_iterations {
            return Err(PlanError::IterationCap { iterations: residuals.len(), residual });
        }
    }
    let actions = (0..m.states).map(|s| argmax((0..m.actions).map(|a| q_value(m, &v, s, a))).0).collect();
    Ok(ViReport { policy: MdpPolicy { actions, values: v }, iterations: residuals.len(), residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(discount: f64) -> Mdp {
        // state 0 --a0--> 1 (reward 50); state 1 terminal.
        Mdp {
            states: 2,
            actions: 1,
            transitions: vec![vec![(1, 1.0)], vec![(1, 1.0)]],
            rewards: vec![50.0, 0.0],
            terminal: vec![false, true],
            discount,
        }
    }

    #[test]
    fn one_step_goal() {
        let r = value_iteration(&chain(0.95), ViConfig::default()).unwrap();
        assert!((r.policy.values[0] - 50.0).abs() < 1e-6);
        assert_eq!(r.policy.values[1], 0.0);
    }

    #[test]
    fn two_state_geometric_series() {
        // s0 -> s1 reward 1, s1 -> s0 reward 2; V0 = (1 + 2γ)/(1 − γ²).
        let g = 0.9;
        let m = Mdp {
            states: 2,
            actions: 1,
            transitions: vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            rewards: vec![1.0, 2.0],
            terminal: vec![false, false],
            discount: g,
        };
        let r = value_iteration(&m, ViConfig { epsilon: 1e-10, max_iterations: 100_000 }).unwrap();
        let v0 = (1.0 + 2.0 * g) / (1.0 - g * g);
        let v1 = (2.0 + g) / (1.0 - g * g);
        assert!((r.policy.values[0] - v0).abs() < 1e-8);
        assert!((r.policy.values[1] - v1).abs() < 1e-8);
        assert!(r.residuals.windows(2).skip(1).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn rejects_bad_rows_and_reports_cap() {
        let mut m = chain(0.95);
        m.transitions[0] = vec![(1, 0.5)];
        assert!(matches!(value_iteration(&m, ViConfig::default()), Err(PlanError::NonStochastic { .. })));
        let m = Mdp { rewards: vec![1.0, 1.0], transitions: vec![vec![(0, 1.0)], vec![(1, 1.0)]], ..chain(0.999) };
        let err = value_iteration(&m, ViConfig { epsilon: 1e-9, max_iterations: 10 }).unwrap_err();
        assert!(matches!(err, PlanError::IterationCap { iterations: 10, .. }));
    }
}

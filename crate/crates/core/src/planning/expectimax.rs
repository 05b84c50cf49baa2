//! Exact finite-horizon belief-tree search, used as a test oracle.

use super::belief::{belief_update, observation_distribution};
use super::{Belief, PlanError, Pomdp, Result};

pub const MAX_HORIZON: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectimaxLimits {
    /// Upper bound on expanded belief nodes.
    pub max_nodes: u64,
}

impl Default for ExpectimaxLimits {
    fn default() -> Self {
        ExpectimaxLimits { max_nodes: 50_000_000 }
    }
}

pub fn expectimax_oracle(m: &Pomdp, b: &Belief, horizon: usize, limits: ExpectimaxLimits) -> Result<f64> {
    if horizon > MAX_HORIZON {
        return Err(PlanError::SizeGuard(format!("horizon {horizon} > {MAX_HORIZON}")));
    }
    let mut nodes = 0u64;
    search(m, b, horizon, limits.max_nodes, &mut nodes)
}

fn settled(m: &Pomdp, b: &Belief) -> bool {
    b.0.iter().enumerate().all(|(s, &p)| {
        p == 0.0 || (m.mdp.terminal[s] && (0..m.actions()).all(|a| m.mdp.reward(s, a) == 0.0))
    })
}

fn search(m: &Pomdp, b: &Belief, h: usize, cap: u64, nodes: &mut u64) -> Result<f64> {
    *nodes += 1;
    if *nodes > cap {
        return Err(PlanError::SizeGuard(format!("more than {cap} belief nodes")));
    }
    if h == 0 || settled(m, b) {
        return Ok(0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for a in 0..m.actions() {
        let mut q: f64 = b.0.iter().enumerate().map(|(s, p)| p * m.mdp.reward(s, a)).sum();
        if h > 1 {
            for (o, po) in observation_distribution(m, b, a).into_iter().enumerate() {
                if po <= 1e-15 {
                    continue;
                }
                let nb = belief_update(m, b, a, o)?;
                q += m.mdp.discount * po * search(m, &nb, h - 1, cap, nodes)?;
            }
        }
        best = best.max(q);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::Mdp;

    #[test]
    fn horizon_zero_and_one() {
        let m = Pomdp {
            mdp: Mdp {
                states: 2,
                actions: 2,
                transitions: vec![vec![(0, 1.0)], vec![(0, 1.0)], vec![(1, 1.0)], vec![(1, 1.0)]],
                rewards: vec![1.0, -1.0, 0.0, 3.0],
                terminal: vec![false, false],
                discount: 0.9,
            },
            observations: 1,
            obs: vec![1.0; 4],
            prior: Belief::uniform(2),
        };
        let b = Belief(vec![0.25, 0.75]);
        assert_eq!(expectimax_oracle(&m, &b, 0, ExpectimaxLimits::default()).unwrap(), 0.0);
        let one = expectimax_oracle(&m, &b, 1, ExpectimaxLimits::default()).unwrap();
        assert!((one - (0.25 * -1.0 + 0.75 * 3.0)).abs() < 1e-12);
        assert!(expectimax_oracle(&m, &b, 9, ExpectimaxLimits::default()).is_err());
    }
}

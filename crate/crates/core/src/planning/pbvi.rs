//! Point-based value iteration with randomized farthest-point belief
//! expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::belief::{belief_update, observation_distribution};
use super::{argmax, Belief, PlanError, Pomdp, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub values: Vec<f64>,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVectorPolicy {
    pub vectors: Vec<AlphaVector>,
    pub discount: f64,
}

impl AlphaVectorPolicy {
    fn best(&self, b: &Belief) -> (usize, f64) {
        argmax(self.vectors.iter().map(|v| b.dot(&v.values)))
    }

    pub fn value(&self, b: &Belief) -> f64 {
        self.best(b).1
    }

    pub fn action(&self, b: &Belief) -> usize {
        self.vectors[self.best(b).0].action
    }

    /// Action maximizing immediate reward plus the discounted value of each
    /// successor belief; avoids repeating questions that no longer inform.
    pub fn lookahead_action(&self, m: &Pomdp, b: &Belief) -> usize {
        backup(m, b, &self.vectors, &observation_support(m)).action
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PbviConfig {
    /// Maximum number of belief points.
    pub belief_budget: usize,
    /// Number of backup sweeps over the belief set.
    pub horizon_budget: usize,
    pub seed: u64,
    /// Beliefs always included in the point set.
    #[serde(default)]
    pub extra_beliefs: Vec<Belief>,
    /// Sweeps stop early once no point value moves by more than this.
    #[serde(default)]
    pub tolerance: f64,
    /// Expansion rounds; after the first, points are gathered along
    /// trajectories of the policy solved so far.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub init: ValueInit,
}

/// Starting value function of the sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueInit {
    /// Values of repeating each action forever, kept in every sweep.
    #[default]
    Blind,
    /// Zero everywhere, so sweep `h` holds `h + 1`-step values.
    Zero,
}

fn default_rounds() -> usize {
    4
}

impl Default for PbviConfig {
    fn default() -> Self {
        PbviConfig { belief_budget: 256, horizon_budget: 120, seed: 7, extra_beliefs: Vec::new(), tolerance: 1e-9, rounds: default_rounds(), init: ValueInit::Blind }
    }
}

/// Result of a solve: the policy, the belief points, and the value at each
/// point after every sweep.
#[derive(Debug, Clone)]
pub struct PbviTrace {
    pub policy: AlphaVectorPolicy,
    pub beliefs: Vec<Belief>,
    pub sweep_values: Vec<Vec<f64>>,
}

pub fn pbvi_solve(m: &Pomdp, cfg: &PbviConfig) -> Result<AlphaVectorPolicy> {
    pbvi_trace(m, cfg).map(|t| t.policy)
}

pub fn pbvi_trace(m: &Pomdp, cfg: &PbviConfig) -> Result<PbviTrace> {
    m.validate()?;
    if cfg.belief_budget == 0 || cfg.horizon_budget == 0 {
        return Err(PlanError::Budget("belief and horizon budgets must be at least 1".into()));
    }
    let n = m.states();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blind = match cfg.init {
        ValueInit::Blind => blind_vectors(m, n),
        ValueInit::Zero => Vec::new(),
    };
    let finite = cfg.init == ValueInit::Zero;
    let mut gamma = if finite { vec![AlphaVector { values: vec![0.0; n], action: 0 }] } else { blind.clone() };
    let mut previous: Vec<AlphaVector> = Vec::new();
    let support = observation_support(m);
    let mut sweep_values: Vec<Vec<f64>> = Vec::with_capacity(cfg.horizon_budget);
    let mut beliefs = seed_beliefs(m, cfg);
    let rounds = cfg.rounds.max(1);
    let mut swept = 0;

    for round in 0..rounds {
        let target = cfg.belief_budget * (round + 1) / rounds;
        if round == 0 {
            grow_farthest(m, &mut beliefs, target, &mut rng);
        } else {
            grow_along_policy(m, &mut beliefs, target, &gamma, &support, &mut rng);
        }
        let until = cfg.horizon_budget * (round + 1) / rounds;
        while swept < until {
            swept += 1;
            let fresh = crate::par_map(beliefs.len(), |i| backup(m, &beliefs[i], &gamma, &support));
            let mut next: Vec<AlphaVector> = Vec::with_capacity(beliefs.len() + blind.len());
            let mut values = Vec::with_capacity(beliefs.len());
            for (b, fresh) in beliefs.iter().zip(fresh) {
                let (old_i, old_v) = argmax(gamma.iter().map(|v| b.dot(&v.values)));
                let chosen = if finite || b.dot(&fresh.values) >= old_v { fresh } else { gamma[old_i].clone() };
                values.push(b.dot(&chosen.values));
                if !next.iter().any(|v| v.action == chosen.action && same(&v.values, &chosen.values)) {
                    next.push(chosen);
                }
            }
            for v in &blind {
                if !next.iter().any(|x| same(&x.values, &v.values)) {
                    next.push(v.clone());
                }
            }
            let settled = sweep_values.last().is_some_and(|prev| {
                prev.len() == values.len() && prev.iter().zip(&values).all(|(x, y)| (x - y).abs() <= cfg.tolerance)
            });
            sweep_values.push(values);
            previous = std::mem::replace(&mut gamma, next);
            if settled {
                swept = until;
            }
        }
    }
    // The last sweep's vectors continue into the previous sweep's, so both
    // are kept for lookahead execution.
    for v in previous {
        if !gamma.iter().any(|x| x.action == v.action && same(&x.values, &v.values)) {
            gamma.push(v);
        }
    }
    let policy = AlphaVectorPolicy { vectors: undominated(gamma), discount: m.mdp.discount };
    Ok(PbviTrace { policy, beliefs, sweep_values })
}

/// Value of repeating each action forever. These stay in every sweep, so
/// beliefs far from the sampled points still see acting now as an option.
fn blind_vectors(m: &Pomdp, n: usize) -> Vec<AlphaVector> {
    let g = m.mdp.discount;
    let rmin = m.mdp.rewards.iter().copied().fold(0.0, f64::min);
    let floor = rmin / (1.0 - g);
    let mut out: Vec<AlphaVector> = Vec::new();
    for a in 0..m.actions() {
        let mut v = vec![floor; n];
        for _ in 0..10_000 {
            let next: Vec<f64> =
                (0..n).map(|s| m.mdp.reward(s, a) + g * m.mdp.row(s, a).iter().map(|&(t, p)| p * v[t as usize]).sum::<f64>()).collect();
            let delta = next.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            v = next;
            if delta < 1e-10 {
                break;
            }
        }
        if !out.iter().any(|x| same(&x.values, &v)) {
            out.push(AlphaVector { values: v, action: a });
        }
    }
    out
}

/// Drops vectors that another vector matches or beats in every state. Maxima
/// over the set are unchanged.
fn undominated(vectors: Vec<AlphaVector>) -> Vec<AlphaVector> {
    let beats = |x: &AlphaVector, y: &AlphaVector| x.values.iter().zip(&y.values).all(|(a, b)| a >= b);
    let mut keep: Vec<AlphaVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if keep.iter().any(|k| beats(k, &v)) {
            continue;
        }
        keep.retain(|k| !beats(&v, k));
        keep.push(v);
    }
    keep
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// Observations that can occur after each action.
fn observation_support(m: &Pomdp) -> Vec<Vec<usize>> {
    (0..m.actions())
        .map(|a| {
            (0..m.observations)
                .filter(|&o| (0..m.states()).any(|s| m.obs_prob(a, s, o) > 0.0))
                .collect()
        })
        .collect()
}

/// Point-based Bellman backup at one belief. For each action and observation
/// the successor vector is picked against the unnormalized updated belief,
/// which only touches the states reachable from the belief's support.
fn backup(m: &Pomdp, b: &Belief, gamma: &[AlphaVector], support: &[Vec<usize>]) -> AlphaVector {
    let n = m.states();
    let g = m.mdp.discount;
    let held: Vec<usize> = (0..n).filter(|&s| b.0[s] > 0.0).collect();
    let mut pred = vec![0.0; n];
    let mut best: Option<(f64, AlphaVector)> = None;
    for a in 0..m.actions() {
        let mut reached = Vec::new();
        for &s in &held {
            for &(t, p) in m.mdp.row(s, a) {
                let t = t as usize;
                if pred[t] == 0.0 {
                    reached.push(t);
                }
                pred[t] += b.0[s] * p;
            }
        }
        let mut values: Vec<f64> = (0..n).map(|s| m.mdp.reward(s, a)).collect();
        for &o in &support[a] {
            let tau: Vec<(usize, f64)> =
                reached.iter().map(|&t| (t, pred[t] * m.obs_prob(a, t, o))).filter(|(_, w)| *w > 0.0).collect();
            let k = argmax(gamma.iter().map(|v| tau.iter().map(|&(t, w)| w * v.values[t]).sum::<f64>())).0;
            let alpha = &gamma[k].values;
            for (s, v) in values.iter_mut().enumerate() {
                let future: f64 =
                    m.mdp.row(s, a).iter().map(|&(t, p)| p * m.obs_prob(a, t as usize, o) * alpha[t as usize]).sum();
                *v += g * future;
            }
        }
        for t in reached {
            pred[t] = 0.0;
        }
        let val = b.dot(&values);
        if best.as_ref().map_or(true, |(bv, _)| val > bv + 1e-12 * bv.abs().max(1.0)) {
            best = Some((val, AlphaVector { values, action: a }));
        }
    }
    best.expect("at least one action").1
}

fn seed_beliefs(m: &Pomdp, cfg: &PbviConfig) -> Vec<Belief> {
    let mut set = vec![m.prior.clone()];
    for b in &cfg.extra_beliefs {
        if set.iter().all(|x| x.l1(b) > 1e-9) {
            set.push(b.clone());
        }
    }
    set
}

/// Adds, for each member, its sampled successor farthest from the set.
fn grow_farthest(m: &Pomdp, set: &mut Vec<Belief>, target: usize, rng: &mut ChaCha8Rng) {
    while set.len() < target {
        let mut added = false;
        let frontier = set.clone();
        for b in &frontier {
            if set.len() >= target {
                break;
            }
            let mut best: Option<(f64, Belief)> = None;
            for a in 0..m.actions() {
                let Some(nb) = sample_successor(m, b, a, rng) else { continue };
                let floor = best.as_ref().map_or(1e-6, |(bd, _)| *bd);
                if let Some(d) = distance_above(set, &nb, floor) {
                    best = Some((d, nb));
                }
            }
            if let Some((_, nb)) = best {
                set.push(nb);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
}

/// Adds beliefs met along trajectories from the prior that follow the
/// current lookahead policy, with occasional random actions.
fn grow_along_policy(
    m: &Pomdp,
    set: &mut Vec<Belief>,
    target: usize,
    gamma: &[AlphaVector],
    support: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
) {
    const EXPLORE: f64 = 0.2;
    const DEPTH: usize = 40;
    let mut budget = 50 * target.max(1);
    while set.len() < target && budget > 0 {
        let mut b = m.prior.clone();
        for _ in 0..DEPTH {
            budget = budget.saturating_sub(1);
            let settled: f64 = (0..m.states()).filter(|&s| m.mdp.terminal[s]).map(|s| b.0[s]).sum();
            if settled > 1.0 - 1e-9 {
                break;
            }
            let a = if rng.gen::<f64>() < EXPLORE { rng.gen_range(0..m.actions()) } else { backup(m, &b, gamma, support).action };
            let Some(nb) = sample_successor(m, &b, a, rng) else { break };
            if distance_above(set, &nb, 1e-3).is_some() {
                set.push(nb.clone());
                if set.len() >= target {
                    break;
                }
            }
            b = nb;
        }
    }
}

/// Distance from `b` to the nearest member of `set`, if it exceeds `floor`.
fn distance_above(set: &[Belief], b: &Belief, floor: f64) -> Option<f64> {
    let mut d = f64::INFINITY;
    for x in set {
        d = d.min(x.l1(b));
        if d <= floor {
            return None;
        }
    }
    Some(d)
}

fn sample_successor(m: &Pomdp, b: &Belief, a: usize, rng: &mut ChaCha8Rng) -> Option<Belief> {
    let dist = observation_distribution(m, b, a);
    let mut u: f64 = rng.gen();
    let mut pick = None;
    for (o, p) in dist.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        pick = Some(o);
        if u < *p {
            break;
        }
        u -= p;
    }
    belief_update(m, b, a, pick?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{expectimax_oracle, value_iteration, ExpectimaxLimits, Mdp, ViConfig};

    /// Two doors, one hides a tiger; listen costs 1 and is 85% accurate.
    pub(crate) fn tiger() -> Pomdp {
        // states: 0 tiger-left, 1 tiger-right, 2 done. actions: listen, open-left, open-right.
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        for s in 0..3 {
            for a in 0..3 {
                if s == 2 || a == 0 {
                    transitions.push(vec![(s as u32, 1.0)]);
                    rewards.push(if s == 2 { 0.0 } else { -1.0 });
                } else {
                    transitions.push(vec![(2, 1.0)]);
                    let opened_tiger = (a == 1 && s == 0) || (a == 2 && s == 1);
                    rewards.push(if opened_tiger { -100.0 } else { 10.0 });
                }
            }
        }
        let mut obs = Vec::new();
        for a in 0..3 {
            for s in 0..3 {
                obs.extend(match (a, s) {
                    (0, 0) => [0.85, 0.15],
                    (0, 1) => [0.15, 0.85],
                    _ => [0.5, 0.5],
                });
            }
        }
        Pomdp {
            mdp: Mdp { states: 3, actions: 3, transitions, rewards, terminal: vec![false, false, true], discount: 0.95 },
            observations: 2,
            obs,
            prior: Belief(vec![0.5, 0.5, 0.0]),
        }
    }

    #[test]
    fn tiger_listen_region_is_bracketed() {
        let m = tiger();
        let cfg = PbviConfig {
            extra_beliefs: (0..=20).map(|i| Belief(vec![i as f64 / 20.0, 1.0 - i as f64 / 20.0, 0.0])).collect(),
            ..PbviConfig::default()
        };
        let p = pbvi_solve(&m, &cfg).unwrap();
        let acts: Vec<usize> = (0..=20).map(|i| p.action(&Belief(vec![i as f64 / 20.0, 1.0 - i as f64 / 20.0, 0.0]))).collect();
        assert_eq!(acts[0], 1, "tiger surely right: open left");
        assert_eq!(acts[20], 2, "tiger surely left: open right");
        assert_eq!(acts[10], 0, "uncertain: listen");
        let first_listen = acts.iter().position(|&a| a == 0).unwrap();
        let last_listen = acts.iter().rposition(|&a| a == 0).unwrap();
        assert!(acts[first_listen..=last_listen].iter().all(|&a| a == 0));
        assert!(acts[..first_listen].iter().all(|&a| a == 1));
        assert!(acts[last_listen + 1..].iter().all(|&a| a == 2));
    }

    #[test]
    fn monotone_and_bounded_by_oracle() {
        let m = tiger();
        let cfg = PbviConfig { horizon_budget: 5, belief_budget: 30, rounds: 1, ..PbviConfig::default() };
        let t = pbvi_trace(&m, &cfg).unwrap();
        for w in t.sweep_values.windows(2) {
            for (a, b) in w[0].iter().zip(&w[1]) {
                assert!(b + 1e-9 >= *a);
            }
        }
        let t = pbvi_trace(&m, &PbviConfig { init: ValueInit::Zero, ..cfg }).unwrap();
        for (h, vals) in t.sweep_values.iter().enumerate() {
            for (b, v) in t.beliefs.iter().zip(vals) {
                let exact = expectimax_oracle(&m, b, h + 1, ExpectimaxLimits::default()).unwrap();
                assert!(*v <= exact + 1e-6, "sweep {h}: {v} > {exact}");
            }
        }
    }

    #[test]
    fn observable_model_matches_mdp() {
        // Free perfect observation of the state collapses the POMDP to its MDP.
        let mut m = tiger();
        m.observations = 3;
        m.obs = (0..3).flat_map(|_| (0..3).flat_map(|s| (0..3).map(move |o| if o == s { 1.0 } else { 0.0 }))).collect();
        let vi = value_iteration(&m.mdp, ViConfig { epsilon: 1e-10, ..ViConfig::default() }).unwrap();
        let cfg = PbviConfig {
            horizon_budget: 600,
            extra_beliefs: (0..3).map(|s| Belief::point(3, s)).collect(),
            ..PbviConfig::default()
        };
        let p = pbvi_solve(&m, &cfg).unwrap();
        for s in 0..3 {
            assert!((p.value(&Belief::point(3, s)) - vi.policy.values[s]).abs() < 1e-6);
        }
    }
}
